#![allow(dead_code)]

use std::sync::Arc;

use privf_core::{Alphabet, ConditionalMapping, JointDistribution};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn alpha(prefix: &str, n: usize) -> Arc<Alphabet> {
    Arc::new(Alphabet::indexed(prefix, n).unwrap())
}

pub fn joint_from(rows: usize, cols: usize, weights: &[f64]) -> JointDistribution {
    JointDistribution::from_weights(alpha("a", rows), alpha("b", cols), weights.to_vec()).unwrap()
}

pub fn mapping_from(n_in: usize, n_out: usize, weights: &[f64]) -> ConditionalMapping {
    let mut probs = weights.to_vec();
    for row in probs.chunks_mut(n_out) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    ConditionalMapping::new(alpha("b", n_in), alpha("b", n_out), probs, None).unwrap()
}

/// Joint over `rows × cols` with strictly positive mass.
pub fn arb_joint(rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = JointDistribution> {
    (rows, cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(0.01f64..1.0, r * c).prop_map(move |w| joint_from(r, c, &w))
    })
}

/// A prior and two mappings on `B → B` with full rows.
pub fn arb_instance() -> impl Strategy<Value = (JointDistribution, ConditionalMapping, ConditionalMapping)> {
    (2usize..=3, 2usize..=4).prop_flat_map(|(r, c)| {
        (
            prop::collection::vec(0.01f64..1.0, r * c),
            prop::collection::vec(0.0f64..1.0, c * c),
            prop::collection::vec(0.0f64..1.0, c * c),
        )
            .prop_map(move |(w, m1, m2)| {
                let fix = |mut v: Vec<f64>| {
                    for row in v.chunks_mut(c) {
                        row[0] += 1e-3;
                    }
                    v
                };
                (joint_from(r, c, &w), mapping_from(c, c, &fix(m1)), mapping_from(c, c, &fix(m2)))
            })
    })
}

pub fn random_joint(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> JointDistribution {
    let w: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0.01..1.0)).collect();
    joint_from(rows, cols, &w)
}
