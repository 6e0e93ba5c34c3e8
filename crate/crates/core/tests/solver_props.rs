mod common;

use common::*;
use privf_core::{
    expected_distortion, leakage, mutual_information, solve_privacy_mapping, sweep_curve, sweep_curve_parallel,
    DistortionMatrix, JointDistribution, SolverOptions,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sparse_distortion(n: usize, seed: u64) -> DistortionMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = alpha("b", n);
    DistortionMatrix::from_fn(b.clone(), b, |i, j| {
        if i == j {
            Some(0.0)
        } else if rng.gen_bool(0.8) {
            Some(rng.gen_range(0.1..2.0))
        } else {
            None
        }
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn solutions_are_feasible(p in arb_joint(2..=3, 2..=5), seed in 0u64..1000, frac in 0.0f64..1.0) {
        let d = sparse_distortion(p.n_cols(), seed);
        let delta = frac * d.d_max();
        let opts = SolverOptions::default();
        let r = solve_privacy_mapping(&p, &d, delta, &opts).unwrap();
        for b in 0..p.n_cols() {
            let row = r.mapping.row(b);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            for (j, &x) in row.iter().enumerate() {
                prop_assert!(x >= 0.0);
                if d.cost(b, j).is_none() {
                    prop_assert_eq!(x, 0.0);
                }
            }
        }
        prop_assert!(expected_distortion(&p, &r.mapping, &d).unwrap() <= delta + 1e-6);
        prop_assert!(r.dual_gap >= -1e-12);
        if r.converged {
            prop_assert!(r.dual_gap <= opts.tol * mutual_information(&p).max(1.0));
        }
        prop_assert!((leakage(&p, &r.mapping).unwrap() - r.leakage_bits).abs() <= 1e-12);
    }

    #[test]
    fn sweeps_are_monotone(p in arb_joint(2..=3, 3..=4), seed in 0u64..1000) {
        let d = sparse_distortion(p.n_cols(), seed);
        let deltas: Vec<f64> = (0..8).map(|k| k as f64 * d.d_max() / 7.0).collect();
        let opts = SolverOptions::default();
        for curve in [sweep_curve(&p, &d, &deltas, &opts).unwrap(), sweep_curve_parallel(&p, &d, &deltas, &opts).unwrap()] {
            let leak: Vec<f64> = curve.solved().map(|(_, r)| r.leakage_bits).collect();
            for w in leak.windows(2) {
                prop_assert!(w[0] >= w[1] - 1e-6);
            }
        }
    }

    #[test]
    fn independent_data_never_leaks(pa in prop::collection::vec(0.05f64..1.0, 2..=3), pb in prop::collection::vec(0.05f64..1.0, 2..=4), frac in 0.0f64..1.0) {
        let (sa, sb): (f64, f64) = (pa.iter().sum(), pb.iter().sum());
        let pa: Vec<f64> = pa.iter().map(|x| x / sa).collect();
        let pb: Vec<f64> = pb.iter().map(|x| x / sb).collect();
        let p = JointDistribution::product(alpha("a", pa.len()), alpha("b", pb.len()), &pa, &pb).unwrap();
        let d = DistortionMatrix::hamming(p.cols().clone());
        let r = solve_privacy_mapping(&p, &d, frac, &SolverOptions::default()).unwrap();
        prop_assert!(r.leakage_bits <= 1e-9);
    }
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_joint(&mut rng, 3, 5);
    let d = DistortionMatrix::hamming(p.cols().clone());
    let a = solve_privacy_mapping(&p, &d, 0.3, &SolverOptions::default()).unwrap();
    let b = solve_privacy_mapping(&p, &d, 0.3, &SolverOptions::default()).unwrap();
    assert_eq!(a, b);
    let deltas = [0.0, 0.2, 0.4];
    let x = sweep_curve_parallel(&p, &d, &deltas, &SolverOptions::default()).unwrap();
    let y = sweep_curve_parallel(&p, &d, &deltas, &SolverOptions::default()).unwrap();
    assert_eq!(x, y);
}
