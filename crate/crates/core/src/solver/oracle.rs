//! Grid search over row-stochastic mappings for tiny instances.
//!
//! Entries are multiples of the resolution. The leakage splits into a sum over
//! output columns of a function of that column alone, so once every row but
//! the last is fixed, each column's contribution is tabulated for every value
//! the last row can put there and the last row is scanned with table lookups.
//!
//! When even the prefix rows are too many to enumerate, the search runs
//! exhaustively on the coarsest sub-grid of the requested one that fits, then
//! exhaustively over boxes of the fine grid around the best coarse points,
//! re-centering each box until its optimum stops moving.

use super::lmo::linear_minimizer;
use super::problem::Problem;
use super::SolveResult;
use crate::dist::{ensure_same, expected_distortion, leakage, ConditionalMapping, DistortionMatrix, JointDistribution};
use crate::error::{Error, Result};

const RESOLUTIONS: [f64; 3] = [0.05, 0.02, 0.01];
const MAX_VARIABLES: usize = 9;
const PREFIX_LIMIT: usize = 500_000;
const CANDIDATES: usize = 4;
const MAX_RECENTER: usize = 50;

#[derive(Debug, Clone)]
struct RowOption {
    units: Vec<u16>,
    dist: f64,
}

/// Compositions of `total` units over the allowed columns of row `b`, each
/// column bounded by `bounds[j]`.
fn row_options(prob: &Problem, b: usize, total: u16, scale: f64, bounds: &[(u16, u16)]) -> Vec<RowOption> {
    let cols: Vec<usize> = prob.allowed_cols(b).collect();
    let mut out = Vec::new();
    let mut units = vec![0u16; prob.n_out];
    fn rec(
        prob: &Problem,
        b: usize,
        cols: &[usize],
        k: usize,
        left: u16,
        scale: f64,
        bounds: &[(u16, u16)],
        units: &mut Vec<u16>,
        out: &mut Vec<RowOption>,
    ) {
        let j = cols[k];
        let (lo, hi) = bounds[j];
        if k + 1 == cols.len() {
            if left >= lo && left <= hi {
                units[j] = left;
                let dist = cols
                    .iter()
                    .map(|&c| units[c] as f64 * prob.cost(b, c))
                    .sum::<f64>()
                    * prob.pb[b]
                    / scale;
                out.push(RowOption { units: units.clone(), dist });
                units[j] = 0;
            }
            return;
        }
        for u in lo..=hi.min(left) {
            units[j] = u;
            rec(prob, b, cols, k + 1, left - u, scale, bounds, units, out);
        }
        units[j] = 0;
    }
    rec(prob, b, &cols, 0, total, scale, bounds, &mut units, &mut out);
    out
}

struct Search<'a> {
    prob: &'a Problem,
    scale: f64,
    delta: f64,
    keep: usize,
    /// Best (value, option index per row), ascending by value.
    best: Vec<(f64, Vec<usize>)>,
    evaluated: usize,
}

impl<'a> Search<'a> {
    fn offer(&mut self, value: f64, pick: &[usize]) {
        if self.best.len() == self.keep && value >= self.best[self.keep - 1].0 {
            return;
        }
        let pos = self.best.partition_point(|(v, _)| *v <= value);
        self.best.insert(pos, (value, pick.to_vec()));
        self.best.truncate(self.keep);
    }

    fn column_value(&self, acc: &[f64], j: usize, last: usize, u: u16) -> f64 {
        let prob = self.prob;
        let n_out = prob.n_out;
        let mut xs = [0.0f64; 16];
        let mut col = 0.0;
        for a in 0..prob.n_a {
            let x = acc[a * n_out + j] + prob.prior_row(a)[last] * u as f64 / self.scale;
            if a < xs.len() {
                xs[a] = x;
            }
            col += x;
        }
        if col <= 0.0 {
            return 0.0;
        }
        let mut v = 0.0;
        for a in 0..prob.n_a {
            let x = if a < xs.len() { xs[a] } else { acc[a * n_out + j] + prob.prior_row(a)[last] * u as f64 / self.scale };
            if x > 0.0 && prob.pa[a] > 0.0 {
                v += x * (x / (prob.pa[a] * col)).log2();
            }
        }
        v
    }

    fn run(&mut self, options: &[Vec<RowOption>]) {
        let prob = self.prob;
        let mut acc = vec![0.0; prob.n_a * prob.n_out];
        let mut pick = vec![0usize; options.len()];
        self.descend(options, 0, 0.0, &mut acc, &mut pick);
    }

    fn descend(&mut self, options: &[Vec<RowOption>], b: usize, dist: f64, acc: &mut Vec<f64>, pick: &mut Vec<usize>) {
        let prob = self.prob;
        let n_out = prob.n_out;
        let budget = self.delta - dist + 1e-12;
        if budget < 0.0 {
            return;
        }
        if b + 1 == options.len() {
            let last = &options[b];
            let mut lo = vec![u16::MAX; n_out];
            let mut hi = vec![0u16; n_out];
            for o in last {
                for j in 0..n_out {
                    lo[j] = lo[j].min(o.units[j]);
                    hi[j] = hi[j].max(o.units[j]);
                }
            }
            let tables: Vec<Vec<f64>> = (0..n_out)
                .map(|j| (lo[j]..=hi[j]).map(|u| self.column_value(acc, j, b, u)).collect())
                .collect();
            for (i, o) in last.iter().enumerate() {
                if o.dist > budget {
                    continue;
                }
                self.evaluated += 1;
                let v: f64 = (0..n_out).map(|j| tables[j][(o.units[j] - lo[j]) as usize]).sum();
                pick[b] = i;
                self.offer(v, pick);
            }
            return;
        }
        for (i, o) in options[b].iter().enumerate() {
            if o.dist > budget {
                continue;
            }
            pick[b] = i;
            for a in 0..prob.n_a {
                let p = prob.prior_row(a)[b] / self.scale;
                for j in 0..n_out {
                    acc[a * n_out + j] += p * o.units[j] as f64;
                }
            }
            self.descend(options, b + 1, dist + o.dist, acc, pick);
            for a in 0..prob.n_a {
                let p = prob.prior_row(a)[b] / self.scale;
                for j in 0..n_out {
                    acc[a * n_out + j] -= p * o.units[j] as f64;
                }
            }
        }
    }
}

fn units_of(options: &[Vec<RowOption>], pick: &[usize]) -> Vec<Vec<u16>> {
    pick.iter().enumerate().map(|(b, &i)| options[b][i].units.clone()).collect()
}

fn prefix_count(options: &[Vec<RowOption>]) -> usize {
    options[..options.len() - 1].iter().fold(1usize, |acc, o| acc.saturating_mul(o.len()))
}

/// Best grid point as (leakage, units per row, points evaluated).
pub(super) fn grid_optimum(prob: &Problem, units: u16, delta: f64, prefix_limit: usize) -> (f64, Vec<Vec<u16>>, usize) {
    let (n_in, n_out) = (prob.n_in, prob.n_out);
    let full_bounds = vec![(0u16, units); n_out];
    let fine: Vec<Vec<RowOption>> = (0..n_in)
        .map(|b| row_options(prob, b, units, units as f64, &full_bounds))
        .collect();

    let mut evaluated = 0;
    let (value, best) = if prefix_count(&fine) <= prefix_limit {
        let mut search = Search { prob, scale: units as f64, delta, keep: 1, best: Vec::new(), evaluated: 0 };
        search.run(&fine);
        evaluated += search.evaluated;
        let (v, pick) = search.best.into_iter().next().expect("the cheapest vertex lies on every grid");
        (v, units_of(&fine, &pick))
    } else {
        let coarse_units = (1..units)
            .rev()
            .filter(|c| units % c == 0)
            .find(|&c| {
                let opts: Vec<Vec<RowOption>> = (0..n_in)
                    .map(|b| row_options(prob, b, c, c as f64, &vec![(0, c); n_out]))
                    .collect();
                prefix_count(&opts) <= prefix_limit
            })
            .unwrap_or(1);
        let ratio = units / coarse_units;
        let coarse: Vec<Vec<RowOption>> = (0..n_in)
            .map(|b| row_options(prob, b, coarse_units, coarse_units as f64, &vec![(0, coarse_units); n_out]))
            .collect();
        let mut search = Search {
            prob: prob,
            scale: coarse_units as f64,
            delta,
            keep: CANDIDATES,
            best: Vec::new(),
            evaluated: 0,
        };
        search.run(&coarse);
        evaluated += search.evaluated;

        let mut best: Option<(f64, Vec<Vec<u16>>)> = None;
        for (_, pick) in search.best.clone() {
            let mut center: Vec<Vec<u16>> = units_of(&coarse, &pick)
                .into_iter()
                .map(|row| row.into_iter().map(|u| u * ratio).collect())
                .collect();
            let mut value = f64::INFINITY;
            for _ in 0..MAX_RECENTER {
                let boxed: Vec<Vec<RowOption>> = (0..n_in)
                    .map(|b| {
                        let bounds: Vec<(u16, u16)> = center[b]
                            .iter()
                            .map(|&c| (c.saturating_sub(ratio), (c + ratio).min(units)))
                            .collect();
                        row_options(prob, b, units, units as f64, &bounds)
                    })
                    .collect();
                let mut local = Search { prob, scale: units as f64, delta, keep: 1, best: Vec::new(), evaluated: 0 };
                local.run(&boxed);
                evaluated += local.evaluated;
                let (v, p) = local.best.into_iter().next().expect("box contains its feasible center");
                let next = units_of(&boxed, &p);
                if v < value && next != center {
                    value = v;
                    center = next;
                } else {
                    value = value.min(v);
                    break;
                }
            }
            if best.as_ref().map_or(true, |(bv, _)| value < *bv) {
                best = Some((value, center));
            }
        }
        best.expect("at least one coarse candidate")
    };
    (value, best, evaluated)
}

/// Exhaustive search for the leakage-optimal mapping whose entries are
/// multiples of `resolution` (one of 0.05, 0.02, 0.01) among those meeting the
/// distortion budget. Limited to `|B|·|B̂| ≤ 9`.
pub fn brute_force_oracle(
    prior: &JointDistribution,
    d: &DistortionMatrix,
    delta: f64,
    resolution: f64,
) -> Result<SolveResult> {
    ensure_same(prior.cols(), d.input(), "prior columns vs distortion input")?;
    let (n_in, n_out) = (d.input().len(), d.output().len());
    if n_in * n_out > MAX_VARIABLES {
        return Err(Error::TooLarge(format!(
            "brute-force search handles at most {MAX_VARIABLES} variables, got {}",
            n_in * n_out
        )));
    }
    if prior.n_rows() > 16 {
        return Err(Error::TooLarge("brute-force search handles at most 16 private symbols".into()));
    }
    let units = RESOLUTIONS
        .iter()
        .find(|&&r| (r - resolution).abs() < 1e-12)
        .map(|r| (1.0 / r).round() as u16)
        .ok_or_else(|| Error::InvalidArgument(format!("resolution must be one of {RESOLUTIONS:?}")))?;
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidArgument(format!("distortion budget must be nonnegative, got {delta}")));
    }
    let prob = Problem::new(prior, d);
    let min_distortion = prob.min_distortion();
    if min_distortion > delta {
        return Err(Error::InfeasibleDelta { delta, min_distortion });
    }

    let (_, best_units, evaluated) = grid_optimum(&prob, units, delta, PREFIX_LIMIT);

    let mut probs = vec![0.0; n_in * n_out];
    for (b, row) in best_units.iter().enumerate() {
        for (j, &u) in row.iter().enumerate() {
            probs[b * n_out + j] = u as f64 / units as f64;
        }
    }
    let mapping = ConditionalMapping::from_iterate(d.input().clone(), d.output().clone(), probs, d.mapping_support())?;

    let joint = prob.joint(mapping.probs());
    let mut grad = vec![0.0; n_in * n_out];
    prob.gradient(&joint, &mut grad);
    let s = linear_minimizer(&prob, &grad, delta);
    let gm: f64 = mapping.probs().iter().zip(&grad).map(|(x, g)| x * g).sum();
    let dual_gap = (gm - s.dot(&grad, n_out)).max(0.0);

    Ok(SolveResult {
        leakage_bits: leakage(prior, &mapping)?,
        achieved_distortion: expected_distortion(prior, &mapping, d)?,
        mapping,
        iterations: evaluated,
        converged: true,
        dual_gap,
    })
}
