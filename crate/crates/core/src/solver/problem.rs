//! Flat numeric view of one instance: prior, marginals, costs and mask.
//!
//! The leakage is evaluated from the output joint `P(a, b̂)`, which is linear
//! in the mapping, so line searches only touch `|A|·|B̂|` numbers.

use crate::dist::{DistortionMatrix, JointDistribution};

/// Posterior probabilities `P(a | b̂)` below this are clamped when taking
/// gradient logs.
pub(crate) const GRAD_FLOOR: f64 = 1e-12;

pub(crate) struct Problem {
    pub n_a: usize,
    pub n_in: usize,
    pub n_out: usize,
    prior: Vec<f64>,
    pub pa: Vec<f64>,
    pub pb: Vec<f64>,
    cost: Vec<f64>,
    allowed: Vec<bool>,
    /// `Σ_a p(a,b) log2(p(a,b) / (p_a p_b))`: the derivative of moving row
    /// `b` alone into an output column that carries no mass.
    fresh_column_grad: Vec<f64>,
}

impl Problem {
    /// `prior.cols()` and `d.input()` must already be checked equal.
    pub fn new(prior: &JointDistribution, d: &DistortionMatrix) -> Self {
        let n_a = prior.n_rows();
        let n_in = prior.n_cols();
        let n_out = d.output().len();
        let pa = prior.row_marginal();
        let pb = prior.col_marginal();
        let allowed: Vec<bool> = (0..n_in * n_out)
            .map(|k| d.support().allows(k / n_out, k % n_out))
            .collect();
        let fresh_column_grad = (0..n_in)
            .map(|b| {
                (0..n_a)
                    .map(|a| {
                        let p = prior.get(a, b);
                        if p > 0.0 {
                            p * (p / (pa[a] * pb[b])).log2()
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect();
        Self {
            n_a,
            n_in,
            n_out,
            prior: prior.mass().to_vec(),
            pa,
            pb,
            cost: d.raw_costs().to_vec(),
            allowed,
            fresh_column_grad,
        }
    }

    pub fn prior_row(&self, a: usize) -> &[f64] {
        &self.prior[a * self.n_in..(a + 1) * self.n_in]
    }

    pub fn cost(&self, b: usize, j: usize) -> f64 {
        self.cost[b * self.n_out + j]
    }

    pub fn allows(&self, b: usize, j: usize) -> bool {
        self.allowed[b * self.n_out + j]
    }

    pub fn allowed_cols(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.allowed[b * self.n_out..(b + 1) * self.n_out];
        row.iter().enumerate().filter(|(_, &ok)| ok).map(|(j, _)| j)
    }

    /// `Σ_b p_B(b) min_b̂ d(b, b̂)` over allowed pairs.
    pub fn min_distortion(&self) -> f64 {
        (0..self.n_in)
            .map(|b| {
                let m = self
                    .allowed_cols(b)
                    .map(|j| self.cost(b, j))
                    .fold(f64::INFINITY, f64::min);
                self.pb[b] * m
            })
            .sum()
    }

    pub fn distortion(&self, m: &[f64]) -> f64 {
        let mut total = 0.0;
        for b in 0..self.n_in {
            let row = &m[b * self.n_out..(b + 1) * self.n_out];
            let c = &self.cost[b * self.n_out..(b + 1) * self.n_out];
            let s: f64 = row.iter().zip(c).map(|(x, y)| x * y).sum();
            total += self.pb[b] * s;
        }
        total
    }

    /// `P(a, b̂) = Σ_b p(a,b) m(b, b̂)`.
    pub fn joint(&self, m: &[f64]) -> Vec<f64> {
        let n_out = self.n_out;
        let mut out = vec![0.0; self.n_a * n_out];
        for a in 0..self.n_a {
            let o = &mut out[a * n_out..(a + 1) * n_out];
            for (b, &p) in self.prior_row(a).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (x, &q) in o.iter_mut().zip(&m[b * n_out..(b + 1) * n_out]) {
                    *x += p * q;
                }
            }
        }
        out
    }

    fn out_marginal(&self, joint: &[f64]) -> Vec<f64> {
        let mut col = vec![0.0; self.n_out];
        for a in 0..self.n_a {
            for (c, &x) in col.iter_mut().zip(&joint[a * self.n_out..(a + 1) * self.n_out]) {
                *c += x;
            }
        }
        col
    }

    /// Leakage in bits from an output joint.
    pub fn objective(&self, joint: &[f64]) -> f64 {
        let col = self.out_marginal(joint);
        let mut total = 0.0;
        for a in 0..self.n_a {
            if self.pa[a] == 0.0 {
                continue;
            }
            for (j, &x) in joint[a * self.n_out..(a + 1) * self.n_out].iter().enumerate() {
                if x > 0.0 && col[j] > 0.0 {
                    total += x * (x / (self.pa[a] * col[j])).log2();
                }
            }
        }
        total
    }

    /// Gradient of the leakage w.r.t. every mapping entry, in bits.
    ///
    /// An output column with no mass at all gets the one-sided derivative of
    /// moving each row alone into it. The solver keeps every reachable column
    /// positive, so this only happens for inputs without prior mass.
    pub fn gradient(&self, joint: &[f64], out: &mut [f64]) {
        let n_out = self.n_out;
        let col = self.out_marginal(joint);
        // log-ratio table L(a, b̂); NaN marks an empty output column.
        let mut table = vec![0.0; self.n_a * n_out];
        for a in 0..self.n_a {
            for j in 0..n_out {
                table[a * n_out + j] = if col[j] <= 0.0 {
                    f64::NAN
                } else if self.pa[a] == 0.0 {
                    0.0
                } else {
                    let posterior = (joint[a * n_out + j] / col[j]).max(GRAD_FLOOR);
                    (posterior / self.pa[a]).log2()
                };
            }
        }
        for b in 0..self.n_in {
            let g = &mut out[b * n_out..(b + 1) * n_out];
            g.iter_mut().for_each(|x| *x = 0.0);
            for a in 0..self.n_a {
                let p = self.prior[a * self.n_in + b];
                if p == 0.0 {
                    continue;
                }
                for (x, &l) in g.iter_mut().zip(&table[a * n_out..(a + 1) * n_out]) {
                    if !l.is_nan() {
                        *x += p * l;
                    }
                }
            }
            for (j, x) in g.iter_mut().enumerate() {
                if col[j] <= 0.0 {
                    *x = self.fresh_column_grad[b];
                }
            }
        }
    }

    /// Each row spread evenly over its allowed outputs.
    pub fn uniform_allowed(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.n_in * self.n_out];
        for b in 0..self.n_in {
            let cols: Vec<usize> = self.allowed_cols(b).collect();
            for &j in &cols {
                u[b * self.n_out + j] = 1.0 / cols.len() as f64;
            }
        }
        u
    }

    /// Derivative of `γ ↦ J(joint + γ·dir)`.
    pub fn directional_derivative(&self, joint: &[f64], dir: &[f64], gamma: f64) -> f64 {
        let n_out = self.n_out;
        let mut col = vec![0.0; n_out];
        for a in 0..self.n_a {
            for j in 0..n_out {
                col[j] += joint[a * n_out + j] + gamma * dir[a * n_out + j];
            }
        }
        let mut total = 0.0;
        for a in 0..self.n_a {
            if self.pa[a] == 0.0 {
                continue;
            }
            for j in 0..n_out {
                let d = dir[a * n_out + j];
                if d == 0.0 {
                    continue;
                }
                let x = (joint[a * n_out + j] + gamma * d).max(f64::MIN_POSITIVE);
                let c = col[j].max(f64::MIN_POSITIVE);
                total += d * (x / (self.pa[a] * c)).log2();
            }
        }
        total
    }
}
