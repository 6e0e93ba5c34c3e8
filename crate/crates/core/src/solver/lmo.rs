//! Linear minimization over the feasible set: a product of (masked) simplices
//! cut by the single distortion budget `Σ_b p_B(b) Σ_b̂ m(b,b̂) d(b,b̂) ≤ Δ`.
//!
//! Without the budget each row independently picks its cheapest column. With
//! it the problem is a multiple-choice knapsack LP: every row walks down the
//! lower convex hull of its (distortion, gradient) points, and the walks are
//! merged globally in order of gradient increase per unit of distortion saved.
//! The ratio at which the budget is met is the Lagrange multiplier of the
//! constraint; at most one row ends up split between two columns.

use std::cmp::Ordering;

use super::problem::Problem;

/// Fractional part of a vertex: row `row` keeps `1 - weight` on its primary
/// column and puts `weight` on `col`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Split {
    pub row: u32,
    pub col: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Vertex {
    pub choice: Vec<u32>,
    pub split: Option<Split>,
}

impl Vertex {
    pub fn dot(&self, grad: &[f64], n_out: usize) -> f64 {
        let mut s: f64 = self
            .choice
            .iter()
            .enumerate()
            .map(|(b, &j)| grad[b * n_out + j as usize])
            .sum();
        if let Some(sp) = self.split {
            let b = sp.row as usize;
            s += sp.weight * (grad[b * n_out + sp.col as usize] - grad[b * n_out + self.choice[b] as usize]);
        }
        s
    }

    /// `dense += scale * self`.
    pub fn add_to(&self, dense: &mut [f64], n_out: usize, scale: f64) {
        for (b, &j) in self.choice.iter().enumerate() {
            dense[b * n_out + j as usize] += scale;
        }
        if let Some(sp) = self.split {
            let b = sp.row as usize;
            dense[b * n_out + self.choice[b] as usize] -= scale * sp.weight;
            dense[b * n_out + sp.col as usize] += scale * sp.weight;
        }
    }

    /// Output joint `Σ_b p(a,b) v(b, ·)`.
    pub fn joint(&self, prob: &Problem) -> Vec<f64> {
        let n_out = prob.n_out;
        let mut out = vec![0.0; prob.n_a * n_out];
        for a in 0..prob.n_a {
            let prior_row = prob.prior_row(a);
            let out_row = &mut out[a * n_out..(a + 1) * n_out];
            for (b, &j) in self.choice.iter().enumerate() {
                out_row[j as usize] += prior_row[b];
            }
            if let Some(sp) = self.split {
                let b = sp.row as usize;
                let w = prior_row[b] * sp.weight;
                out_row[self.choice[b] as usize] -= w;
                out_row[sp.col as usize] += w;
            }
        }
        out
    }

    #[cfg(test)]
    pub fn distortion(&self, prob: &Problem) -> f64 {
        let mut total: f64 = self
            .choice
            .iter()
            .enumerate()
            .map(|(b, &j)| prob.pb[b] * prob.cost(b, j as usize))
            .sum();
        if let Some(sp) = self.split {
            let b = sp.row as usize;
            total += prob.pb[b] * sp.weight * (prob.cost(b, sp.col as usize) - prob.cost(b, self.choice[b] as usize));
        }
        total
    }
}

struct Edge {
    ratio: f64,
    row: usize,
    seq: usize,
    to: usize,
    saving: f64,
}

/// Minimizes `⟨grad, s⟩` over feasible mappings `s`. Ties go to the lowest
/// output index.
pub(crate) fn linear_minimizer(prob: &Problem, grad: &[f64], delta: f64) -> Vertex {
    let n_out = prob.n_out;
    let mut choice = Vec::with_capacity(prob.n_in);
    let mut total = 0.0;
    for b in 0..prob.n_in {
        let g = &grad[b * n_out..(b + 1) * n_out];
        let mut best: Option<usize> = None;
        for j in prob.allowed_cols(b) {
            best = match best {
                None => Some(j),
                Some(k) => {
                    let better = g[j] < g[k] || (g[j] == g[k] && prob.cost(b, j) < prob.cost(b, k));
                    Some(if better { j } else { k })
                }
            };
        }
        let j = best.expect("every row has an allowed output");
        total += prob.pb[b] * prob.cost(b, j);
        choice.push(j as u32);
    }

    let mut excess = total - delta;
    if excess <= 0.0 {
        return Vertex { choice, split: None };
    }

    // Lower hull walks toward cheaper columns, one chain per row.
    let mut edges = Vec::new();
    for b in 0..prob.n_in {
        if prob.pb[b] <= 0.0 {
            continue;
        }
        let g = &grad[b * n_out..(b + 1) * n_out];
        let mut cur = choice[b] as usize;
        let mut seq = 0;
        loop {
            let (x0, y0) = (prob.cost(b, cur), g[cur]);
            let mut next: Option<(usize, f64)> = None;
            for j in prob.allowed_cols(b) {
                let x = prob.cost(b, j);
                if x >= x0 {
                    continue;
                }
                let ratio = (g[j] - y0) / (x0 - x);
                next = match next {
                    None => Some((j, ratio)),
                    Some((k, r)) => {
                        let take = ratio < r || (ratio == r && x < prob.cost(b, k));
                        Some(if take { (j, ratio) } else { (k, r) })
                    }
                };
            }
            let Some((j, ratio)) = next else { break };
            // Per unit of budget, which weights the row by p_B(b).
            edges.push(Edge {
                ratio: ratio / prob.pb[b],
                row: b,
                seq,
                to: j,
                saving: prob.pb[b] * (x0 - prob.cost(b, j)),
            });
            seq += 1;
            cur = j;
        }
    }
    edges.sort_by(|e, f| {
        e.ratio
            .partial_cmp(&f.ratio)
            .unwrap_or(Ordering::Equal)
            .then(e.row.cmp(&f.row))
            .then(e.seq.cmp(&f.seq))
    });

    let mut split = None;
    for e in edges {
        if excess <= 0.0 {
            break;
        }
        if e.saving <= excess {
            choice[e.row] = e.to as u32;
            excess -= e.saving;
        } else {
            split = Some(Split { row: e.row as u32, col: e.to as u32, weight: excess / e.saving });
            break;
        }
    }
    Vertex { choice, split }
}
