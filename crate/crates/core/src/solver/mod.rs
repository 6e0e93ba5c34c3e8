//! Leakage-minimizing mappings under an average-distortion budget.
//!
//! The program
//!
//! ```text
//! minimize   I(A; B̂)            over p(b̂|b)
//! subject to E[d(B, B̂)] ≤ Δ,    every row of p(·|b) on the simplex
//! ```
//!
//! is convex. It is solved by Frank-Wolfe (conditional gradient) with away
//! steps: the iterate is kept as a convex combination of feasible vertices
//! returned by the linear minimization oracle, so every iterate is feasible
//! and the Frank-Wolfe gap `⟨∇J(m), m − s⟩` certifies `J(m) − J* ≤ gap`.

mod lmo;
mod oracle;
mod problem;
mod sweep;

use std::collections::HashMap;

pub use oracle::brute_force_oracle;
pub use sweep::{sweep_curve, sweep_curve_parallel, CurvePoint, TradeoffCurve};

use crate::dist::{
    ensure_same, expected_distortion, leakage, mutual_information, ConditionalMapping,
    DistortionMatrix, JointDistribution,
};
use crate::error::{Error, Result};
use lmo::{linear_minimizer, Vertex};
use problem::Problem;

/// Default cap on the number of optimization variables (allowed pairs).
pub const DEFAULT_VAR_CAP: usize = 250_000;

/// Slack allowed on the distortion budget of a returned mapping.
pub const DISTORTION_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `γ_k = 2 / (k + 2)`, plain Frank-Wolfe steps only.
    Diminishing,
    /// Exact line search on the convex one-dimensional restriction, with away
    /// steps.
    LineSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Each input goes to its cheapest allowed output, preferring the output
    /// with the same label (the identity when `B̂ ⊇ B`).
    IdentityOrNearest,
    /// Uniform over the allowed outputs of each row; may violate the budget.
    Uniform,
    Custom(ConditionalMapping),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Relative objective change and Frank-Wolfe gap tolerance.
    pub tol: f64,
    pub step_rule: StepRule,
    pub init: Init,
    /// Largest number of allowed (input, output) pairs accepted.
    pub var_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol: 1e-6,
            step_rule: StepRule::LineSearch,
            init: Init::IdentityOrNearest,
            var_cap: DEFAULT_VAR_CAP,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub mapping: ConditionalMapping,
    pub leakage_bits: f64,
    pub achieved_distortion: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Frank-Wolfe gap at the returned mapping, in bits.
    pub dual_gap: f64,
}

/// Partial derivatives of the leakage with respect to every `p(b̂|b)`.
///
/// Output columns with no mass, where the leakage is not differentiable, get
/// the one-sided limit for moving a single input into them; posteriors below
/// `1e-12` are clamped before taking logs.
pub fn leakage_gradient(prior: &JointDistribution, map: &ConditionalMapping) -> Result<Vec<f64>> {
    ensure_same(prior.cols(), map.input(), "prior columns vs mapping input")?;
    let free = DistortionMatrix::from_fn(map.input().clone(), map.output().clone(), |_, _| Some(0.0))?;
    let prob = Problem::new(prior, &free);
    let joint = prob.joint(map.probs());
    let mut grad = vec![0.0; map.probs().len()];
    prob.gradient(&joint, &mut grad);
    Ok(grad)
}

#[derive(Debug, Clone)]
enum Atom {
    Vertex(Vertex),
    Dense(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct VertexKey(Vec<u32>, Option<(u32, u32, u64)>);

impl Atom {
    fn key(&self) -> Option<VertexKey> {
        match self {
            Atom::Vertex(v) => Some(VertexKey(
                v.choice.clone(),
                v.split.map(|s| (s.row, s.col, s.weight.to_bits())),
            )),
            Atom::Dense(_) => None,
        }
    }

    fn dot(&self, grad: &[f64], n_out: usize) -> f64 {
        match self {
            Atom::Vertex(v) => v.dot(grad, n_out),
            Atom::Dense(m) => m.iter().zip(grad).map(|(x, g)| x * g).sum(),
        }
    }

    fn joint(&self, prob: &Problem) -> Vec<f64> {
        match self {
            Atom::Vertex(v) => v.joint(prob),
            Atom::Dense(m) => prob.joint(m),
        }
    }

    fn add_to(&self, dense: &mut [f64], n_out: usize, scale: f64) {
        match self {
            Atom::Vertex(v) => v.add_to(dense, n_out, scale),
            Atom::Dense(m) => dense.iter_mut().zip(m).for_each(|(x, y)| *x += scale * y),
        }
    }
}

/// Convex combination of atoms with the dense iterate kept alongside.
struct ActiveSet {
    atoms: Vec<Atom>,
    weights: Vec<f64>,
    index: HashMap<VertexKey, usize>,
}

impl ActiveSet {
    fn new(atom: Atom) -> Self {
        let mut set = Self { atoms: Vec::new(), weights: Vec::new(), index: HashMap::new() };
        set.push(atom, 1.0);
        set
    }

    fn push(&mut self, atom: Atom, weight: f64) {
        if let Some(k) = atom.key() {
            if let Some(&i) = self.index.get(&k) {
                self.weights[i] += weight;
                return;
            }
            self.index.insert(k, self.atoms.len());
        }
        self.atoms.push(atom);
        self.weights.push(weight);
    }

    fn remove(&mut self, i: usize) {
        if let Some(k) = self.atoms[i].key() {
            self.index.remove(&k);
        }
        self.atoms.swap_remove(i);
        self.weights.swap_remove(i);
        if i < self.atoms.len() {
            if let Some(k) = self.atoms[i].key() {
                self.index.insert(k, i);
            }
        }
    }

    fn reset(&mut self, atom: Atom) {
        *self = Self::new(atom);
    }
}

fn initial_atom(prob: &Problem, prior: &JointDistribution, d: &DistortionMatrix, delta: f64, init: &Init) -> Result<Atom> {
    match init {
        Init::IdentityOrNearest => {
            let choice = (0..prob.n_in)
                .map(|b| {
                    let label = prior.cols().label(b);
                    let min = prob.allowed_cols(b).map(|j| prob.cost(b, j)).fold(f64::INFINITY, f64::min);
                    let same = d.output().index_of(label).filter(|&j| prob.allows(b, j) && prob.cost(b, j) <= min);
                    let j = same.unwrap_or_else(|| {
                        prob.allowed_cols(b).find(|&j| prob.cost(b, j) <= min).expect("row has an allowed output")
                    });
                    j as u32
                })
                .collect();
            Ok(Atom::Vertex(Vertex { choice, split: None }))
        }
        Init::Uniform => {
            let n_out = prob.n_out;
            let mut m = vec![0.0; prob.n_in * n_out];
            for b in 0..prob.n_in {
                let cols: Vec<usize> = prob.allowed_cols(b).collect();
                for &j in &cols {
                    m[b * n_out + j] = 1.0 / cols.len() as f64;
                }
            }
            let dist = prob.distortion(&m);
            if dist > delta {
                return Err(Error::InvalidArgument(format!(
                    "uniform initialization has distortion {dist}, above the budget {delta}"
                )));
            }
            Ok(Atom::Dense(m))
        }
        Init::Custom(map) => {
            ensure_same(map.input(), d.input(), "initial mapping input")?;
            ensure_same(map.output(), d.output(), "initial mapping output")?;
            let dist = expected_distortion(prior, map, d)?;
            if dist > delta + 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "initial mapping has distortion {dist}, above the budget {delta}"
                )));
            }
            Ok(Atom::Dense(map.probs().to_vec()))
        }
    }
}

/// Largest weight of the uniform-over-allowed mapping mixed into iterates.
const SMOOTHING: f64 = 1e-7;

/// Iterates are released as `(1−η)·m + η·u`, with `u` uniform over each
/// row's allowed outputs. Every reachable output column then carries mass,
/// where the leakage is differentiable and the Frank-Wolfe gap is a valid
/// certificate. At an empty column only the one-sided derivative of moving a
/// single row exists; jointly moving several rows there can pay off while
/// every single move does not, which stalls plain Frank-Wolfe at suboptimal
/// points. The mixture costs at most `η·J(u)` bits.
struct Smoothing {
    eta: f64,
    /// `1 − η`, the factor between gradients in `m` and in the mixture.
    scale: f64,
    uniform: Vec<f64>,
    distortion: f64,
    /// `η` times the output joint of `u`.
    base: Vec<f64>,
}

impl Smoothing {
    /// `η` is kept small enough that the start and the cheapest mapping
    /// still meet the tightened budget with room to spare.
    fn new(prob: &Problem, delta: f64, min_distortion: f64, start_distortion: f64) -> Self {
        let uniform = prob.uniform_allowed();
        let distortion = prob.distortion(&uniform);
        let mut eta: f64 = SMOOTHING;
        for d0 in [min_distortion, start_distortion] {
            if distortion > d0 {
                eta = eta.min(0.5 * (delta - d0) / (distortion - d0));
            }
        }
        let eta = eta.max(0.0);
        let base = prob.joint(&uniform).into_iter().map(|x| eta * x).collect();
        Self { eta, scale: 1.0 - eta, uniform, distortion, base }
    }

    /// Budget for `m` so that the mixture meets `delta`.
    fn budget(&self, delta: f64) -> f64 {
        if self.eta > 0.0 {
            (delta - self.eta * self.distortion) / self.scale
        } else {
            delta
        }
    }

    fn lift(&self, mut joint: Vec<f64>) -> Vec<f64> {
        joint.iter_mut().zip(&self.base).for_each(|(x, b)| *x = self.scale * *x + b);
        joint
    }

    fn mapping(&self, m: &[f64]) -> Vec<f64> {
        m.iter().zip(&self.uniform).map(|(x, u)| self.scale * x + self.eta * u).collect()
    }

    fn with_eta(&self, eta: f64) -> Self {
        let scale = eta / self.eta;
        Self {
            eta,
            scale: 1.0 - eta,
            uniform: self.uniform.clone(),
            distortion: self.distortion,
            base: self.base.iter().map(|x| x * scale).collect(),
        }
    }
}

/// Mixture weights of the coarse stages, largest first.
const CONTINUATION: [f64; 2] = [1e-2, 1e-4];

/// Gap tolerance of the coarse stages.
const STAGE_TOL: f64 = 1e-4;

/// One Frank-Wolfe run on `m` under a fixed smoothing.
struct Stage {
    smooth: Smoothing,
    budget: f64,
    gap_tol: f64,
    /// Relative objective change counted as a stall.
    tol: f64,
    max_iters: usize,
}

impl Stage {
    /// Returns the iterations taken and whether the gap met the tolerance.
    fn run(&self, prob: &Problem, m: &mut [f64], active: &mut ActiveSet, rule: StepRule) -> (usize, bool) {
        let smooth = &self.smooth;
        let n_out = prob.n_out;
        let mut joint = smooth.lift(prob.joint(m));
        let mut grad = vec![0.0; m.len()];
        let mut prev_obj = prob.objective(&joint);
        let mut stall = 0;
        let mut iterations = 0;
        for k in 0..self.max_iters {
            if k > 0 && k % REFRESH_EVERY == 0 {
                joint = smooth.lift(prob.joint(m));
            }
            prob.gradient(&joint, &mut grad);
            let s = linear_minimizer(prob, &grad, self.budget);
            let gm: f64 = m.iter().zip(&grad).map(|(x, g)| x * g).sum();
            let raw_gap = (gm - s.dot(&grad, n_out)).max(0.0);
            if smooth.scale * raw_gap <= self.gap_tol {
                return (iterations, true);
            }
            iterations = k + 1;
            match rule {
                StepRule::LineSearch => {
                    // Shift weight from the active atom the gradient likes
                    // least straight onto the new vertex.
                    let (i, _) = active
                        .atoms
                        .iter()
                        .enumerate()
                        .map(|(i, a)| (i, a.dot(&grad, n_out)))
                        .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)))
                        .expect("active set is never empty");
                    let gamma_max = active.weights[i];
                    let s_joint = smooth.lift(s.joint(prob));
                    let v_joint = smooth.lift(active.atoms[i].joint(prob));
                    let dir: Vec<f64> = s_joint.iter().zip(&v_joint).map(|(x, y)| x - y).collect();
                    let gamma = line_search(prob, &joint, &dir, gamma_max);
                    if gamma <= 0.0 {
                        break;
                    }
                    active.atoms[i].add_to(m, n_out, -gamma);
                    s.add_to(m, n_out, gamma);
                    joint.iter_mut().zip(&dir).for_each(|(x, d)| *x += gamma * d);
                    active.weights[i] -= gamma;
                    if gamma >= gamma_max || active.weights[i] <= 1e-15 {
                        active.remove(i);
                    }
                    if active.atoms.is_empty() {
                        active.reset(Atom::Vertex(s));
                    } else {
                        active.push(Atom::Vertex(s), gamma);
                    }
                }
                StepRule::Diminishing => {
                    let s_joint = smooth.lift(s.joint(prob));
                    let gamma = 2.0 / (k as f64 + 2.0);
                    m.iter_mut().for_each(|x| *x *= 1.0 - gamma);
                    s.add_to(m, n_out, gamma);
                    joint.iter_mut().zip(&s_joint).for_each(|(x, y)| *x = (1.0 - gamma) * *x + gamma * y);
                }
            }

            let obj = prob.objective(&joint);
            // Tiny steps far from optimality are growing out of a nearly
            // empty column and do not count as a stall.
            if (prev_obj - obj).abs() <= self.tol * obj.abs() && smooth.scale * raw_gap <= STALL_GAP * self.gap_tol {
                stall += 1;
                if stall >= STALL_WINDOW {
                    // Stops the run; convergence is judged by the gap.
                    break;
                }
            } else {
                stall = 0;
            }
            prev_obj = obj;
        }
        (iterations, false)
    }
}

/// Largest `γ ∈ [0, γ_max]` minimizing the convex restriction, found by
/// bisection on its derivative.
fn line_search(prob: &Problem, joint: &[f64], dir: &[f64], gamma_max: f64) -> f64 {
    if prob.directional_derivative(joint, dir, gamma_max) <= 0.0 {
        return gamma_max;
    }
    let (mut lo, mut hi) = (0.0, gamma_max);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if prob.directional_derivative(joint, dir, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * gamma_max.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

const STALL_WINDOW: usize = 5;
/// Stalls only count once the gap is within this factor of the tolerance.
const STALL_GAP: f64 = 1e3;
const REFRESH_EVERY: usize = 64;

/// Solves the leakage-minimization program for one distortion budget.
pub fn solve_privacy_mapping(
    prior: &JointDistribution,
    d: &DistortionMatrix,
    delta: f64,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    ensure_same(prior.cols(), d.input(), "prior columns vs distortion input")?;
    opts.validate()?;
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidArgument(format!("distortion budget must be nonnegative, got {delta}")));
    }
    let variables = d.support().count();
    if variables > opts.var_cap {
        return Err(Error::VariableCap { variables, cap: opts.var_cap });
    }

    let prob = Problem::new(prior, d);
    let min_distortion = prob.min_distortion();
    if min_distortion > delta {
        return Err(Error::InfeasibleDelta { delta, min_distortion });
    }
    let gap_tol = opts.tol * mutual_information(prior).max(1.0);
    let n_out = prob.n_out;

    let first = initial_atom(&prob, prior, d, delta, &opts.init)?;
    if let Some(result) = constant_solution(prior, d, delta)? {
        return Ok(result);
    }
    let mut m = vec![0.0; prob.n_in * n_out];
    first.add_to(&mut m, n_out, 1.0);
    let smooth = Smoothing::new(&prob, delta, min_distortion, prob.distortion(&m));
    let budget = smooth.budget(delta);
    let mut active = ActiveSet::new(first);

    // Coarse stages find the support while no column is nearly empty.
    let mut iterations = 0;
    for eta in CONTINUATION.into_iter().filter(|&e| smooth.eta > 0.0 && e > smooth.eta) {
        let cap = (opts.max_iters / 4).min(opts.max_iters - iterations);
        let stage = Stage { smooth: smooth.with_eta(eta), budget, gap_tol: gap_tol.max(STAGE_TOL), tol: opts.tol, max_iters: cap };
        iterations += stage.run(&prob, &mut m, &mut active, opts.step_rule).0;
    }
    let stage = Stage { smooth, budget, gap_tol, tol: opts.tol, max_iters: opts.max_iters - iterations };
    let (n, converged) = stage.run(&prob, &mut m, &mut active, opts.step_rule);
    iterations += n;
    let smooth = stage.smooth;

    // Certificate at the point actually returned.
    let joint = smooth.lift(prob.joint(&m));
    let mut grad = vec![0.0; m.len()];
    prob.gradient(&joint, &mut grad);
    let s = linear_minimizer(&prob, &grad, budget);
    let gm: f64 = m.iter().zip(&grad).map(|(x, g)| x * g).sum();
    let gap = smooth.scale * (gm - s.dot(&grad, n_out)).max(0.0);
    let converged = converged || gap <= gap_tol;
    let m = smooth.mapping(&m);

    let mapping = ConditionalMapping::from_iterate(d.input().clone(), d.output().clone(), m, d.mapping_support())?;
    let achieved_distortion = expected_distortion(prior, &mapping, d)?;
    let leakage_bits = leakage(prior, &mapping)?;
    Ok(SolveResult {
        mapping,
        leakage_bits,
        achieved_distortion,
        iterations,
        converged,
        dual_gap: gap,
    })
}

/// When some output every input may use is within budget, mapping everything
/// there leaks nothing. Iterating would only approach this point slowly.
fn constant_solution(prior: &JointDistribution, d: &DistortionMatrix, delta: f64) -> Result<Option<SolveResult>> {
    let p_b = prior.col_marginal();
    let best = (0..d.output().len())
        .filter_map(|j| {
            (0..p_b.len())
                .map(|b| d.cost(b, j).map(|c| p_b[b] * c))
                .sum::<Option<f64>>()
                .map(|cost| (j, cost))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1));
    let Some((target, _)) = best.filter(|&(_, cost)| cost <= delta + 1e-9) else {
        return Ok(None);
    };
    let mut mapping = ConditionalMapping::constant(d.input().clone(), d.output().clone(), target)?;
    if let Some(support) = d.mapping_support() {
        mapping = mapping.with_support(support)?;
    }
    Ok(Some(SolveResult {
        leakage_bits: leakage(prior, &mapping)?,
        achieved_distortion: expected_distortion(prior, &mapping, d)?,
        mapping,
        iterations: 0,
        converged: true,
        dual_gap: 0.0,
    }))
}
