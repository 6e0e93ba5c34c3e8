//! Discrete probability objects and the information measures built on them.
//!
//! All logarithms are base 2, so every entropy and mutual information is
//! reported in bits. The conventions `0 log 0 = 0` and `0 log(0/0) = 0` apply
//! throughout.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Sum-to-one tolerance for distributions built in memory.
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Sum-to-one tolerance for probabilities read from external data.
pub const INGESTION_TOL: f64 = 1e-6;

/// An ordered set of opaque symbol labels with a bijective index.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = labels.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidArgument("alphabet must not be empty".into()));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(s.clone()));
            }
        }
        Ok(Self { symbols, index })
    }

    /// `n` labels of the form `{prefix}{i}`.
    pub fn indexed(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("{prefix}{i}")))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.symbols).finish()
    }
}

pub(crate) fn ensure_same(a: &Arc<Alphabet>, b: &Arc<Alphabet>, what: &str) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.symbols == b.symbols {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch(format!(
            "{what}: {} symbols vs {} symbols",
            a.len(),
            b.len()
        )))
    }
}

fn check_probabilities(values: &[f64], tol: f64, what: &str) -> Result<f64> {
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "{what}: entry {i} is {v}"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!(
            "{what}: entries sum to {sum}"
        )));
    }
    Ok(sum)
}

/// A joint distribution `p(a, b)` stored row-major, rows indexed by the
/// private alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: Arc<Alphabet>,
    cols: Arc<Alphabet>,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: Arc<Alphabet>, cols: Arc<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        check_shape(mass.len(), rows.len(), cols.len())?;
        check_probabilities(&mass, CONSTRUCTION_TOL, "joint distribution")?;
        Ok(Self { rows, cols, mass })
    }

    /// Accepts probabilities that sum to one within the ingestion tolerance and
    /// renormalizes them.
    pub fn from_external(rows: Arc<Alphabet>, cols: Arc<Alphabet>, mut mass: Vec<f64>) -> Result<Self> {
        check_shape(mass.len(), rows.len(), cols.len())?;
        let sum = check_probabilities(&mass, INGESTION_TOL, "joint distribution")?;
        mass.iter_mut().for_each(|m| *m /= sum);
        Ok(Self { rows, cols, mass })
    }

    /// Normalizes arbitrary nonnegative weights (e.g. counts).
    pub fn from_weights(rows: Arc<Alphabet>, cols: Arc<Alphabet>, mut weights: Vec<f64>) -> Result<Self> {
        check_shape(weights.len(), rows.len(), cols.len())?;
        let mut total = 0.0;
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!("weight {w}")));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { rows, cols, mass: weights })
    }

    /// The product distribution `p_A ⊗ p_B`.
    pub fn product(rows: Arc<Alphabet>, cols: Arc<Alphabet>, pa: &[f64], pb: &[f64]) -> Result<Self> {
        let mass = pa
            .iter()
            .flat_map(|&x| pb.iter().map(move |&y| x * y))
            .collect();
        Self::new(rows, cols, mass)
    }

    pub fn rows(&self) -> &Arc<Alphabet> {
        &self.rows
    }

    pub fn cols(&self) -> &Arc<Alphabet> {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.mass[a * self.cols.len() + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        let n = self.cols.len();
        &self.mass[a * n..(a + 1) * n]
    }

    /// Marginal over the row alphabet, `p_A`.
    pub fn row_marginal(&self) -> Vec<f64> {
        (0..self.n_rows()).map(|a| self.row(a).iter().sum()).collect()
    }

    /// Marginal over the column alphabet, `p_B`.
    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols()];
        for a in 0..self.n_rows() {
            for (o, &m) in out.iter_mut().zip(self.row(a)) {
                *o += m;
            }
        }
        out
    }

    /// The same distribution with its alphabets reordered to match `rows` and
    /// `cols`, which must hold the same label sets.
    pub fn reindexed(&self, rows: Arc<Alphabet>, cols: Arc<Alphabet>) -> Result<Self> {
        if rows.len() != self.n_rows() || cols.len() != self.n_cols() {
            return Err(Error::AlphabetMismatch("alphabet sizes differ".into()));
        }
        let mut mass = vec![0.0; self.mass.len()];
        for (a, la) in rows.labels().iter().enumerate() {
            let sa = self
                .rows
                .index_of(la)
                .ok_or_else(|| Error::AlphabetMismatch(format!("row label {la:?} missing")))?;
            for (b, lb) in cols.labels().iter().enumerate() {
                let sb = self
                    .cols
                    .index_of(lb)
                    .ok_or_else(|| Error::AlphabetMismatch(format!("column label {lb:?} missing")))?;
                mass[a * cols.len() + b] = self.get(sa, sb);
            }
        }
        Ok(Self { rows, cols, mass })
    }
}

fn check_shape(len: usize, rows: usize, cols: usize) -> Result<()> {
    if len != rows * cols {
        return Err(Error::InvalidArgument(format!(
            "table has {len} entries, expected {rows}x{cols}"
        )));
    }
    Ok(())
}

/// Allowed (input, output) pairs of a mapping, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMask {
    n_in: usize,
    n_out: usize,
    allowed: Arc<[bool]>,
}

impl SupportMask {
    pub fn new(n_in: usize, n_out: usize, allowed: Vec<bool>) -> Result<Self> {
        check_shape(allowed.len(), n_in, n_out)?;
        Ok(Self { n_in, n_out, allowed: allowed.into() })
    }

    pub fn allows(&self, b: usize, j: usize) -> bool {
        self.allowed[b * self.n_out + j]
    }

    pub fn row(&self, b: usize) -> &[bool] {
        &self.allowed[b * self.n_out..(b + 1) * self.n_out]
    }

    pub fn count(&self) -> usize {
        self.allowed.iter().filter(|&&x| x).count()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_in, self.n_out)
    }
}

/// A row-stochastic conditional distribution `p(b̂ | b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMapping {
    input: Arc<Alphabet>,
    output: Arc<Alphabet>,
    probs: Vec<f64>,
    support: Option<SupportMask>,
}

impl ConditionalMapping {
    pub fn new(
        input: Arc<Alphabet>,
        output: Arc<Alphabet>,
        probs: Vec<f64>,
        support: Option<SupportMask>,
    ) -> Result<Self> {
        let (n_in, n_out) = (input.len(), output.len());
        check_shape(probs.len(), n_in, n_out)?;
        if let Some(mask) = &support {
            if mask.dims() != (n_in, n_out) {
                return Err(Error::InvalidArgument("support mask has the wrong shape".into()));
            }
        }
        for b in 0..n_in {
            let row = &probs[b * n_out..(b + 1) * n_out];
            check_probabilities(row, CONSTRUCTION_TOL, &format!("mapping row {:?}", input.label(b)))
                .map_err(|e| Error::InvalidMapping(e.to_string()))?;
            if let Some(mask) = &support {
                for (j, &p) in row.iter().enumerate() {
                    if p != 0.0 && !mask.allows(b, j) {
                        return Err(Error::InvalidMapping(format!(
                            "mass {p:e} outside the support at ({:?}, {:?})",
                            input.label(b),
                            output.label(j)
                        )));
                    }
                }
            }
        }
        Ok(Self { input, output, probs, support })
    }

    /// Rows are clipped at zero and renormalized before validation; absorbs
    /// round-off from iterative solvers.
    pub(crate) fn from_iterate(
        input: Arc<Alphabet>,
        output: Arc<Alphabet>,
        mut probs: Vec<f64>,
        support: Option<SupportMask>,
    ) -> Result<Self> {
        let n_out = output.len();
        for (b, row) in probs.chunks_mut(n_out).enumerate() {
            if let Some(mask) = &support {
                for (j, p) in row.iter_mut().enumerate() {
                    if !mask.allows(b, j) {
                        *p = 0.0;
                    }
                }
            }
            row.iter_mut().for_each(|p| *p = p.max(0.0));
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= s);
        }
        Self::new(input, output, probs, support)
    }

    /// The identity mapping `b̂ = b` on a single alphabet.
    pub fn identity(alphabet: Arc<Alphabet>) -> Self {
        let n = alphabet.len();
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            probs[i * n + i] = 1.0;
        }
        Self { input: alphabet.clone(), output: alphabet, probs, support: None }
    }

    /// Every input maps deterministically to output index `target`.
    pub fn constant(input: Arc<Alphabet>, output: Arc<Alphabet>, target: usize) -> Result<Self> {
        if target >= output.len() {
            return Err(Error::InvalidArgument(format!("output index {target} out of range")));
        }
        let n_out = output.len();
        let mut probs = vec![0.0; input.len() * n_out];
        for b in 0..input.len() {
            probs[b * n_out + target] = 1.0;
        }
        Ok(Self { input, output, probs, support: None })
    }

    /// Deterministic mapping sending input `b` to output `targets[b]`.
    pub fn deterministic(input: Arc<Alphabet>, output: Arc<Alphabet>, targets: &[usize]) -> Result<Self> {
        if targets.len() != input.len() {
            return Err(Error::InvalidArgument("one target per input symbol required".into()));
        }
        let n_out = output.len();
        let mut probs = vec![0.0; input.len() * n_out];
        for (b, &t) in targets.iter().enumerate() {
            if t >= n_out {
                return Err(Error::InvalidArgument(format!("output index {t} out of range")));
            }
            probs[b * n_out + t] = 1.0;
        }
        Ok(Self { input, output, probs, support: None })
    }

    pub fn with_support(self, support: SupportMask) -> Result<Self> {
        Self::new(self.input, self.output, self.probs, Some(support))
    }

    pub fn input(&self) -> &Arc<Alphabet> {
        &self.input
    }

    pub fn output(&self) -> &Arc<Alphabet> {
        &self.output
    }

    pub fn support(&self) -> Option<&SupportMask> {
        self.support.as_ref()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, b: usize) -> &[f64] {
        let n = self.output.len();
        &self.probs[b * n..(b + 1) * n]
    }

    pub fn get(&self, b: usize, j: usize) -> f64 {
        self.probs[b * self.output.len() + j]
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        ensure_same(&self.input, &other.input, "mix inputs")?;
        ensure_same(&self.output, &other.output, "mix outputs")?;
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
            .collect();
        Self::from_iterate(self.input.clone(), self.output.clone(), probs, self.support.clone())
    }
}

/// Per-pair distortion `d(b, b̂)`; forbidden pairs are excluded structurally.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMatrix {
    input: Arc<Alphabet>,
    output: Arc<Alphabet>,
    cost: Vec<f64>,
    support: SupportMask,
    d_max: f64,
}

impl DistortionMatrix {
    /// `None` entries are forbidden.
    pub fn new(input: Arc<Alphabet>, output: Arc<Alphabet>, entries: Vec<Option<f64>>) -> Result<Self> {
        let (n_in, n_out) = (input.len(), output.len());
        check_shape(entries.len(), n_in, n_out)?;
        let mut cost = Vec::with_capacity(entries.len());
        let mut allowed = Vec::with_capacity(entries.len());
        let mut d_max: f64 = 0.0;
        for e in &entries {
            match *e {
                Some(c) if c.is_finite() && c >= 0.0 => {
                    cost.push(c);
                    allowed.push(true);
                    d_max = d_max.max(c);
                }
                Some(c) => {
                    return Err(Error::InvalidArgument(format!(
                        "distortion must be finite and nonnegative, got {c}"
                    )))
                }
                None => {
                    cost.push(0.0);
                    allowed.push(false);
                }
            }
        }
        for b in 0..n_in {
            if !allowed[b * n_out..(b + 1) * n_out].iter().any(|&x| x) {
                return Err(Error::InvalidArgument(format!(
                    "row {:?} has no allowed output",
                    input.label(b)
                )));
            }
        }
        let support = SupportMask::new(n_in, n_out, allowed)?;
        Ok(Self { input, output, cost, support, d_max })
    }

    pub fn from_fn<F>(input: Arc<Alphabet>, output: Arc<Alphabet>, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Option<f64>,
    {
        let n_out = output.len();
        let entries = (0..input.len() * n_out).map(|k| f(k / n_out, k % n_out)).collect();
        Self::new(input, output, entries)
    }

    /// 0 on the diagonal, 1 elsewhere, over a single alphabet.
    pub fn hamming(alphabet: Arc<Alphabet>) -> Self {
        Self::from_fn(alphabet.clone(), alphabet, |i, j| Some(if i == j { 0.0 } else { 1.0 }))
            .expect("hamming matrix is always valid")
    }

    pub fn input(&self) -> &Arc<Alphabet> {
        &self.input
    }

    pub fn output(&self) -> &Arc<Alphabet> {
        &self.output
    }

    pub fn cost(&self, b: usize, j: usize) -> Option<f64> {
        let k = b * self.output.len() + j;
        self.support.allowed[k].then(|| self.cost[k])
    }

    /// Raw costs; forbidden entries hold 0 and must be masked by `support`.
    pub(crate) fn raw_costs(&self) -> &[f64] {
        &self.cost
    }

    pub fn support(&self) -> &SupportMask {
        &self.support
    }

    /// True when some pair is forbidden.
    pub fn has_forbidden(&self) -> bool {
        self.support.allowed.iter().any(|&x| !x)
    }

    /// The mask to attach to mappings, `None` when every pair is allowed.
    pub fn mapping_support(&self) -> Option<SupportMask> {
        self.has_forbidden().then(|| self.support.clone())
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }
}

fn log2_ratio(num: f64, den: f64) -> f64 {
    (num / den).log2()
}

/// Shannon entropy in bits.
pub fn entropy(p: &[f64]) -> Result<f64> {
    check_probabilities(p, INGESTION_TOL, "entropy argument")?;
    Ok(entropy_unchecked(p))
}

pub(crate) fn entropy_unchecked(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    h.max(0.0)
}

/// `I(A;B)` in bits by the direct double sum.
pub fn mutual_information(p: &JointDistribution) -> f64 {
    let pa = p.row_marginal();
    let pb = p.col_marginal();
    let mut total = 0.0;
    for (a, &wa) in pa.iter().enumerate() {
        for (b, &m) in p.row(a).iter().enumerate() {
            if m > 0.0 {
                total += m * log2_ratio(m, wa * pb[b]);
            }
        }
    }
    total.max(0.0)
}

/// `H(A) + H(B) - H(A,B)`; an independent route to the mutual information.
pub fn mutual_information_by_entropies(p: &JointDistribution) -> f64 {
    entropy_unchecked(&p.row_marginal()) + entropy_unchecked(&p.col_marginal())
        - entropy_unchecked(p.mass())
}

/// Output joint `p(a, b̂) = Σ_b p(b̂|b) p(a,b)` of the chain `A → B → B̂`.
pub fn compose_output_joint(prior: &JointDistribution, map: &ConditionalMapping) -> Result<JointDistribution> {
    ensure_same(prior.cols(), map.input(), "prior columns vs mapping input")?;
    let n_out = map.output().len();
    let mut mass = vec![0.0; prior.n_rows() * n_out];
    for a in 0..prior.n_rows() {
        let out = &mut mass[a * n_out..(a + 1) * n_out];
        for (b, &pab) in prior.row(a).iter().enumerate() {
            if pab == 0.0 {
                continue;
            }
            for (o, &q) in out.iter_mut().zip(map.row(b)) {
                *o += pab * q;
            }
        }
    }
    JointDistribution::new(prior.rows().clone(), map.output().clone(), mass)
}

/// Leakage `I(A;B̂)` of releasing `map(B)`, evaluated as the triple sum
/// `Σ p(a,b) p(b̂|b) log[p(b̂|a) / p(b̂)]`.
pub fn leakage(prior: &JointDistribution, map: &ConditionalMapping) -> Result<f64> {
    ensure_same(prior.cols(), map.input(), "prior columns vs mapping input")?;
    let n_out = map.output().len();
    let pa = prior.row_marginal();
    let pb = prior.col_marginal();

    let mut out_marginal = vec![0.0; n_out];
    for (b, &w) in pb.iter().enumerate() {
        for (o, &q) in out_marginal.iter_mut().zip(map.row(b)) {
            *o += w * q;
        }
    }

    let mut total = 0.0;
    let mut cond = vec![0.0; n_out];
    for a in 0..prior.n_rows() {
        if pa[a] == 0.0 {
            continue;
        }
        cond.iter_mut().for_each(|c| *c = 0.0);
        for (b, &pab) in prior.row(a).iter().enumerate() {
            for (c, &q) in cond.iter_mut().zip(map.row(b)) {
                *c += q * pab / pa[a];
            }
        }
        for (b, &pab) in prior.row(a).iter().enumerate() {
            if pab == 0.0 {
                continue;
            }
            for (j, &q) in map.row(b).iter().enumerate() {
                if q > 0.0 {
                    total += pab * q * log2_ratio(cond[j], out_marginal[j]);
                }
            }
        }
    }
    Ok(total.max(0.0))
}

/// `E[d(B, B̂)] = Σ p_B(b) p(b̂|b) d(b,b̂)`.
pub fn expected_distortion(
    prior: &JointDistribution,
    map: &ConditionalMapping,
    d: &DistortionMatrix,
) -> Result<f64> {
    ensure_same(prior.cols(), map.input(), "prior columns vs mapping input")?;
    ensure_same(d.input(), map.input(), "distortion input vs mapping input")?;
    ensure_same(d.output(), map.output(), "distortion output vs mapping output")?;
    let pb = prior.col_marginal();
    let mut total = 0.0;
    for (b, &w) in pb.iter().enumerate() {
        for (j, &q) in map.row(b).iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            match d.cost(b, j) {
                Some(c) => total += w * q * c,
                None => {
                    return Err(Error::InfeasibleMapping {
                        input: map.input().label(b).to_string(),
                        output: map.output().label(j).to_string(),
                        mass: q,
                    })
                }
            }
        }
    }
    Ok(total)
}

/// Entrywise `‖p − q‖₁` over identical alphabets.
pub fn l1_distance(p: &JointDistribution, q: &JointDistribution) -> Result<f64> {
    ensure_same(p.rows(), q.rows(), "row alphabets")?;
    ensure_same(p.cols(), q.cols(), "column alphabets")?;
    Ok(p.mass().iter().zip(q.mass()).map(|(x, y)| (x - y).abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn alpha(n: usize, p: &str) -> Arc<Alphabet> {
        Arc::new(Alphabet::indexed(p, n).unwrap())
    }

    fn joint(rows: usize, cols: usize, mass: &[f64]) -> JointDistribution {
        JointDistribution::new(alpha(rows, "a"), alpha(cols, "b"), mass.to_vec()).unwrap()
    }

    #[test]
    fn alphabet_rejects_duplicates() {
        assert_eq!(
            Alphabet::new(["x", "y", "x"]).unwrap_err(),
            Error::DuplicateLabel("x".into())
        );
        let a = Alphabet::new(["x", "y"]).unwrap();
        assert_eq!(a.index_of("y"), Some(1));
        assert_eq!(a.require("z").unwrap_err(), Error::UnknownLabel("z".into()));
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&[0.25; 4]).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entropy(&[0.0, 1.0, 0.0]).unwrap(), 0.0, epsilon = 1e-12);
        // -(0.25 log2 0.25 + 0.75 log2 0.75)
        assert_abs_diff_eq!(entropy(&[0.25, 0.75]).unwrap(), 0.811278, epsilon = 1e-6);
    }

    #[test]
    fn entropy_rejects_invalid() {
        assert!(matches!(entropy(&[-0.1, 1.1]), Err(Error::InvalidDistribution(_))));
        assert!(matches!(entropy(&[0.5, 0.49]), Err(Error::InvalidDistribution(_))));
        // Ingestion tolerance admits small drift.
        assert!(entropy(&[0.5, 0.5 + 5e-7]).is_ok());
    }

    #[test]
    fn joint_rejects_bad_mass() {
        assert!(JointDistribution::new(alpha(1, "a"), alpha(2, "b"), vec![0.5, 0.6]).is_err());
        assert!(JointDistribution::new(alpha(1, "a"), alpha(2, "b"), vec![1.5, -0.5]).is_err());
        assert!(JointDistribution::new(alpha(1, "a"), alpha(2, "b"), vec![1.0]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        assert_abs_diff_eq!(mutual_information(&joint(2, 2, &[0.5, 0.0, 0.0, 0.5])), 1.0, epsilon = 1e-12);
        let prod = JointDistribution::product(alpha(2, "a"), alpha(3, "b"), &[0.3, 0.7], &[0.2, 0.5, 0.3]).unwrap();
        assert_abs_diff_eq!(mutual_information(&prod), 0.0, epsilon = 1e-12);
        // 2 * 0.4 log2(1.6) + 2 * 0.1 log2(0.4)
        let p = joint(2, 2, &[0.4, 0.1, 0.1, 0.4]);
        assert_abs_diff_eq!(mutual_information(&p), 0.278072, epsilon = 1e-6);
        assert_abs_diff_eq!(mutual_information(&p), mutual_information_by_entropies(&p), epsilon = 1e-12);
    }

    #[test]
    fn compose_examples() {
        let p = joint(2, 2, &[0.4, 0.1, 0.1, 0.4]);
        let id = ConditionalMapping::identity(p.cols().clone());
        assert_eq!(compose_output_joint(&p, &id).unwrap().mass(), p.mass());

        let c = ConditionalMapping::constant(p.cols().clone(), p.cols().clone(), 1).unwrap();
        let out = compose_output_joint(&p, &c).unwrap();
        assert_eq!(out.mass(), &[0.0, 0.5, 0.0, 0.5]);

        let m = ConditionalMapping::new(p.cols().clone(), p.cols().clone(), vec![0.9, 0.1, 0.2, 0.8], None).unwrap();
        let out = compose_output_joint(&p, &m).unwrap();
        // [[0.4,0.1],[0.1,0.4]] x [[0.9,0.1],[0.2,0.8]]
        let expected = [0.38, 0.12, 0.17, 0.33];
        for (x, y) in out.mass().iter().zip(expected) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn compose_rejects_mismatch() {
        let p = joint(2, 2, &[0.4, 0.1, 0.1, 0.4]);
        let id = ConditionalMapping::identity(alpha(3, "z"));
        assert!(matches!(compose_output_joint(&p, &id), Err(Error::AlphabetMismatch(_))));
        assert!(leakage(&p, &id).is_err());
    }

    #[test]
    fn leakage_examples() {
        let p = joint(2, 2, &[0.4, 0.1, 0.1, 0.4]);
        let id = ConditionalMapping::identity(p.cols().clone());
        assert_abs_diff_eq!(leakage(&p, &id).unwrap(), mutual_information(&p), epsilon = 1e-12);

        let same_rows =
            ConditionalMapping::new(p.cols().clone(), p.cols().clone(), vec![0.3, 0.7, 0.3, 0.7], None).unwrap();
        assert_abs_diff_eq!(leakage(&p, &same_rows).unwrap(), 0.0, epsilon = 1e-12);

        let m = ConditionalMapping::new(p.cols().clone(), p.cols().clone(), vec![0.9, 0.1, 0.2, 0.8], None).unwrap();
        // Output joint [[0.38,0.12],[0.17,0.33]], marginals (0.5,0.5) and (0.55,0.45).
        let direct = 0.38 * (0.38f64 / (0.5 * 0.55)).log2()
            + 0.12 * (0.12f64 / (0.5 * 0.45)).log2()
            + 0.17 * (0.17f64 / (0.5 * 0.55)).log2()
            + 0.33 * (0.33f64 / (0.5 * 0.45)).log2();
        let got = leakage(&p, &m).unwrap();
        assert_abs_diff_eq!(got, direct, epsilon = 1e-12);
        assert_abs_diff_eq!(got, mutual_information(&compose_output_joint(&p, &m).unwrap()), epsilon = 1e-12);
    }

    #[test]
    fn distortion_examples() {
        let b = alpha(2, "b");
        let p = JointDistribution::new(alpha(1, "a"), b.clone(), vec![0.5, 0.5]).unwrap();
        let d = DistortionMatrix::hamming(b.clone());
        let id = ConditionalMapping::identity(b.clone());
        assert_eq!(expected_distortion(&p, &id, &d).unwrap(), 0.0);
        let m = ConditionalMapping::new(b.clone(), b.clone(), vec![0.9, 0.1, 0.2, 0.8], None).unwrap();
        assert_abs_diff_eq!(expected_distortion(&p, &m, &d).unwrap(), 0.15, epsilon = 1e-12);
        let c = ConditionalMapping::constant(b.clone(), b.clone(), 0).unwrap();
        assert_abs_diff_eq!(expected_distortion(&p, &c, &d).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn distortion_rejects_forbidden_mass() {
        let b = alpha(2, "b");
        let p = JointDistribution::new(alpha(1, "a"), b.clone(), vec![0.5, 0.5]).unwrap();
        let d = DistortionMatrix::new(b.clone(), b.clone(), vec![Some(0.0), None, Some(1.0), Some(0.0)]).unwrap();
        assert_eq!(d.d_max(), 1.0);
        let m = ConditionalMapping::new(b.clone(), b.clone(), vec![0.9, 0.1, 0.2, 0.8], None).unwrap();
        assert!(matches!(expected_distortion(&p, &m, &d), Err(Error::InfeasibleMapping { .. })));
        // The mask is enforced on construction too.
        assert!(m.clone().with_support(d.support().clone()).is_err());
    }

    #[test]
    fn distortion_requires_an_allowed_entry_per_row() {
        let b = alpha(2, "b");
        assert!(DistortionMatrix::new(b.clone(), b.clone(), vec![None, None, Some(1.0), Some(0.0)]).is_err());
        assert!(DistortionMatrix::new(b.clone(), b, vec![Some(-1.0), Some(0.0), Some(1.0), Some(0.0)]).is_err());
    }

    #[test]
    fn l1_examples() {
        let p = joint(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let q = joint(2, 2, &[0.4, 0.1, 0.1, 0.4]);
        assert_eq!(l1_distance(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(l1_distance(&p, &q).unwrap(), 0.4, epsilon = 1e-12);
        let r = joint(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let s = joint(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(l1_distance(&r, &s).unwrap(), 2.0);
        let other = JointDistribution::new(alpha(2, "x"), alpha(2, "b"), vec![0.25; 4]).unwrap();
        assert!(l1_distance(&p, &other).is_err());
    }

    #[test]
    fn reindex_reorders_labels() {
        let p = joint(2, 2, &[0.4, 0.1, 0.2, 0.3]);
        let rows = Arc::new(Alphabet::new(["a1", "a0"]).unwrap());
        let cols = Arc::new(Alphabet::new(["b1", "b0"]).unwrap());
        let q = p.reindexed(rows, cols).unwrap();
        assert_eq!(q.mass(), &[0.3, 0.2, 0.1, 0.4]);
    }
}
