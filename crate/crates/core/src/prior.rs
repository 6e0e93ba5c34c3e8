//! Estimating the joint prior from records, and the price of getting it wrong.

use std::sync::Arc;

use crate::dist::{ensure_same, l1_distance, Alphabet, DistortionMatrix, JointDistribution};
use crate::error::{Error, Result};

/// Default additive smoothing.
pub const DEFAULT_SMOOTHING: f64 = 0.5;

/// Number of bandwidths tried by cross-validation.
pub const CV_GRID_POINTS: usize = 10;

/// Records of (private label, public label).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SampleTable {
    records: Vec<(String, String)>,
}

impl SampleTable {
    pub fn new(records: Vec<(String, String)>) -> Self {
        Self { records }
    }

    pub fn push(&mut self, a: impl Into<String>, b: impl Into<String>) {
        self.records.push((a.into(), b.into()));
    }

    pub fn records(&self) -> &[(String, String)] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn counts(&self, a_alpha: &Alphabet, b_alpha: &Alphabet) -> Result<Vec<f64>> {
        let mut counts = vec![0.0; a_alpha.len() * b_alpha.len()];
        for (a, b) in &self.records {
            let i = a_alpha.require(a)?;
            let j = b_alpha.require(b)?;
            counts[i * b_alpha.len() + j] += 1.0;
        }
        Ok(counts)
    }
}

impl FromIterator<(String, String)> for SampleTable {
    fn from_iter<T: IntoIterator<Item = (String, String)>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Cell frequencies `#{a_i = a, b_i = b} / n`.
pub fn empirical_joint(samples: &SampleTable, a_alpha: Arc<Alphabet>, b_alpha: Arc<Alphabet>) -> Result<JointDistribution> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    smoothed_joint(samples, a_alpha, b_alpha, 0.0)
}

/// `(count + alpha) / (n + alpha·|A||B|)`.
pub fn smoothed_joint(
    samples: &SampleTable,
    a_alpha: Arc<Alphabet>,
    b_alpha: Arc<Alphabet>,
    alpha: f64,
) -> Result<JointDistribution> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("smoothing must be nonnegative, got {alpha}")));
    }
    let counts = samples.counts(&a_alpha, &b_alpha)?;
    let total = samples.len() as f64 + alpha * counts.len() as f64;
    if total <= 0.0 {
        return Err(Error::InvalidArgument("no samples and no smoothing".into()));
    }
    let mass = counts.iter().map(|c| (c + alpha) / total).collect();
    JointDistribution::new(a_alpha, b_alpha, mass)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bandwidth {
    /// One kernel width per class, in class-alphabet order.
    PerClass(Vec<f64>),
    Shared(f64),
    /// Per class, the grid width maximizing leave-one-out log-likelihood.
    CrossValidated,
}

/// Axis-aligned grid; cell labels are bin indices joined by `|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    edges: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(edges: Vec<Vec<f64>>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidArgument("grid has no dimensions".into()));
        }
        for (d, e) in edges.iter().enumerate() {
            if e.len() < 2 || e.windows(2).any(|w| !(w[0] < w[1])) || e.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "grid dimension {d} needs at least two strictly increasing edges"
                )));
            }
        }
        Ok(Self { edges })
    }

    /// `bins` equal-width bins per dimension spanning `[lo, hi]`.
    pub fn uniform(ranges: &[(f64, f64)], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("at least one bin per dimension".into()));
        }
        Self::new(
            ranges
                .iter()
                .map(|&(lo, hi)| (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect())
                .collect(),
        )
    }

    pub fn dims(&self) -> usize {
        self.edges.len()
    }

    pub fn n_cells(&self) -> usize {
        self.edges.iter().map(|e| e.len() - 1).product()
    }

    fn centers(&self) -> Vec<Vec<f64>> {
        self.edges
            .iter()
            .map(|e| e.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
            .collect()
    }

    /// Row-major cell index of each cell, last dimension fastest.
    fn cell_coords(&self, mut cell: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for d in (0..self.dims()).rev() {
            let n = self.edges[d].len() - 1;
            idx[d] = cell % n;
            cell /= n;
        }
        idx
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.n_cells())
            .map(|c| {
                self.cell_coords(c)
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join("|")
            })
            .collect()
    }

    fn covers(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.edges)
            .all(|(v, e)| *v >= e[0] && *v <= e[e.len() - 1])
    }
}

fn log_kernel(x: &[f64], y: &[f64], h: f64) -> f64 {
    let d = x.len() as f64;
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    -0.5 * sq / (h * h) - d * (h.ln() + 0.5 * (2.0 * std::f64::consts::PI).ln())
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Leave-one-out log-likelihood of `points` under a Gaussian product kernel.
pub fn loo_log_likelihood(points: &[&[f64]], h: f64) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            log_sum_exp((0..n).filter(|&j| j != i).map(|j| log_kernel(points[i], points[j], h)))
                - ((n - 1) as f64).ln()
        })
        .sum()
}

/// Mean per-dimension standard deviation.
fn spread(points: &[&[f64]]) -> f64 {
    let dims = points[0].len();
    let n = points.len() as f64;
    (0..dims)
        .map(|d| {
            let mean = points.iter().map(|p| p[d]).sum::<f64>() / n;
            (points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .sum::<f64>()
        / dims as f64
}

/// Candidate widths `σ·10^t` for `t` evenly spaced over `[-1.5, 0.5]`.
pub fn bandwidth_grid(sigma: f64) -> Vec<f64> {
    (0..CV_GRID_POINTS)
        .map(|i| sigma * 10f64.powf(-1.5 + 2.0 * i as f64 / (CV_GRID_POINTS - 1) as f64))
        .collect()
}

/// Width from [`bandwidth_grid`] with the best leave-one-out likelihood;
/// ties go to the smaller width.
pub fn cross_validated_bandwidth(points: &[&[f64]]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least two points".into()));
    }
    let sigma = spread(points);
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument("points are identical; bandwidth cannot be fitted".into()));
    }
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for h in bandwidth_grid(sigma) {
        let ll = loo_log_likelihood(points, h);
        if ll > best.0 {
            best = (ll, h);
        }
    }
    Ok(best.1)
}

/// Joint over (class, grid cell) from per-class kernel density estimates.
///
/// Each class density is evaluated at the cell centers, normalized over the
/// cells, and weighted by the class frequency.
pub fn kde_discretize(
    points: &[(String, Vec<f64>)],
    classes: Arc<Alphabet>,
    grid: &Grid,
    bandwidth: &Bandwidth,
) -> Result<JointDistribution> {
    let mut by_class: Vec<Vec<&[f64]>> = vec![Vec::new(); classes.len()];
    for (label, x) in points {
        if x.len() != grid.dims() {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, grid has {}",
                x.len(),
                grid.dims()
            )));
        }
        if !grid.covers(x) {
            return Err(Error::InvalidArgument(format!("point {x:?} lies outside the grid")));
        }
        by_class[classes.require(label)?].push(x);
    }
    for (c, pts) in by_class.iter().enumerate() {
        if pts.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "class {:?} has {} points; at least two are needed",
                classes.label(c),
                pts.len()
            )));
        }
    }
    let widths: Vec<f64> = match bandwidth {
        Bandwidth::PerClass(w) => {
            if w.len() != classes.len() {
                return Err(Error::InvalidArgument("one bandwidth per class is required".into()));
            }
            w.clone()
        }
        Bandwidth::Shared(h) => vec![*h; classes.len()],
        Bandwidth::CrossValidated => by_class
            .iter()
            .map(|pts| cross_validated_bandwidth(pts))
            .collect::<Result<_>>()?,
    };
    if widths.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(Error::InvalidArgument("bandwidths must be positive".into()));
    }

    let centers = grid.centers();
    let n_cells = grid.n_cells();
    let total = points.len() as f64;
    let mut mass = vec![0.0; classes.len() * n_cells];
    for (c, pts) in by_class.iter().enumerate() {
        let logs: Vec<f64> = (0..n_cells)
            .map(|cell| {
                let coords = grid.cell_coords(cell);
                let x: Vec<f64> = coords.iter().enumerate().map(|(d, &i)| centers[d][i]).collect();
                log_sum_exp(pts.iter().map(|p| log_kernel(&x, p, widths[c])))
            })
            .collect();
        // Normalize in log space so wide grids do not underflow.
        let norm = log_sum_exp(logs.iter().copied());
        if !norm.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "class {:?} has no density on the grid",
                classes.label(c)
            )));
        }
        let weight = pts.len() as f64 / total;
        for (cell, l) in logs.iter().enumerate() {
            mass[c * n_cells + cell] = weight * (l - norm).exp();
        }
    }
    let cells = Arc::new(Alphabet::new(grid.labels())?);
    JointDistribution::from_weights(classes, cells, mass)
}

/// `‖p − q‖₁ · log2(|X| / ‖p − q‖₁)`, an upper bound on `|H(p) − H(q)|`
/// valid when `‖p − q‖₁ ≤ 1/2`.
pub fn entropy_l1_bound(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::InvalidArgument("distributions must have the same nonempty support".into()));
    }
    let l1: f64 = p.iter().zip(q).map(|(x, y)| (x - y).abs()).sum();
    if l1 > 0.5 {
        return Err(Error::L1Precondition { l1 });
    }
    Ok(x_log_ratio(l1, p.len() as f64))
}

/// `x·log2(c/x)`, continuous at 0.
fn x_log_ratio(x: f64, c: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * (c / x).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchReport {
    pub l1: f64,
    /// Bound on `|J(p, m) − J(q, m)|` in bits.
    pub leakage_bound: f64,
    /// `d_max · l1`.
    pub distortion_slack: f64,
    /// Budget plus slack: the distortion guaranteed under the true prior.
    pub distortion_bound: f64,
    /// Whether `l1 ≤ 1/2`, below which the leakage bound is proven.
    pub valid: bool,
}

/// Consequences of designing a mapping on `q` when the data follow `p`.
///
/// For every mapping `m`, `|J(p, m) − J(q, m)| ≤ 3·l1·log2(|A||B|/l1)` and
/// `E_p[d] ≤ E_q[d] + d_max·l1`.
pub fn mismatch_bounds(p: &JointDistribution, q: &JointDistribution, d: &DistortionMatrix, delta: f64) -> Result<MismatchReport> {
    let l1 = l1_distance(p, q)?;
    ensure_same(p.cols(), d.input(), "prior columns vs distortion input")?;
    let size = (p.n_rows() * p.n_cols()) as f64;
    let leakage_bound = 3.0 * x_log_ratio(l1, size);
    debug_assert!(l1 == 0.0 || (size / l1).log2() >= 0.0, "log factor must be nonnegative");
    let distortion_slack = d.d_max() * l1;
    Ok(MismatchReport {
        l1,
        leakage_bound,
        distortion_slack,
        distortion_bound: delta + distortion_slack,
        valid: l1 <= 0.5,
    })
}

/// `log2` of [`sample_complexity_bound`].
pub fn sample_complexity_log2(n: u64, a_size: usize, b_size: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be nonnegative, got {eps}")));
    }
    let cells = (a_size * b_size) as f64;
    Ok(cells * ((n + 1) as f64).log2() - 2.0 * n as f64 * eps * eps)
}

/// `(n+1)^{|A||B|} · 2^{−2nε²}`: bounds the probability that the empirical
/// joint from `n` samples lies at least `eps` from the truth in `l1`.
/// Values above 1 are vacuous and returned as-is.
pub fn sample_complexity_bound(n: u64, a_size: usize, b_size: usize, eps: f64) -> Result<f64> {
    Ok(sample_complexity_log2(n, a_size, b_size, eps)?.exp2())
}

/// Whether the bound is decreasing in `n` at `n`.
pub fn sample_complexity_decreasing(n: u64, a_size: usize, b_size: usize, eps: f64) -> bool {
    let cells = (a_size * b_size) as f64;
    cells / ((n as f64 + 1.0) * std::f64::consts::LN_2) - 2.0 * eps * eps < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{entropy, mutual_information};
    use approx::assert_abs_diff_eq;

    fn ab(na: usize, nb: usize) -> (Arc<Alphabet>, Arc<Alphabet>) {
        (Arc::new(Alphabet::indexed("a", na).unwrap()), Arc::new(Alphabet::indexed("b", nb).unwrap()))
    }

    fn table(rows: &[(&str, &str)]) -> SampleTable {
        rows.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn empirical_examples() {
        let (a, b) = ab(2, 2);
        let s = table(&[("a0", "b0"), ("a0", "b1"), ("a1", "b0"), ("a1", "b1")]);
        assert_eq!(empirical_joint(&s, a.clone(), b.clone()).unwrap().mass(), &[0.25; 4]);
        let s = table(&[("a1", "b0"); 3]);
        assert_eq!(empirical_joint(&s, a.clone(), b.clone()).unwrap().mass(), &[0.0, 0.0, 1.0, 0.0]);
        let s = table(&[("a1", "zz")]);
        assert_eq!(empirical_joint(&s, a.clone(), b.clone()).unwrap_err(), Error::UnknownLabel("zz".into()));
        assert!(empirical_joint(&SampleTable::default(), a, b).is_err());
    }

    #[test]
    fn smoothing_examples() {
        let (a, b) = ab(2, 2);
        let s = table(&[("a0", "b0"), ("a0", "b0"), ("a0", "b0"), ("a0", "b1")]);
        let q = smoothed_joint(&s, a.clone(), b.clone(), 1.0).unwrap();
        for (x, y) in q.mass().iter().zip([4.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
        assert_eq!(
            smoothed_joint(&s, a.clone(), b.clone(), 0.0).unwrap(),
            empirical_joint(&s, a.clone(), b.clone()).unwrap()
        );
        let u = smoothed_joint(&SampleTable::default(), a.clone(), b.clone(), 1.0).unwrap();
        assert_eq!(u.mass(), &[0.25; 4]);
        assert!(smoothed_joint(&s, a, b, -0.1).is_err());
    }

    fn two_clusters() -> Vec<(String, Vec<f64>)> {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(("lo".to_string(), vec![0.1 + 0.02 * i as f64]));
            pts.push(("hi".to_string(), vec![0.7 + 0.02 * i as f64]));
        }
        pts
    }

    #[test]
    fn kde_single_cell_is_class_marginal() {
        let classes = Arc::new(Alphabet::new(["lo", "hi"]).unwrap());
        let mut pts = two_clusters();
        pts.push(("lo".to_string(), vec![0.5]));
        let grid = Grid::new(vec![vec![0.0, 1.0]]).unwrap();
        let j = kde_discretize(&pts, classes, &grid, &Bandwidth::Shared(0.1)).unwrap();
        assert_abs_diff_eq!(j.mass()[0], 11.0 / 21.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.mass()[1], 10.0 / 21.0, epsilon = 1e-12);
    }

    #[test]
    fn kde_separated_classes_are_nearly_diagonal() {
        let classes = Arc::new(Alphabet::new(["lo", "hi"]).unwrap());
        let grid = Grid::new(vec![vec![0.0, 0.5, 1.0]]).unwrap();
        let j = kde_discretize(&two_clusters(), classes, &grid, &Bandwidth::Shared(0.05)).unwrap();
        assert!(j.get(0, 0) > 0.499 && j.get(1, 1) > 0.499);
        assert_abs_diff_eq!(mutual_information(&j), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn kde_wide_kernels_erase_class_information() {
        let classes = Arc::new(Alphabet::new(["lo", "hi"]).unwrap());
        let grid = Grid::uniform(&[(0.0, 1.0)], 5).unwrap();
        let mut prev = f64::INFINITY;
        for h in [0.05, 0.2, 1.0, 10.0, 1000.0] {
            let j = kde_discretize(&two_clusters(), classes.clone(), &grid, &Bandwidth::Shared(h)).unwrap();
            let mi = mutual_information(&j);
            assert!(mi < prev);
            prev = mi;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn kde_rejects_bad_inputs() {
        let classes = Arc::new(Alphabet::new(["lo", "hi"]).unwrap());
        let grid = Grid::uniform(&[(0.0, 1.0)], 4).unwrap();
        let one = vec![("lo".to_string(), vec![0.1]), ("lo".to_string(), vec![0.2]), ("hi".to_string(), vec![0.3])];
        assert!(kde_discretize(&one, classes.clone(), &grid, &Bandwidth::Shared(0.1)).is_err());
        let outside = vec![("lo".to_string(), vec![1.5])];
        assert!(kde_discretize(&outside, classes.clone(), &grid, &Bandwidth::Shared(0.1)).is_err());
        assert!(Grid::new(vec![vec![0.0, 0.0]]).is_err());
        assert!(Grid::new(vec![vec![0.0]]).is_err());
        assert!(kde_discretize(&two_clusters(), classes, &grid, &Bandwidth::PerClass(vec![0.1])).is_err());
    }

    #[test]
    fn cross_validation_picks_from_the_grid() {
        let classes = Arc::new(Alphabet::new(["lo", "hi"]).unwrap());
        let pts = two_clusters();
        let lo: Vec<&[f64]> = pts.iter().filter(|p| p.0 == "lo").map(|p| p.1.as_slice()).collect();
        let h = cross_validated_bandwidth(&lo).unwrap();
        let sigma = spread(&lo);
        assert!(bandwidth_grid(sigma).contains(&h));
        for other in bandwidth_grid(sigma) {
            assert!(loo_log_likelihood(&lo, h) >= loo_log_likelihood(&lo, other));
        }
        let grid = Grid::uniform(&[(0.0, 1.0)], 4).unwrap();
        assert!(kde_discretize(&pts, classes, &grid, &Bandwidth::CrossValidated).is_ok());
    }

    #[test]
    fn grid_labels_are_row_major() {
        let g = Grid::new(vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(g.n_cells(), 6);
        assert_eq!(g.labels()[..4], ["0|0", "0|1", "0|2", "1|0"]);
    }

    #[test]
    fn entropy_bound_examples() {
        assert_eq!(entropy_l1_bound(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        let p = [0.25, 0.25, 0.25, 0.25];
        let q = [0.3, 0.2, 0.25, 0.25];
        // 0.1 · log2(4 / 0.1)
        assert_abs_diff_eq!(entropy_l1_bound(&p, &q).unwrap(), 0.532193, epsilon = 1e-6);
        assert!(entropy_l1_bound(&p, &q).unwrap() >= (entropy(&p).unwrap() - entropy(&q).unwrap()).abs());
        assert!(matches!(
            entropy_l1_bound(&[1.0, 0.0], &[0.0, 1.0]),
            Err(Error::L1Precondition { l1 }) if l1 == 2.0
        ));
    }

    #[test]
    fn mismatch_examples() {
        let (a, b) = ab(2, 2);
        let p = JointDistribution::new(a.clone(), b.clone(), vec![0.25; 4]).unwrap();
        let q = JointDistribution::new(a.clone(), b.clone(), vec![0.3, 0.2, 0.25, 0.25]).unwrap();
        let d = DistortionMatrix::hamming(b.clone());
        let same = mismatch_bounds(&p, &p, &d, 0.3).unwrap();
        assert_eq!((same.leakage_bound, same.distortion_slack), (0.0, 0.0));
        let r = mismatch_bounds(&p, &q, &d, 0.3).unwrap();
        assert_abs_diff_eq!(r.l1, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(r.leakage_bound, 1.596578, epsilon = 1e-6);
        assert_abs_diff_eq!(r.distortion_slack, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(r.distortion_bound, 0.4, epsilon = 1e-12);
        assert!(r.valid);
        let far = JointDistribution::new(a, b, vec![0.55, 0.05, 0.2, 0.2]).unwrap();
        let r = mismatch_bounds(&p, &far, &d, 0.3).unwrap();
        assert!(!r.valid && r.leakage_bound > 0.0);
    }

    #[test]
    fn sample_complexity_examples() {
        assert!(sample_complexity_bound(100, 2, 2, 0.0).unwrap() >= 1.0);
        let v = sample_complexity_bound(10_000, 2, 2, 0.1).unwrap();
        // 2^(4·log2(10001) − 200)
        assert_abs_diff_eq!(v / 6.225504857e-45, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(v / 6.3e-45, 1.0, epsilon = 0.02);
        assert!(sample_complexity_bound(0, 2, 2, 0.1).is_err());
        assert!(sample_complexity_bound(10, 2, 2, -0.1).is_err());
        assert!(sample_complexity_decreasing(10_000, 2, 2, 0.1));
        assert!(!sample_complexity_decreasing(10, 2, 2, 0.1));
    }
}
