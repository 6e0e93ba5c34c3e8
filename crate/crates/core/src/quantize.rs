//! Shrinking a large public alphabet by clustering before solving.
//!
//! Symbols are grouped around `k` centers, the prior is aggregated onto the
//! centers, the program is solved there, and each symbol then uses its
//! center's row. The leakage of the lifted mapping equals the leakage solved
//! on the centers exactly. The expected distortion grows by at most the
//! quantization radius when the distortion obeys the triangle inequality.

use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::{ensure_same, leakage, Alphabet, ConditionalMapping, DistortionMatrix, JointDistribution, SupportMask};
use crate::error::{Error, Result};
use crate::solver::{solve_privacy_mapping, SolveResult, SolverOptions, DISTORTION_SLACK};

pub const RESTARTS: u64 = 10;
pub const LLOYD_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Number of differing coordinates.
    Hamming,
    /// Euclidean distance.
    L2,
}

impl Metric {
    pub fn distance(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Metric::Hamming => x.iter().zip(y).filter(|(a, b)| a != b).count() as f64,
            Metric::L2 => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    metric: Metric,
    input: Arc<Alphabet>,
    points: Vec<Vec<f64>>,
    centers: Arc<Alphabet>,
    center_points: Vec<Vec<f64>>,
    assignment: Vec<usize>,
    distances: Vec<f64>,
    radius: f64,
}

impl Quantizer {
    /// Builds the quantizer for fixed centers: each symbol goes to its
    /// nearest center, ties to the lowest index.
    pub fn from_centers(
        input: Arc<Alphabet>,
        points: Vec<Vec<f64>>,
        centers: Arc<Alphabet>,
        center_points: Vec<Vec<f64>>,
        metric: Metric,
    ) -> Result<Self> {
        if points.len() != input.len() || center_points.len() != centers.len() || centers.is_empty() {
            return Err(Error::InvalidArgument("one vector per symbol and per center is required".into()));
        }
        let dims = points.first().map_or(0, Vec::len);
        if points.iter().chain(&center_points).any(|p| p.len() != dims) {
            return Err(Error::InvalidArgument("all vectors must have the same dimension".into()));
        }
        let (assignment, distances) = assign(&points, &center_points, metric);
        let radius = distances.iter().copied().fold(0.0, f64::max);
        Ok(Self { metric, input, points, centers, center_points, assignment, distances, radius })
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn input(&self) -> &Arc<Alphabet> {
        &self.input
    }

    pub fn centers(&self) -> &Arc<Alphabet> {
        &self.centers
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn center_points(&self) -> &[Vec<f64>] {
        &self.center_points
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Center index of every input symbol.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Distance from every input symbol to its center.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Metric distances between centers, as the distortion on (C, C).
    pub fn center_distortion(&self) -> Result<DistortionMatrix> {
        let cp = &self.center_points;
        DistortionMatrix::from_fn(self.centers.clone(), self.centers.clone(), |i, j| {
            Some(self.metric.distance(&cp[i], &cp[j]))
        })
    }

    /// Metric distances from every input symbol to every center.
    pub fn lifted_distortion(&self) -> Result<DistortionMatrix> {
        DistortionMatrix::from_fn(self.input.clone(), self.centers.clone(), |b, j| {
            Some(self.metric.distance(&self.points[b], &self.center_points[j]))
        })
    }
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>], metric: Metric) -> (Vec<usize>, Vec<f64>) {
    points
        .iter()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (i, c) in centers.iter().enumerate() {
                let d = metric.distance(p, c);
                if d < best.1 {
                    best = (i, d);
                }
            }
            best
        })
        .unzip()
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Weighted k-means++ seeding.
fn seed_centers(points: &[Vec<f64>], weights: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.len();
    let uniform = weights.iter().all(|w| *w <= 0.0);
    let first = if uniform {
        rng.gen_range(0..n)
    } else {
        WeightedIndex::new(weights).expect("positive weights").sample(rng)
    };
    let mut chosen = vec![first];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while chosen.len() < k {
        let score: Vec<f64> = d2
            .iter()
            .zip(weights)
            .map(|(d, w)| d * if uniform { 1.0 } else { *w })
            .collect();
        let next = match WeightedIndex::new(&score) {
            Ok(dist) => dist.sample(rng),
            // Every remaining point coincides with a center.
            Err(_) => (0..n).find(|i| !chosen.contains(i)).expect("k <= n"),
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    chosen
}

fn lloyd(points: &[Vec<f64>], weights: &[f64], k: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, f64) {
    let dims = points[0].len();
    let mut centers: Vec<Vec<f64>> = seed_centers(points, weights, k, rng)
        .into_iter()
        .map(|i| points[i].clone())
        .collect();
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..LLOYD_ITERS {
        let (next, dist) = assign(points, &centers, Metric::L2);
        let mut sums = vec![vec![0.0; dims]; k];
        let mut mass = vec![0.0; k];
        let mut members = vec![0usize; k];
        for (i, &c) in next.iter().enumerate() {
            // Zero-weight points still pull their center if nothing else does.
            let w = weights[i].max(1e-300);
            mass[c] += w;
            members[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(&points[i]) {
                *s += w * x;
            }
        }
        let mut repaired = false;
        for c in 0..k {
            if members[c] == 0 {
                if !repaired {
                    let far = (0..points.len())
                        .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                        .expect("nonempty");
                    centers[c] = points[far].clone();
                    repaired = true;
                }
            } else {
                centers[c] = sums[c].iter().map(|s| s / mass[c]).collect();
            }
        }
        if next == assignment && !repaired {
            break;
        }
        assignment = next;
    }
    let (assignment, _) = assign(points, &centers, Metric::L2);
    let cost = assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| weights[i] * sq_dist(&points[i], &centers[c]))
        .sum();
    (centers, cost)
}

/// Farthest-first traversal; returns chosen point indices.
fn gonzalez(points: &[Vec<f64>], weights: &[f64], k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = points.len();
    let first = if weights.iter().all(|w| *w <= 0.0) {
        rng.gen_range(0..n)
    } else {
        WeightedIndex::new(weights).expect("positive weights").sample(rng)
    };
    let mut chosen = vec![first];
    let mut dist: Vec<f64> = points.iter().map(|p| Metric::Hamming.distance(p, &points[first])).collect();
    while chosen.len() < k {
        let next = (0..n)
            .filter(|i| !chosen.contains(i))
            .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
            .expect("k <= n");
        chosen.push(next);
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(Metric::Hamming.distance(p, &points[next]));
        }
    }
    let radius = dist.iter().copied().fold(0.0, f64::max);
    (chosen, radius)
}

/// Clusters the symbols of `input`, whose vectors are `points` and
/// probabilities `weights`, into `k` centers.
///
/// L2 uses weighted k-means (k-means++ seeding, Lloyd iterations) with
/// centroids as centers, labelled `c0`, `c1`, .... Hamming uses greedy
/// farthest-first k-center, so centers are input symbols and keep their
/// labels. The best of [`RESTARTS`] runs wins (lowest weighted squared error
/// for L2, smallest radius for Hamming), ties to the earliest run.
pub fn cluster(
    input: Arc<Alphabet>,
    points: Vec<Vec<f64>>,
    weights: &[f64],
    k: usize,
    metric: Metric,
    seed: u64,
) -> Result<Quantizer> {
    let n = input.len();
    if points.len() != n || weights.len() != n {
        return Err(Error::InvalidArgument("one vector and one weight per symbol are required".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k must be in 1..={n}, got {k}")));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument("weights must be nonnegative".into()));
    }
    let runs: Vec<(Vec<Vec<f64>>, Vec<usize>, f64)> = (0..RESTARTS)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            match metric {
                Metric::L2 => {
                    let (c, cost) = lloyd(&points, weights, k, &mut rng);
                    (c, Vec::new(), cost)
                }
                Metric::Hamming => {
                    let (idx, radius) = gonzalez(&points, weights, k, &mut rng);
                    (idx.iter().map(|&i| points[i].clone()).collect(), idx, radius)
                }
            }
        })
        .collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.2.total_cmp(&b.2).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("at least one restart");
    let (center_points, chosen, _) = best;
    let centers = match metric {
        Metric::L2 => Alphabet::indexed("c", k)?,
        Metric::Hamming => Alphabet::new(chosen.iter().map(|&i| input.label(i).to_string()))?,
    };
    Quantizer::from_centers(input, points, Arc::new(centers), center_points, metric)
}

/// `q(a, c) = Σ_{b → c} p(a, b)`.
pub fn quantized_prior(prior: &JointDistribution, quant: &Quantizer) -> Result<JointDistribution> {
    ensure_same(prior.cols(), quant.input(), "prior columns vs quantizer input")?;
    let k = quant.k();
    let mut mass = vec![0.0; prior.n_rows() * k];
    for a in 0..prior.n_rows() {
        for (b, &p) in prior.row(a).iter().enumerate() {
            mass[a * k + quant.assignment[b]] += p;
        }
    }
    JointDistribution::new(prior.rows().clone(), quant.centers().clone(), mass)
}

/// Each symbol uses the row of its center.
pub fn lift_mapping(q_map: &ConditionalMapping, quant: &Quantizer) -> Result<ConditionalMapping> {
    ensure_same(q_map.input(), quant.centers(), "mapping input vs quantizer centers")?;
    let n_out = q_map.output().len();
    let mut probs = Vec::with_capacity(quant.input().len() * n_out);
    for &c in &quant.assignment {
        probs.extend_from_slice(q_map.row(c));
    }
    let support = match q_map.support() {
        Some(mask) => {
            let allowed = quant.assignment.iter().flat_map(|&c| mask.row(c).to_vec()).collect();
            Some(SupportMask::new(quant.input().len(), n_out, allowed)?)
        }
        None => None,
    };
    ConditionalMapping::new(quant.input().clone(), q_map.output().clone(), probs, support)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedSolve {
    /// Solution on the centers.
    pub result: SolveResult,
    /// The same mapping applied to every input symbol.
    pub lifted: ConditionalMapping,
    /// Leakage of the lifted mapping under the original prior.
    pub lifted_leakage: f64,
    /// `E_p[d(B, Ĉ)]` under the quantizer's metric.
    pub end_to_end_distortion: f64,
    /// Whether the end-to-end distortion is within `Δ + r`.
    pub within_bound: bool,
}

/// Solves on the centers with distortion `d_c` over (C, Ĉ = C) and lifts the
/// result back to the input alphabet.
pub fn solve_quantized(
    prior: &JointDistribution,
    quant: &Quantizer,
    d_c: &DistortionMatrix,
    delta: f64,
    opts: &SolverOptions,
) -> Result<QuantizedSolve> {
    ensure_same(d_c.input(), quant.centers(), "distortion input vs quantizer centers")?;
    ensure_same(d_c.output(), quant.centers(), "distortion output vs quantizer centers")?;
    let q = quantized_prior(prior, quant)?;
    let result = solve_privacy_mapping(&q, d_c, delta, opts)?;
    let lifted = lift_mapping(&result.mapping, quant)?;
    let lifted_leakage = leakage(prior, &lifted)?;
    let pb = prior.col_marginal();
    let mut end_to_end_distortion = 0.0;
    for (b, p) in pb.iter().enumerate() {
        for (j, m) in lifted.row(b).iter().enumerate() {
            if *m > 0.0 {
                end_to_end_distortion += p * m * quant.metric.distance(&quant.points[b], &quant.center_points[j]);
            }
        }
    }
    let within_bound = end_to_end_distortion <= delta + quant.radius + DISTORTION_SLACK;
    Ok(QuantizedSolve { result, lifted, lifted_leakage, end_to_end_distortion, within_bound })
}

/// Triples `(x, y, z)` of a square distortion with `d(x,z) > d(x,y) + d(y,z)`
/// beyond `tol`; the distortion bound after lifting assumes there are none.
pub fn triangle_violations(d: &DistortionMatrix, tol: f64) -> Result<Vec<(usize, usize, usize)>> {
    ensure_same(d.input(), d.output(), "triangle check needs a square distortion")?;
    let n = d.input().len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let Some(dxy) = d.cost(x, y) else { continue };
            for z in 0..n {
                let Some(dyz) = d.cost(y, z) else { continue };
                match d.cost(x, z) {
                    Some(dxz) if dxz <= dxy + dyz + tol => {}
                    _ => out.push((x, y, z)),
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn symbols(n: usize) -> Arc<Alphabet> {
        Arc::new(Alphabet::indexed("b", n).unwrap())
    }

    #[test]
    fn one_dimensional_two_means() {
        let pts = vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]];
        let q = cluster(symbols(4), pts, &[0.25; 4], 2, Metric::L2, 7).unwrap();
        let mut c: Vec<f64> = q.center_points().iter().map(|p| p[0]).collect();
        c.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(c[0], 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 0.95, epsilon = 1e-12);
        assert_abs_diff_eq!(q.radius(), 0.05, epsilon = 1e-12);
        assert_eq!(q.assignment()[0], q.assignment()[1]);
        assert_ne!(q.assignment()[1], q.assignment()[2]);
    }

    #[test]
    fn extreme_k() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![(i % 2) as f64, (i / 2) as f64]).collect();
        for metric in [Metric::L2, Metric::Hamming] {
            let all = cluster(symbols(6), pts.clone(), &[1.0 / 6.0; 6], 6, metric, 1).unwrap();
            assert_eq!(all.radius(), 0.0);
            let one = cluster(symbols(6), pts.clone(), &[1.0 / 6.0; 6], 1, metric, 1).unwrap();
            let c = &one.center_points()[0];
            let far = pts.iter().map(|p| metric.distance(p, c)).fold(0.0, f64::max);
            assert_eq!(one.radius(), far);
        }
        assert!(cluster(symbols(6), pts.clone(), &[1.0 / 6.0; 6], 7, Metric::L2, 1).is_err());
        assert!(cluster(symbols(6), pts, &[1.0 / 6.0; 6], 0, Metric::L2, 1).is_err());
    }

    #[test]
    fn hamming_centers_are_symbols() {
        let pts: Vec<Vec<f64>> = (0..16).map(|i| (0..4).map(|b| ((i >> b) & 1) as f64).collect()).collect();
        let q = cluster(symbols(16), pts.clone(), &[1.0 / 16.0; 16], 4, Metric::Hamming, 3).unwrap();
        for (label, c) in q.centers().labels().iter().zip(q.center_points()) {
            let i = q.input().index_of(label).unwrap();
            assert_eq!(&pts[i], c);
        }
        // Greedy k-center is within twice the optimum radius of 1.
        assert!(q.radius() <= 2.0);
    }

    #[test]
    fn clustering_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let w = vec![1.0 / 40.0; 40];
        let a = cluster(symbols(40), pts.clone(), &w, 5, Metric::L2, 9).unwrap();
        let b = cluster(symbols(40), pts, &w, 5, Metric::L2, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aggregation_and_lifting() {
        let a = Arc::new(Alphabet::indexed("a", 2).unwrap());
        let prior = JointDistribution::new(a, symbols(4), vec![0.1, 0.2, 0.05, 0.15, 0.2, 0.1, 0.15, 0.05]).unwrap();
        let pts = vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]];
        let quant = Quantizer::from_centers(
            symbols(4),
            pts,
            Arc::new(Alphabet::new(["lo", "hi"]).unwrap()),
            vec![vec![0.0], vec![1.0]],
            Metric::L2,
        )
        .unwrap();
        let q = quantized_prior(&prior, &quant).unwrap();
        for (x, y) in q.mass().iter().zip([0.3, 0.2, 0.3, 0.2]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
        for (x, y) in q.row_marginal().iter().zip(prior.row_marginal()) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
        let m = ConditionalMapping::new(q.cols().clone(), q.cols().clone(), vec![0.7, 0.3, 0.4, 0.6], None).unwrap();
        let lifted = lift_mapping(&m, &quant).unwrap();
        assert_eq!(lifted.row(1), m.row(0));
        assert_eq!(lifted.row(3), m.row(1));
        assert_abs_diff_eq!(leakage(&prior, &lifted).unwrap(), leakage(&q, &m).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn identity_quantizer_matches_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w: Vec<f64> = (0..8).map(|_| rng.gen_range(0.1..1.0)).collect();
        let prior = JointDistribution::from_weights(Arc::new(Alphabet::indexed("a", 2).unwrap()), symbols(4), w).unwrap();
        let pts: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let quant = Quantizer::from_centers(symbols(4), pts.clone(), symbols(4), pts, Metric::L2).unwrap();
        let d = quant.center_distortion().unwrap();
        let opts = SolverOptions::default();
        let qs = solve_quantized(&prior, &quant, &d, 0.4, &opts).unwrap();
        let direct = solve_privacy_mapping(&prior, &d, 0.4, &opts).unwrap();
        assert_abs_diff_eq!(qs.result.leakage_bits, direct.leakage_bits, epsilon = 1e-12);
        assert_abs_diff_eq!(qs.lifted_leakage, direct.leakage_bits, epsilon = 1e-12);
        assert!(qs.within_bound);
    }

    #[test]
    fn end_to_end_distortion_within_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 30;
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0)]).collect();
        let w: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let prior = JointDistribution::from_weights(Arc::new(Alphabet::indexed("a", 2).unwrap()), symbols(n), w).unwrap();
        let quant = cluster(symbols(n), pts, &prior.col_marginal(), 5, Metric::L2, 2).unwrap();
        let d = quant.center_distortion().unwrap();
        let qs = solve_quantized(&prior, &quant, &d, 0.5, &SolverOptions::default()).unwrap();
        assert!(qs.end_to_end_distortion <= 0.5 + quant.radius() + 1e-6);
        assert!(qs.within_bound);
        assert_abs_diff_eq!(qs.lifted_leakage, qs.result.leakage_bits, epsilon = 1e-9);
    }

    #[test]
    fn triangle_check_flags_violations() {
        let pts: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        for metric in [Metric::L2, Metric::Hamming] {
            let q = Quantizer::from_centers(symbols(4), pts.clone(), symbols(4), pts.clone(), metric).unwrap();
            assert!(triangle_violations(&q.center_distortion().unwrap(), 1e-12).unwrap().is_empty());
        }
        // Squared distance is not a metric.
        let sq = DistortionMatrix::from_fn(symbols(3), symbols(3), |i, j| Some(((i as f64) - (j as f64)).powi(2))).unwrap();
        assert!(triangle_violations(&sq, 1e-12).unwrap().contains(&(0, 1, 2)));
    }
}
