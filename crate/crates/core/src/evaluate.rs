//! Measuring what an adversary can still infer after release.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::{compose_output_joint, ConditionalMapping, JointDistribution};
use crate::error::{Error, Result};
use crate::prior::SampleTable;

/// Draws every released symbol independently from its record's mapping row.
pub fn apply_mapping(records: &SampleTable, map: &ConditionalMapping, seed: u64) -> Result<SampleTable> {
    let rows: Vec<WeightedIndex<f64>> = (0..map.input().len())
        .map(|b| WeightedIndex::new(map.row(b)).map_err(|e| Error::InvalidMapping(e.to_string())))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records
        .records()
        .iter()
        .map(|(a, b)| {
            let i = map.input().require(b)?;
            let j = rows[i].sample(&mut rng);
            Ok((a.clone(), map.output().label(j).to_string()))
        })
        .collect()
}

/// Bayes accuracy of guessing `A` from `B̂` by maximum a posteriori:
/// `Σ_b̂ max_a p(a, b̂)`.
pub fn map_accuracy(prior: &JointDistribution, map: &ConditionalMapping) -> Result<f64> {
    Ok(max_a_sum(&compose_output_joint(prior, map)?))
}

/// MAP accuracy with no released data: the largest class probability.
pub fn majority_rate(prior: &JointDistribution) -> f64 {
    prior.row_marginal().into_iter().fold(0.0, f64::max)
}

fn max_a_sum(joint: &JointDistribution) -> f64 {
    (0..joint.n_cols())
        .map(|j| (0..joint.n_rows()).map(|a| joint.get(a, j)).fold(0.0, f64::max))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(fpr, tpr)` after each distinct threshold, highest first. The origin
    /// is implied and not listed.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Threshold sweep over the distinct scores with a trapezoidal area.
pub fn roc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument("one label per score is required".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|l| **l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument("ROC needs at least one positive and one negative".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut points = Vec::new();
    let mut auc = 0.0;
    let mut prev = (0.0, 0.0);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let pt = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        auc += (pt.0 - prev.0) * (pt.1 + prev.1) / 2.0;
        points.push(pt);
        prev = pt;
    }
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogregOptions {
    pub folds: usize,
    pub l2_penalty: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LogregOptions {
    fn default() -> Self {
        Self { folds: 10, l2_penalty: 1e-3, learning_rate: 0.1, iterations: 2000, seed: 0 }
    }
}

/// Identical training rows collapsed into weighted rows.
struct Design {
    rows: Vec<Vec<f64>>,
    labels: Vec<f64>,
    weights: Vec<f64>,
}

impl Design {
    fn new(x: &[&[f64]], y: &[bool]) -> Self {
        let mut index: HashMap<(Vec<u64>, bool), usize> = HashMap::new();
        let mut d = Design { rows: Vec::new(), labels: Vec::new(), weights: Vec::new() };
        for (row, &label) in x.iter().zip(y) {
            let key = (row.iter().map(|v| v.to_bits()).collect(), label);
            match index.get(&key) {
                Some(&i) => d.weights[i] += 1.0,
                None => {
                    index.insert(key, d.rows.len());
                    d.rows.push(row.to_vec());
                    d.labels.push(if label { 1.0 } else { 0.0 });
                    d.weights.push(1.0);
                }
            }
        }
        d
    }

    /// Mean log-loss plus the ridge term, and its gradient (bias last).
    fn loss_grad(&self, w: &[f64], l2: f64, total: f64, grad: &mut [f64]) -> f64 {
        let dims = w.len() - 1;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for ((x, &y), &c) in self.rows.iter().zip(&self.labels).zip(&self.weights) {
            let z = w[dims] + x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            // log(1 + e^z) − y·z, stable for large |z|.
            loss += c * (z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z);
            let r = c * (sigmoid(z) - y);
            for (g, a) in grad.iter_mut().zip(x) {
                *g += r * a;
            }
            grad[dims] += r;
        }
        loss /= total;
        grad.iter_mut().for_each(|g| *g /= total);
        for d in 0..dims {
            loss += 0.5 * l2 * w[d] * w[d];
            grad[d] += l2 * w[d];
        }
        loss
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Full-batch gradient descent; the step halves whenever it fails to lower
/// the loss. Returns weights with the bias last.
fn fit(design: &Design, dims: usize, opts: &LogregOptions) -> Vec<f64> {
    let total: f64 = design.weights.iter().sum();
    let mut w = vec![0.0; dims + 1];
    let mut grad = vec![0.0; dims + 1];
    let mut trial_grad = vec![0.0; dims + 1];
    let mut loss = design.loss_grad(&w, opts.l2_penalty, total, &mut grad);
    let mut lr = opts.learning_rate;
    for _ in 0..opts.iterations {
        let trial: Vec<f64> = w.iter().zip(&grad).map(|(a, g)| a - lr * g).collect();
        let next = design.loss_grad(&trial, opts.l2_penalty, total, &mut trial_grad);
        if next < loss {
            w = trial;
            loss = next;
            std::mem::swap(&mut grad, &mut trial_grad);
        } else {
            lr *= 0.5;
            if lr < 1e-12 {
                break;
            }
        }
    }
    w
}

/// Held-out probability scores from k-fold cross-validated L2-regularized
/// logistic regression. Folds come from a seeded stratified shuffle; features are
/// standardized with training-fold statistics.
pub fn logreg_cv(features: &[Vec<f64>], labels: &[bool], opts: &LogregOptions) -> Result<Vec<f64>> {
    Ok(logreg_cv_released(features, &[features], labels, opts)?.remove(0))
}

/// Like [`logreg_cv`], but each held-out record is scored on its features in
/// every one of `releases` by the model fitted to the `actual` features of
/// the other folds: an adversary who learned from undistorted data and then
/// sees a release. Returns one score vector per release.
pub fn logreg_cv_released(
    actual: &[Vec<f64>],
    releases: &[&[Vec<f64>]],
    labels: &[bool],
    opts: &LogregOptions,
) -> Result<Vec<Vec<f64>>> {
    let features = actual;
    let n = features.len();
    if labels.len() != n || releases.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("one label and one release per record are required".into()));
    }
    if opts.folds < 2 || opts.folds > n {
        return Err(Error::InvalidArgument(format!("folds must be in 2..={n}")));
    }
    if !(opts.l2_penalty >= 0.0) || !(opts.learning_rate > 0.0) {
        return Err(Error::InvalidArgument("penalty must be nonnegative and learning rate positive".into()));
    }
    let dims = features.first().map_or(0, Vec::len);
    if features.iter().chain(releases.iter().flat_map(|r| r.iter())).any(|f| f.len() != dims) {
        return Err(Error::InvalidArgument("all feature vectors must have the same length".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    // Stratified: each class is dealt round-robin, so every training fold has
    // nearly the global class balance and the intercept cannot anti-predict.
    let mut fold_of = vec![0; n];
    let dealt = order.iter().filter(|&&i| labels[i]).chain(order.iter().filter(|&&i| !labels[i]));
    for (pos, &i) in dealt.enumerate() {
        fold_of[i] = pos % opts.folds;
    }

    let mut scores = vec![vec![0.0; n]; releases.len()];
    for fold in 0..opts.folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let positives = train.iter().filter(|&&i| labels[i]).count();
        if positives == 0 || positives == train.len() {
            return Err(Error::SingleClassFold { fold });
        }
        let m = train.len() as f64;
        let mean: Vec<f64> = (0..dims).map(|d| train.iter().map(|&i| features[i][d]).sum::<f64>() / m).collect();
        let scale: Vec<f64> = (0..dims)
            .map(|d| {
                let v = train.iter().map(|&i| (features[i][d] - mean[d]).powi(2)).sum::<f64>() / m;
                if v > 0.0 { v.sqrt() } else { 1.0 }
            })
            .collect();
        let standardize = |x: &[f64]| -> Vec<f64> { x.iter().zip(&mean).zip(&scale).map(|((v, mu), s)| (v - mu) / s).collect() };
        let rows: Vec<Vec<f64>> = train.iter().map(|&i| standardize(&features[i])).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let y: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let w = fit(&Design::new(&refs, &y), dims, opts);
        for (release, out) in releases.iter().zip(&mut scores) {
            for i in (0..n).filter(|&i| fold_of[i] == fold) {
                let x = standardize(&release[i]);
                out[i] = sigmoid(w[dims] + x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>());
            }
        }
    }
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub shows: usize,
    pub discriminative_fraction: f64,
    /// Difference between the classes' probabilities of liking a
    /// discriminative show they watch.
    pub margin: f64,
    /// Relative change in how often each class watches a discriminative
    /// show: the favoring class watches `1 + lift` times as often, the other
    /// `1 − lift` times.
    pub watch_lift: f64,
    /// Probability of the second class.
    pub positive_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 1218,
            shows: 50,
            discriminative_fraction: 1.0 / 3.0,
            margin: 0.35,
            watch_lift: 0.5,
            positive_rate: 0.39,
            seed: 0,
        }
    }
}

pub const CLASSES: [&str; 2] = ["D", "R"];

/// Star threshold for a positive binary rating.
pub const LIKE_STARS: u8 = 4;

/// Show `s` is watched with probability
/// `TAIL_WATCH + HEAD_WATCH · exp(−s / POPULARITY_DECAY)`.
const TAIL_WATCH: f64 = 0.08;
const HEAD_WATCH: f64 = 0.5;
const POPULARITY_DECAY: f64 = 8.0;

/// Synthetic survey of show ratings with a binary political label.
#[derive(Debug, Clone, PartialEq)]
pub struct Survey {
    pub labels: Vec<&'static str>,
    /// Zero for shows not watched, else one to five stars.
    pub ratings: Vec<Vec<u8>>,
    pub discriminative: Vec<bool>,
}

impl Survey {
    pub fn binarized(&self) -> Vec<Vec<u8>> {
        self.ratings
            .iter()
            .map(|r| r.iter().map(|&s| u8::from(s >= LIKE_STARS)).collect())
            .collect()
    }

    pub fn positives(&self) -> Vec<bool> {
        self.labels.iter().map(|l| *l == CLASSES[1]).collect()
    }

    /// Records whose public symbol is the string of binary ratings of `shows`.
    pub fn samples(&self, shows: &[usize]) -> SampleTable {
        self.binarized()
            .iter()
            .zip(&self.labels)
            .map(|(bits, a)| (a.to_string(), bits_label(bits, shows)))
            .collect()
    }

    /// The `k` shows rated by the most people, ties to the lower index.
    pub fn most_watched(&self, k: usize) -> Vec<usize> {
        let mut counts: Vec<(usize, usize)> = (0..self.discriminative.len())
            .map(|s| (s, self.ratings.iter().filter(|r| r[s] > 0).count()))
            .collect();
        counts.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        counts.into_iter().take(k).map(|(s, _)| s).collect()
    }
}

pub fn bits_label(bits: &[u8], shows: &[usize]) -> String {
    shows.iter().map(|&s| if bits[s] == 1 { '1' } else { '0' }).collect()
}

/// Parses a label from [`bits_label`] back into features.
pub fn label_bits(label: &str) -> Vec<f64> {
    label.chars().map(|c| if c == '1' { 1.0 } else { 0.0 }).collect()
}

/// Generates a survey. People rate only the shows they watch; popularity
/// decays with the show index. Each show has a base probability of being
/// liked in `[0.3, 0.7]`. On discriminative shows one class watches more
/// often (`watch_lift`) and likes it `margin/2` more, the other less. A like
/// becomes 3, 4 or 5 stars, a dislike 1 to 4 stars, so binarizing at 4 stars
/// is a noisy view of the preference.
pub fn synth_politics(cfg: &SynthConfig) -> Result<Survey> {
    if cfg.n == 0 || cfg.shows == 0 {
        return Err(Error::InvalidArgument("need at least one person and one show".into()));
    }
    for (name, v) in [
        ("discriminative fraction", cfg.discriminative_fraction),
        ("margin", cfg.margin),
        ("watch lift", cfg.watch_lift),
        ("positive rate", cfg.positive_rate),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} must be in [0, 1], got {v}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Spread discriminative shows evenly from the most popular one: show s is
    // one iff ⌈s f⌉ < ⌈(s+1) f⌉.
    let f = cfg.discriminative_fraction;
    let discriminative: Vec<bool> = (0..cfg.shows)
        .map(|s| (s as f64 * f - 1e-9).ceil() < ((s + 1) as f64 * f - 1e-9).ceil())
        .collect();
    let watch: Vec<f64> = (0..cfg.shows)
        .map(|s| TAIL_WATCH + HEAD_WATCH * (-(s as f64) / POPULARITY_DECAY).exp())
        .collect();
    let base: Vec<f64> = (0..cfg.shows).map(|_| rng.gen_range(0.3..0.7)).collect();
    let favors: Vec<bool> = (0..cfg.shows).map(|_| rng.gen_bool(0.5)).collect();
    let liked = WeightedIndex::new([0.3, 0.35, 0.35]).expect("static weights");
    let disliked = WeightedIndex::new([0.3, 0.3, 0.25, 0.15]).expect("static weights");

    let mut labels = Vec::with_capacity(cfg.n);
    let mut ratings = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let positive = rng.gen_bool(cfg.positive_rate);
        labels.push(CLASSES[usize::from(positive)]);
        let row = (0..cfg.shows)
            .map(|s| {
                let sign = match (discriminative[s], positive == favors[s]) {
                    (false, _) => 0.0,
                    (true, true) => 1.0,
                    (true, false) => -1.0,
                };
                let w = (watch[s] * (1.0 + sign * cfg.watch_lift)).clamp(0.0, 1.0);
                let p = (base[s] + sign * cfg.margin / 2.0).clamp(0.0, 1.0);
                if !rng.gen_bool(w) {
                    0
                } else if rng.gen_bool(p) {
                    3 + liked.sample(&mut rng) as u8
                } else {
                    1 + disliked.sample(&mut rng) as u8
                }
            })
            .collect();
        ratings.push(row);
    }
    Ok(Survey { labels, ratings, discriminative })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dist::{mutual_information, Alphabet};
    use crate::prior::empirical_joint;
    use approx::assert_abs_diff_eq;

    fn alpha(labels: &[&str]) -> Arc<Alphabet> {
        Arc::new(Alphabet::new(labels.iter().copied()).unwrap())
    }

    fn records(n: usize) -> SampleTable {
        (0..n).map(|i| (format!("a{}", i % 2), format!("b{}", i % 2))).collect()
    }

    #[test]
    fn deterministic_mapping_ignores_seed() {
        let b = alpha(&["b0", "b1"]);
        let m = ConditionalMapping::deterministic(b.clone(), b, &[1, 0]).unwrap();
        let x = apply_mapping(&records(10), &m, 1).unwrap();
        let y = apply_mapping(&records(10), &m, 2).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.records()[0].1, "b1");
    }

    #[test]
    fn sampling_is_reproducible_and_accurate() {
        let b = alpha(&["b0", "b1"]);
        let m = ConditionalMapping::new(b.clone(), b, vec![0.3, 0.7, 0.3, 0.7], None).unwrap();
        let r = records(100_000);
        let x = apply_mapping(&r, &m, 5).unwrap();
        assert_eq!(x, apply_mapping(&r, &m, 5).unwrap());
        let ones = x.records().iter().filter(|(_, b)| b == "b1").count() as f64 / 1e5;
        assert!((ones - 0.7).abs() < 0.01);
        let bad: SampleTable = [("a0".to_string(), "zz".to_string())].into_iter().collect();
        assert_eq!(apply_mapping(&bad, &m, 0).unwrap_err(), Error::UnknownLabel("zz".into()));
    }

    #[test]
    fn map_accuracy_examples() {
        let (a, b) = (alpha(&["x", "y"]), alpha(&["p", "q"]));
        let corr = JointDistribution::new(a.clone(), b.clone(), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(map_accuracy(&corr, &ConditionalMapping::identity(b.clone())).unwrap(), 1.0);
        let prior = JointDistribution::new(a, b.clone(), vec![0.4, 0.3, 0.1, 0.2]).unwrap();
        let flat = ConditionalMapping::constant(b.clone(), b, 0).unwrap();
        assert_abs_diff_eq!(map_accuracy(&prior, &flat).unwrap(), majority_rate(&prior), epsilon = 1e-15);
        assert_abs_diff_eq!(majority_rate(&prior), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn roc_examples() {
        let r = roc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap();
        assert_abs_diff_eq!(r.auc, 0.75, epsilon = 1e-15);
        assert_eq!(r.points, vec![(0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]);
        let perfect = roc(&[0.0, 1.0, 1.0, 0.0], &[false, true, true, false]).unwrap();
        assert_eq!(perfect.auc, 1.0);
        let flat = roc(&[0.3; 4], &[false, true, true, false]).unwrap();
        assert_eq!(flat.points, vec![(1.0, 1.0)]);
        assert_eq!(flat.auc, 0.5);
        assert!(roc(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn logreg_separable_and_shuffled() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..1000 {
            let label = i % 2 == 0;
            let c = if label { 2.0 } else { -2.0 };
            x.push(vec![c + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            y.push(label);
        }
        let s = logreg_cv(&x, &y, &LogregOptions::default()).unwrap();
        assert_eq!(roc(&s, &y).unwrap().auc, 1.0);
        let mut shuffled = y.clone();
        shuffled.shuffle(&mut rng);
        let s = logreg_cv(&x, &shuffled, &LogregOptions::default()).unwrap();
        let auc = roc(&s, &shuffled).unwrap().auc;
        assert!((auc - 0.5).abs() <= 0.05, "{auc}");
    }

    #[test]
    fn logreg_rejects_single_class_folds() {
        let x = vec![vec![0.0]; 20];
        let mut y = vec![false; 20];
        y[3] = true;
        let opts = LogregOptions { folds: 20, ..LogregOptions::default() };
        assert!(matches!(logreg_cv(&x, &y, &opts), Err(Error::SingleClassFold { .. })));
        assert!(logreg_cv(&x, &y, &LogregOptions { folds: 1, ..LogregOptions::default() }).is_err());
    }

    #[test]
    fn logreg_is_deterministic() {
        let survey = synth_politics(&SynthConfig { n: 300, ..SynthConfig::default() }).unwrap();
        let x: Vec<Vec<f64>> = survey.binarized().iter().map(|r| r.iter().map(|&b| b as f64).collect()).collect();
        let opts = LogregOptions { iterations: 200, ..LogregOptions::default() };
        let a = logreg_cv(&x, &survey.positives(), &opts).unwrap();
        assert_eq!(a, logreg_cv(&x, &survey.positives(), &opts).unwrap());
    }

    #[test]
    fn released_scores_use_the_actual_fit() {
        let survey = synth_politics(&SynthConfig { n: 300, ..SynthConfig::default() }).unwrap();
        let x: Vec<Vec<f64>> = survey.binarized().iter().map(|r| r.iter().map(|&b| b as f64).collect()).collect();
        let y = survey.positives();
        let opts = LogregOptions { iterations: 200, ..LogregOptions::default() };
        let blank = vec![vec![0.0; x[0].len()]; x.len()];
        let scores = logreg_cv_released(&x, &[&x, &blank], &y, &opts).unwrap();
        assert_eq!(scores[0], logreg_cv(&x, &y, &opts).unwrap());
        // Identical releases get one score per fold; each fold holds both classes in proportion.
        assert!((roc(&scores[1], &y).unwrap().auc - 0.5).abs() < 0.05);
        assert!(logreg_cv_released(&x, &[&blank[1..]], &y, &opts).is_err());
    }

    #[test]
    fn synth_default_top5_information() {
        let survey = synth_politics(&SynthConfig::default()).unwrap();
        assert_eq!(survey.discriminative.iter().filter(|d| **d).count(), 17);
        let top = survey.most_watched(5);
        let samples = survey.samples(&top);
        let symbols: Vec<String> = (0..32u8).map(|v| bits_label(&[v & 1, v >> 1 & 1, v >> 2 & 1, v >> 3 & 1, v >> 4 & 1], &[0, 1, 2, 3, 4])).collect();
        let prior = empirical_joint(&samples, alpha(&CLASSES), Arc::new(Alphabet::new(symbols).unwrap())).unwrap();
        let mi = mutual_information(&prior);
        // Frozen from this generator at seed 0.
        assert!((0.1..=0.3).contains(&mi), "{mi}");
    }

    #[test]
    fn synth_extremes() {
        let none = synth_politics(&SynthConfig { discriminative_fraction: 0.0, ..SynthConfig::default() }).unwrap();
        assert!(none.discriminative.iter().all(|d| !d));
        let all = synth_politics(&SynthConfig { discriminative_fraction: 1.0, ..SynthConfig::default() }).unwrap();
        assert!(all.discriminative.iter().all(|d| *d));
        for r in &all.ratings {
            assert!(r.iter().all(|s| *s <= 5));
        }
        assert!(synth_politics(&SynthConfig { margin: 1.5, ..SynthConfig::default() }).is_err());
        assert_eq!(label_bits("0110"), vec![0.0, 1.0, 1.0, 0.0]);
    }
}
