//! The subcommands. Each writes its files under `out` and returns what it
//! wrote as a value.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use privf_core::erasure::SEPARATOR;
use privf_core::evaluate::{apply_mapping, logreg_cv_released, map_accuracy, majority_rate, roc, synth_politics, RocCurve};
use privf_core::prior::{mismatch_bounds, sample_complexity_log2, SampleTable};
use privf_core::quantize::{cluster, lift_mapping, quantized_prior, Quantizer};
use privf_core::{
    entropy, expected_distortion, leakage, mutual_information, sweep_curve, sweep_curve_parallel, ConditionalMapping,
    DistortionMatrix, JointDistribution, SolveResult, TradeoffCurve,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::{build_model, Model};
use crate::error::{CliError, Result};
use crate::io::{read_mapping, read_prior, write_curve, write_json, write_mapping, write_prior, write_quantizer, CurveRow, CurveValues};

pub const PRIOR_FILE: &str = "prior.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CURVE_FILE: &str = "curve.csv";
pub const REPORT_FILE: &str = "evaluate.json";
pub const ROC_FILE: &str = "roc.csv";
pub const BOUNDS_FILE: &str = "bounds.json";
pub const SURVEY_FILE: &str = "survey.csv";

pub fn mapping_file(index: usize) -> String {
    format!("mapping_{index:03}.csv")
}

fn create_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(CliError::io(out))
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Numeric(format!("{name} is {x}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub records: usize,
    pub dropped: usize,
    pub private_size: usize,
    pub public_size: usize,
    pub private_entropy_bits: f64,
    pub mutual_information_bits: f64,
}

pub fn estimate(cfg: &RunConfig, out: &Path) -> Result<EstimateSummary> {
    let model = build_model(cfg)?;
    create_dir(out)?;
    write_prior(&out.join(PRIOR_FILE), &model.prior)?;
    let summary = EstimateSummary {
        records: model.samples.len(),
        dropped: model.data.dropped,
        private_size: model.a_alpha().len(),
        public_size: model.b_alpha().len(),
        private_entropy_bits: finite("H(A)", entropy(&model.prior.row_marginal())?)?,
        mutual_information_bits: finite("I(A;B)", mutual_information(&model.prior))?,
    };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub rows: Vec<CurveRow>,
    /// Mapping file per row; `None` for failed budgets.
    pub mappings: Vec<Option<PathBuf>>,
    pub warnings: Vec<String>,
}

/// A direct solve, or a quantized one lifted back to the full alphabet.
struct Solution {
    curve: TradeoffCurve,
    quant: Option<Quantizer>,
    /// Distortion from each symbol to each released symbol.
    lifted: Option<DistortionMatrix>,
}

fn solve_curve(model: &Model, cfg: &RunConfig) -> Result<Solution> {
    let opts = cfg.solver.options()?;
    let deltas = &cfg.distortion.deltas;
    let sweep = |prior: &JointDistribution, d: &DistortionMatrix| {
        if cfg.solver.parallel {
            sweep_curve_parallel(prior, d, deltas, &opts)
        } else {
            sweep_curve(prior, d, deltas, &opts)
        }
    };
    if cfg.quantize.k == 0 {
        let d = model.distortion(&cfg.distortion.erasure_symbol, opts.var_cap)?;
        return Ok(Solution { curve: sweep(&model.prior, &d)?, quant: None, lifted: None });
    }
    let quant = cluster(
        model.b_alpha().clone(),
        model.points.clone(),
        &model.prior.col_marginal(),
        cfg.quantize.k,
        model.quantize_metric()?,
        cfg.seed,
    )?;
    let q = quantized_prior(&model.prior, &quant)?;
    let curve = sweep(&q, &quant.center_distortion()?)?;
    let lifted = quant.lifted_distortion()?;
    Ok(Solution { curve, quant: Some(quant), lifted: Some(lifted) })
}

pub fn solve(cfg: &RunConfig, out: &Path) -> Result<SolveOutput> {
    let model = build_model(cfg)?;
    let solution = solve_curve(&model, cfg)?;
    create_dir(out)?;
    if let Some(quant) = &solution.quant {
        write_quantizer(out, quant)?;
    }
    let mut output = SolveOutput { rows: Vec::new(), mappings: Vec::new(), warnings: Vec::new() };
    for (i, point) in solution.curve.points.iter().enumerate() {
        let r: &SolveResult = match &point.result {
            Ok(r) => r,
            Err(e @ privf_core::Error::VariableCap { .. }) => return Err(e.clone().into()),
            Err(e) => {
                output.warnings.push(format!("delta {}: {e}", point.delta));
                output.rows.push(CurveRow { delta: point.delta, outcome: None });
                output.mappings.push(None);
                continue;
            }
        };
        let (mapping, distortion) = match (&solution.quant, &solution.lifted) {
            (Some(quant), Some(d)) => {
                let lifted = lift_mapping(&r.mapping, quant)?;
                let dist = expected_distortion(&model.prior, &lifted, d)?;
                (lifted, dist)
            }
            _ => (r.mapping.clone(), r.achieved_distortion),
        };
        if !r.converged {
            output.warnings.push(format!(
                "delta {}: stopped after {} iterations with gap {:e}",
                point.delta, r.iterations, r.dual_gap
            ));
        }
        let path = out.join(mapping_file(i));
        write_mapping(&path, &mapping)?;
        output.rows.push(CurveRow {
            delta: point.delta,
            outcome: Some(CurveValues {
                achieved_distortion: finite("distortion", distortion)?,
                leakage_bits: finite("leakage", leakage(&model.prior, &mapping)?)?,
                map_accuracy: finite("MAP accuracy", map_accuracy(&model.prior, &mapping)?)?,
                converged: r.converged,
            }),
        });
        output.mappings.push(Some(path));
    }
    write_curve(&out.join(CURVE_FILE), &output.rows)?;
    Ok(output)
}

/// Feature vectors for released symbols. Symbols split into one value per
/// public column when they can; numeric columns stay numeric, others are
/// one-hot encoded over their sorted values.
pub fn encode_features(symbols: &[&str], columns: usize) -> Vec<Vec<f64>> {
    let split: Vec<Vec<&str>> = symbols.iter().map(|s| s.split(SEPARATOR).collect()).collect();
    let split = if split.iter().all(|v| v.len() == columns) {
        split
    } else {
        symbols.iter().map(|s| vec![*s]).collect()
    };
    let width = split.first().map_or(0, Vec::len);
    let mut features = vec![Vec::new(); split.len()];
    for c in 0..width {
        let numeric: Option<Vec<f64>> = split.iter().map(|v| v[c].parse::<f64>().ok()).collect();
        match numeric {
            Some(xs) => features.iter_mut().zip(xs).for_each(|(f, x)| f.push(x)),
            None => {
                let values: Vec<&str> = split.iter().map(|v| v[c]).collect::<BTreeSet<_>>().into_iter().collect();
                for (f, v) in features.iter_mut().zip(&split) {
                    f.extend(values.iter().map(|x| if *x == v[c] { 1.0 } else { 0.0 }));
                }
            }
        }
    }
    features
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateReport {
    pub records: usize,
    pub majority_rate: f64,
    pub map_accuracy_before: f64,
    pub map_accuracy_after: f64,
    pub leakage_before_bits: f64,
    pub leakage_after_bits: f64,
    /// Cross-validated AUC of logistic regression trained on the actual
    /// data, scoring actual (before) or released (after) held-out records.
    /// Absent unless the private attribute is binary.
    pub auc_before: Option<f64>,
    pub auc_after: Option<f64>,
}

/// ROC curves of each held-out record's actual and released symbols, scored
/// by a model fitted to the actual symbols of the other folds. Both are
/// encoded together so they share one feature space.
fn logreg_rocs(actual: &SampleTable, released: &SampleTable, columns: usize, labels: &[bool], cfg: &RunConfig) -> Result<[RocCurve; 2]> {
    let symbols: Vec<&str> = actual.records().iter().chain(released.records()).map(|(_, b)| b.as_str()).collect();
    let mut features = encode_features(&symbols, columns);
    let after = features.split_off(actual.len());
    let scores = logreg_cv_released(&features, &[&features, &after], labels, &cfg.evaluate.options(cfg.seed))?;
    Ok([roc(&scores[0], labels)?, roc(&scores[1], labels)?])
}

pub fn evaluate(cfg: &RunConfig, out: &Path, mapping: &Path) -> Result<EvaluateReport> {
    let model = build_model(cfg)?;
    let map = read_mapping(mapping, model.b_alpha())?;
    let identity = ConditionalMapping::identity(model.b_alpha().clone());
    let mut report = EvaluateReport {
        records: model.samples.len(),
        majority_rate: majority_rate(&model.prior),
        map_accuracy_before: map_accuracy(&model.prior, &identity)?,
        map_accuracy_after: map_accuracy(&model.prior, &map)?,
        leakage_before_bits: mutual_information(&model.prior),
        leakage_after_bits: leakage(&model.prior, &map)?,
        auc_before: None,
        auc_after: None,
    };
    create_dir(out)?;
    let a = model.a_alpha();
    let mut roc_rows = Vec::new();
    if a.len() == 2 {
        let positive = match &cfg.evaluate.positive {
            Some(p) => p.clone(),
            None => a.label(1).to_string(),
        };
        a.require(&positive)?;
        let labels: Vec<bool> = model.samples.records().iter().map(|(x, _)| *x == positive).collect();
        let columns = model.data.columns.len();
        let released = apply_mapping(&model.samples, &map, cfg.seed)?;
        let [before, after] = logreg_rocs(&model.samples, &released, columns, &labels, cfg)?;
        report.auc_before = Some(finite("AUC", before.auc)?);
        report.auc_after = Some(finite("AUC", after.auc)?);
        for (stage, curve) in [("before", &before), ("after", &after)] {
            roc_rows.extend(curve.points.iter().map(|&(f, t)| (stage, f, t)));
        }
    }
    let path = out.join(ROC_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(CliError::csv(&path))?;
    w.write_record(["stage", "fpr", "tpr"]).map_err(CliError::csv(&path))?;
    for (stage, f, t) in roc_rows {
        w.write_record([stage, &f.to_string(), &t.to_string()]).map_err(CliError::csv(&path))?;
    }
    w.flush().map_err(CliError::io(&path))?;
    write_json(&out.join(REPORT_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SanovRow {
    pub n: u64,
    pub eps: f64,
    pub log2_bound: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub l1: f64,
    pub leakage_bound: f64,
    pub distortion_slack: f64,
    pub distortion_bound: f64,
    pub valid: bool,
    pub sanov: Vec<SanovRow>,
}

pub fn bounds(cfg: &RunConfig, out: &Path, other: &Path) -> Result<BoundsReport> {
    let model = build_model(cfg)?;
    let q = read_prior(other)?.reindexed(model.a_alpha().clone(), model.b_alpha().clone())?;
    let d = model.distortion(&cfg.distortion.erasure_symbol, usize::MAX)?;
    let m = mismatch_bounds(&q, &model.prior, &d, cfg.bounds.delta)?;
    let (na, nb) = (model.a_alpha().len(), model.b_alpha().len());
    let mut sanov = Vec::new();
    for &n in &cfg.bounds.n {
        for &eps in &cfg.bounds.eps {
            let log2_bound = sample_complexity_log2(n, na, nb, eps)?;
            sanov.push(SanovRow { n, eps, log2_bound, bound: log2_bound.exp2() });
        }
    }
    let report = BoundsReport {
        l1: m.l1,
        leakage_bound: m.leakage_bound,
        distortion_slack: m.distortion_slack,
        distortion_bound: m.distortion_bound,
        valid: m.valid,
        sanov,
    };
    create_dir(out)?;
    write_json(&out.join(BOUNDS_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthSummary {
    pub records: usize,
    pub shows: usize,
    pub discriminative: Vec<usize>,
}

pub fn show_column(s: usize) -> String {
    format!("show_{s:02}")
}

/// Writes a synthetic survey: a `party` column and one star rating per show.
pub fn synth(cfg: &RunConfig, out: &Path) -> Result<SynthSummary> {
    let survey = synth_politics(&cfg.synth.config(cfg.seed))?;
    create_dir(out)?;
    let path = out.join(SURVEY_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(CliError::csv(&path))?;
    let shows = cfg.synth.shows;
    let mut header = vec!["party".to_string()];
    header.extend((0..shows).map(show_column));
    w.write_record(&header).map_err(CliError::csv(&path))?;
    for (label, ratings) in survey.labels.iter().zip(&survey.ratings) {
        let mut rec = vec![label.to_string()];
        rec.extend(ratings.iter().map(u8::to_string));
        w.write_record(&rec).map_err(CliError::csv(&path))?;
    }
    w.flush().map_err(CliError::io(&path))?;
    let summary = SynthSummary {
        records: survey.labels.len(),
        shows,
        discriminative: (0..shows).filter(|&s| survey.discriminative[s]).collect(),
    };
    write_json(&out.join("synth.json"), &summary)?;
    Ok(summary)
}
