//! Dataset ingestion and the prior, alphabets and distortion built from it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use privf_core::erasure::{build_erasure_alphabet, erasure_distortion, Feature, FeatureSchema, SEPARATOR};
use privf_core::prior::{kde_discretize, smoothed_joint, Bandwidth, Grid, SampleTable};
use privf_core::quantize::Metric;
use privf_core::{Alphabet, DistortionMatrix, JointDistribution};

use crate::config::{DataConfig, MetricKind, PriorMethod, RunConfig};
use crate::error::{CliError, Result};

/// Records after dropping missing values, binning and recoding.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub private: Vec<String>,
    pub public: Vec<Vec<String>>,
    pub dropped: usize,
}

impl Dataset {
    pub fn symbol(&self, i: usize) -> String {
        self.public[i].join(SEPARATOR)
    }
}

pub fn load_dataset(cfg: &DataConfig) -> Result<Dataset> {
    let path = cfg.path.as_path();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(CliError::csv(path))?;
    let headers = reader.headers().map_err(CliError::csv(path))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::data(path, format!("missing column {name:?}")))
    };
    let private_col = find(&cfg.private)?;
    let public_cols = cfg.public.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;
    for col in cfg.bins.keys().chain(cfg.recode.keys()) {
        if *col != cfg.private && !cfg.public.contains(col) {
            return Err(CliError::Usage(format!("{col:?} is configured but not used")));
        }
    }

    let mut data = Dataset { columns: cfg.public.clone(), private: Vec::new(), public: Vec::new(), dropped: 0 };
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(CliError::csv(path))?;
        let used = std::iter::once(private_col).chain(public_cols.iter().copied());
        if used.clone().any(|c| row.get(c).map_or(true, |v| cfg.missing.iter().any(|m| m == v))) {
            data.dropped += 1;
            continue;
        }
        let at = |name: &str, raw: &str| {
            transform(cfg, name, raw).map_err(|m| CliError::data(path, format!("record {}: {m}", line + 1)))
        };
        data.private.push(at(&cfg.private, &row[private_col])?);
        let mut values = Vec::with_capacity(public_cols.len());
        for (name, &c) in cfg.public.iter().zip(&public_cols) {
            let v = at(name, &row[c])?;
            if v.contains(SEPARATOR) {
                return Err(CliError::data(path, format!("value {v:?} contains {SEPARATOR:?}")));
            }
            if let Some(t) = cfg.binarize_at {
                let x = parse_number(&v).map_err(|m| CliError::data(path, m))?;
                values.push(if x >= t { "1" } else { "0" }.to_string());
            } else {
                values.push(v);
            }
        }
        data.public.push(values);
    }
    if data.private.is_empty() {
        return Err(CliError::data(path, "no usable records"));
    }
    Ok(data)
}

fn parse_number(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("{v:?} is not a number"))
}

fn transform(cfg: &DataConfig, column: &str, raw: &str) -> std::result::Result<String, String> {
    let mut v = raw.to_string();
    if let Some(bin) = cfg.bins.get(column) {
        v = bin.label(parse_number(&v)?).to_string();
    }
    if let Some(table) = cfg.recode.get(column) {
        v = table
            .get(&v)
            .cloned()
            .ok_or_else(|| format!("no recoding for {v:?} in column {column:?}"))?;
    }
    Ok(v)
}

/// Everything a command needs to solve or evaluate.
#[derive(Debug, Clone)]
pub struct Model {
    pub data: Dataset,
    /// (private label, public symbol) per record.
    pub samples: SampleTable,
    pub prior: JointDistribution,
    /// Coordinates of every public symbol, for clustering and distances.
    pub points: Vec<Vec<f64>>,
    pub metric: MetricKind,
}

impl Model {
    pub fn a_alpha(&self) -> &Arc<Alphabet> {
        self.prior.rows()
    }

    pub fn b_alpha(&self) -> &Arc<Alphabet> {
        self.prior.cols()
    }

    /// Distortion on the full alphabet; refuses alphabets over the cap
    /// before building the matrix.
    pub fn distortion(&self, erasure_symbol: &str, var_cap: usize) -> Result<DistortionMatrix> {
        let b = self.b_alpha().clone();
        match self.metric {
            MetricKind::Erasure => Ok(erasure_distortion(&self.schema(erasure_symbol)?)?),
            MetricKind::Hamming | MetricKind::L2 => {
                let variables = b.len() * b.len();
                if variables > var_cap {
                    return Err(privf_core::Error::VariableCap { variables, cap: var_cap }.into());
                }
                let metric = self.quantize_metric()?;
                let p = &self.points;
                Ok(DistortionMatrix::from_fn(b.clone(), b, |i, j| Some(metric.distance(&p[i], &p[j])))?)
            }
        }
    }

    pub fn quantize_metric(&self) -> Result<Metric> {
        match self.metric {
            MetricKind::Hamming => Ok(Metric::Hamming),
            MetricKind::L2 => Ok(Metric::L2),
            MetricKind::Erasure => Err(CliError::Usage("the erasure metric has no quantizer".into())),
        }
    }

    fn schema(&self, erasure_symbol: &str) -> Result<FeatureSchema> {
        schema_of(&self.data, erasure_symbol)
    }
}

/// One feature per public column, its values sorted.
fn schema_of(data: &Dataset, erasure_symbol: &str) -> Result<FeatureSchema> {
    let features = column_values(data)
        .into_iter()
        .zip(&data.columns)
        .map(|(values, name)| Feature::new(name.clone(), values).with_erasure(erasure_symbol))
        .collect();
    Ok(FeatureSchema::new(features)?)
}

fn column_values(data: &Dataset) -> Vec<BTreeSet<&str>> {
    (0..data.columns.len())
        .map(|c| data.public.iter().map(|r| r[c].as_str()).collect())
        .collect()
}

pub fn build_model(cfg: &RunConfig) -> Result<Model> {
    let data = load_dataset(cfg.data()?)?;
    build_model_from(data, cfg)
}

pub fn build_model_from(data: Dataset, cfg: &RunConfig) -> Result<Model> {
    let path = cfg.data()?.path.clone();
    let metric = cfg.distortion.metric;
    let a_alpha = Arc::new(Alphabet::new(data.private.iter().collect::<BTreeSet<_>>())?);

    if cfg.prior.method == PriorMethod::Kde {
        if metric == MetricKind::Erasure {
            return Err(CliError::Usage("a KDE grid cannot be erased feature by feature".into()));
        }
        return kde_model(data, cfg, a_alpha, &path);
    }

    let values = column_values(&data);
    let b_alpha = match metric {
        MetricKind::Erasure => build_erasure_alphabet(&schema_of(&data, &cfg.distortion.erasure_symbol)?)?.0,
        MetricKind::Hamming | MetricKind::L2 => {
            let symbols: BTreeSet<String> = (0..data.private.len()).map(|i| data.symbol(i)).collect();
            Arc::new(Alphabet::new(symbols)?)
        }
    };
    let points = coordinates(&b_alpha, &values, metric == MetricKind::L2, &path)?;
    let samples: SampleTable = (0..data.private.len()).map(|i| (data.private[i].clone(), data.symbol(i))).collect();
    let prior = smoothed_joint(&samples, a_alpha, b_alpha, cfg.prior.smoothing)?;
    Ok(Model { data, samples, prior, points, metric })
}

/// Numeric coordinates of each symbol: parsed values for L2, value indices
/// per column otherwise.
fn coordinates(b: &Alphabet, values: &[BTreeSet<&str>], numeric: bool, path: &Path) -> Result<Vec<Vec<f64>>> {
    let index: Vec<BTreeMap<&str, usize>> =
        values.iter().map(|v| v.iter().enumerate().map(|(i, s)| (*s, i)).collect()).collect();
    b.labels()
        .iter()
        .map(|label| {
            label
                .split(SEPARATOR)
                .zip(&index)
                .map(|(v, idx)| {
                    if numeric {
                        parse_number(v).map_err(|m| CliError::data(path, format!("l2 metric: {m}")))
                    } else {
                        Ok(idx.get(v).map_or(idx.len() as f64, |&i| i as f64))
                    }
                })
                .collect()
        })
        .collect()
}

fn kde_model(data: Dataset, cfg: &RunConfig, a_alpha: Arc<Alphabet>, path: &Path) -> Result<Model> {
    let bins = cfg.prior.kde_bins;
    let xs: Vec<Vec<f64>> = data
        .public
        .iter()
        .map(|r| r.iter().map(|v| parse_number(v)).collect::<std::result::Result<_, _>>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|m| CliError::data(path, format!("kde needs numeric columns: {m}")))?;
    let dims = data.columns.len();
    let ranges: Vec<(f64, f64)> = (0..dims)
        .map(|d| {
            let lo = xs.iter().map(|x| x[d]).fold(f64::INFINITY, f64::min);
            let hi = xs.iter().map(|x| x[d]).fold(f64::NEG_INFINITY, f64::max);
            if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) }
        })
        .collect();
    let grid = Grid::uniform(&ranges, bins)?;
    let bandwidth = match cfg.prior.bandwidth {
        Some(h) => Bandwidth::Shared(h),
        None => Bandwidth::CrossValidated,
    };
    let labelled: Vec<(String, Vec<f64>)> = data.private.iter().cloned().zip(xs.iter().cloned()).collect();
    let prior = kde_discretize(&labelled, a_alpha, &grid, &bandwidth)?;
    let b_alpha = prior.cols().clone();
    let cell = |x: &[f64]| -> Vec<usize> {
        x.iter()
            .zip(&ranges)
            .map(|(v, (lo, hi))| (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1))
            .collect()
    };
    let samples: SampleTable = xs
        .iter()
        .zip(&data.private)
        .map(|(x, a)| {
            let c = cell(x).iter().map(|i| i.to_string()).collect::<Vec<_>>().join(SEPARATOR);
            (a.clone(), c)
        })
        .collect();
    let points = b_alpha
        .labels()
        .iter()
        .map(|l| {
            l.split(SEPARATOR)
                .zip(&ranges)
                .map(|(i, (lo, hi))| {
                    let i: f64 = i.parse().expect("grid labels are indices");
                    lo + (hi - lo) * (i + 0.5) / bins as f64
                })
                .collect()
        })
        .collect();
    Ok(Model { data, samples, prior, points, metric: cfg.distortion.metric })
}
