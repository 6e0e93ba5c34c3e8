//! Releases that may blank out individual features.
//!
//! A record is a tuple of categorical features. The release keeps or erases
//! each feature; its cost is the number of erasures. Releasing a different
//! value for a kept feature is not allowed.

use std::collections::HashSet;
use std::sync::Arc;

use crate::dist::{Alphabet, DistortionMatrix};
use crate::error::{Error, Result};

/// Separator between feature values in a symbol label.
pub const SEPARATOR: &str = "|";

pub const DEFAULT_ERASURE: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    pub name: String,
    pub values: Vec<String>,
    pub erasure: String,
}

impl Feature {
    pub fn new<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
            erasure: DEFAULT_ERASURE.to_string(),
        }
    }

    pub fn with_erasure(mut self, erasure: impl Into<String>) -> Self {
        self.erasure = erasure.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    features: Vec<Feature>,
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("schema has no features".into()));
        }
        let mut names = HashSet::new();
        for f in &features {
            if !names.insert(f.name.as_str()) {
                return Err(Error::DuplicateLabel(f.name.clone()));
            }
            if f.values.is_empty() {
                return Err(Error::InvalidArgument(format!("feature {:?} has no values", f.name)));
            }
            let mut seen = HashSet::new();
            for v in f.values.iter().chain(std::iter::once(&f.erasure)) {
                if v.contains(SEPARATOR) {
                    return Err(Error::InvalidArgument(format!("label {v:?} contains {SEPARATOR:?}")));
                }
                if !seen.insert(v.as_str()) {
                    return Err(Error::DuplicateLabel(v.clone()));
                }
            }
        }
        Ok(Self { features })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    /// Symbol label of a tuple of values.
    pub fn encode<S: AsRef<str>>(&self, values: &[S]) -> Result<String> {
        if values.len() != self.features.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                self.features.len(),
                values.len()
            )));
        }
        for (f, v) in self.features.iter().zip(values) {
            let v = v.as_ref();
            if !f.values.iter().any(|x| x == v) && v != f.erasure {
                return Err(Error::UnknownLabel(v.to_string()));
            }
        }
        Ok(values.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(SEPARATOR))
    }
}

/// Index tuples in lexicographic order, last feature fastest.
fn tuples(radices: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = radices.iter().product();
    (0..total)
        .map(|mut i| {
            let mut t = vec![0; radices.len()];
            for d in (0..radices.len()).rev() {
                t[d] = i % radices[d];
                i /= radices[d];
            }
            t
        })
        .collect()
}

fn label(schema: &FeatureSchema, t: &[usize]) -> String {
    schema
        .features
        .iter()
        .zip(t)
        .map(|(f, &i)| if i < f.values.len() { f.values[i].as_str() } else { f.erasure.as_str() })
        .collect::<Vec<_>>()
        .join(SEPARATOR)
}

/// Input alphabet (all value tuples) and output alphabet (each feature may
/// also be erased, the erasure ordered after the values).
pub fn build_erasure_alphabet(schema: &FeatureSchema) -> Result<(Arc<Alphabet>, Arc<Alphabet>)> {
    let plain: Vec<usize> = schema.features.iter().map(|f| f.values.len()).collect();
    let erased: Vec<usize> = plain.iter().map(|k| k + 1).collect();
    let b = Alphabet::new(tuples(&plain).iter().map(|t| label(schema, t)))?;
    let b_hat = Alphabet::new(tuples(&erased).iter().map(|t| label(schema, t)))?;
    Ok((Arc::new(b), Arc::new(b_hat)))
}

/// Erasure count where every kept feature matches; forbidden otherwise.
pub fn erasure_distortion(schema: &FeatureSchema) -> Result<DistortionMatrix> {
    let (b, b_hat) = build_erasure_alphabet(schema)?;
    let plain: Vec<usize> = schema.features.iter().map(|f| f.values.len()).collect();
    let erased: Vec<usize> = plain.iter().map(|k| k + 1).collect();
    let ins = tuples(&plain);
    let outs = tuples(&erased);
    DistortionMatrix::from_fn(b, b_hat, |i, j| {
        let mut cost = 0.0;
        for ((&x, &y), &k) in ins[i].iter().zip(&outs[j]).zip(&plain) {
            if y == k {
                cost += 1.0;
            } else if x != y {
                return None;
            }
        }
        Some(cost)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(cards: &[usize]) -> FeatureSchema {
        FeatureSchema::new(
            cards
                .iter()
                .enumerate()
                .map(|(i, &k)| Feature::new(format!("f{i}"), (0..k).map(|v| format!("v{v}"))))
                .collect(),
        )
        .unwrap()
    }

    fn census() -> FeatureSchema {
        FeatureSchema::new(vec![
            Feature::new("sex", ["Female", "Male"]),
            Feature::new("age", ["young", "adult", "old"]),
            Feature::new("education", ["HS", "College", "Masters", "Doctorate"]),
        ])
        .unwrap()
    }

    #[test]
    fn alphabet_sizes() {
        let (b, bh) = build_erasure_alphabet(&schema(&[2, 3, 4])).unwrap();
        assert_eq!((b.len(), bh.len()), (24, 60));
        let (b, bh) = build_erasure_alphabet(&schema(&[2])).unwrap();
        assert_eq!(b.labels(), ["v0", "v1"]);
        assert_eq!(bh.labels(), ["v0", "v1", "*"]);
        let (b, bh) = build_erasure_alphabet(&census()).unwrap();
        assert_eq!((b.len(), bh.len()), (24, 60));
        assert_eq!(b.label(0), "Female|young|HS");
        assert_eq!(bh.label(59), "*|*|*");
    }

    #[test]
    fn distortion_examples() {
        let s = census();
        let d = erasure_distortion(&s).unwrap();
        let b = d.input().index_of("Male|young|HS").unwrap();
        let same = d.output().index_of("Male|young|HS").unwrap();
        let all = d.output().index_of("*|*|*").unwrap();
        let other = d.output().index_of("Female|*|HS").unwrap();
        let partial = d.output().index_of("Male|*|HS").unwrap();
        assert_eq!(d.cost(b, same), Some(0.0));
        assert_eq!(d.cost(b, all), Some(3.0));
        assert_eq!(d.cost(b, other), None);
        assert_eq!(d.cost(b, partial), Some(1.0));
        assert_eq!(d.d_max(), 3.0);
    }

    #[test]
    fn each_row_has_all_erasure_patterns() {
        let d = erasure_distortion(&schema(&[2, 3, 4])).unwrap();
        for b in 0..d.input().len() {
            assert_eq!(d.support().row(b).iter().filter(|x| **x).count(), 8);
        }
    }

    #[test]
    fn schema_validation() {
        assert!(FeatureSchema::new(vec![]).is_err());
        assert!(FeatureSchema::new(vec![Feature::new("x", Vec::<String>::new())]).is_err());
        assert!(FeatureSchema::new(vec![Feature::new("x", ["a"]), Feature::new("x", ["b"])]).is_err());
        assert!(FeatureSchema::new(vec![Feature::new("x", ["a", "a"])]).is_err());
        assert!(FeatureSchema::new(vec![Feature::new("x", ["a", "*"])]).is_err());
        assert!(FeatureSchema::new(vec![Feature::new("x", ["a", "*"]).with_erasure("?")]).is_ok());
        assert!(FeatureSchema::new(vec![Feature::new("x", ["a|b"])]).is_err());
        let s = census();
        assert_eq!(s.encode(&["Male", "*", "HS"]).unwrap(), "Male|*|HS");
        assert!(s.encode(&["Male", "HS"]).is_err());
        assert!(s.encode(&["Male", "teen", "HS"]).is_err());
    }
}
