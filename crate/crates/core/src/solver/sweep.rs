//! Privacy-distortion curves: one solve per distortion budget.

use rayon::prelude::*;

use super::{solve_privacy_mapping, Init, SolveResult, SolverOptions};
use crate::dist::{DistortionMatrix, JointDistribution};
use crate::error::{Error, Result};

/// Leakage may rise by at most this much between consecutive budgets.
const MONOTONE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub delta: f64,
    /// A failed point keeps its error; the sweep carries on past it.
    pub result: std::result::Result<SolveResult, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub points: Vec<CurvePoint>,
}

impl TradeoffCurve {
    pub fn solved(&self) -> impl Iterator<Item = (f64, &SolveResult)> {
        self.points
            .iter()
            .filter_map(|p| p.result.as_ref().ok().map(|r| (p.delta, r)))
    }

    /// First budget whose leakage is at most `bits`.
    pub fn first_below(&self, bits: f64) -> Option<(f64, &SolveResult)> {
        self.solved().find(|(_, r)| r.leakage_bits <= bits)
    }
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::InvalidArgument("no distortion budgets given".into()));
    }
    if deltas.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("distortion budgets must be nondecreasing".into()));
    }
    Ok(())
}

/// A looser budget admits every mapping a tighter one did, so a solution
/// found earlier replaces a worse later one.
fn enforce_monotone(points: &mut [CurvePoint]) {
    let mut best: Option<SolveResult> = None;
    for p in points.iter_mut() {
        if let Ok(r) = &mut p.result {
            if let Some(prev) = &best {
                if prev.leakage_bits < r.leakage_bits - MONOTONE_SLACK {
                    let iterations = r.iterations;
                    *r = prev.clone();
                    r.iterations = iterations;
                }
            }
            best = Some(r.clone());
        }
    }
}

/// Sequential sweep; each solve starts from the previous mapping.
pub fn sweep_curve(
    prior: &JointDistribution,
    d: &DistortionMatrix,
    deltas: &[f64],
    opts: &SolverOptions,
) -> Result<TradeoffCurve> {
    check_deltas(deltas)?;
    let mut points = Vec::with_capacity(deltas.len());
    let mut warm: Option<SolveResult> = None;
    for &delta in deltas {
        let mut o = opts.clone();
        if let Some(prev) = &warm {
            o.init = Init::Custom(prev.mapping.clone());
        }
        let result = solve_privacy_mapping(prior, d, delta, &o);
        if let Ok(r) = &result {
            warm = Some(r.clone());
        }
        points.push(CurvePoint { delta, result });
    }
    enforce_monotone(&mut points);
    Ok(TradeoffCurve { points })
}

/// Solves every budget independently on the rayon pool, without warm starts.
pub fn sweep_curve_parallel(
    prior: &JointDistribution,
    d: &DistortionMatrix,
    deltas: &[f64],
    opts: &SolverOptions,
) -> Result<TradeoffCurve> {
    check_deltas(deltas)?;
    let mut points: Vec<CurvePoint> = deltas
        .par_iter()
        .map(|&delta| CurvePoint { delta, result: solve_privacy_mapping(prior, d, delta, opts) })
        .collect();
    enforce_monotone(&mut points);
    Ok(TradeoffCurve { points })
}
