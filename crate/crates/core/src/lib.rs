//! Privacy-preserving mappings for discrete data.
//!
//! A private attribute `A` and released data `B` are linked by a known joint
//! prior. The release is randomized through a conditional mapping
//! `p(b̂ | b)` chosen to minimize the mutual information `I(A; B̂)` while the
//! expected distortion `E[d(B, B̂)]` stays within a budget.

pub mod dist;
pub mod erasure;
pub mod error;
pub mod evaluate;
pub mod prior;
pub mod quantize;
pub mod solver;

pub use dist::{
    compose_output_joint, entropy, expected_distortion, l1_distance, leakage, mutual_information,
    Alphabet, ConditionalMapping, DistortionMatrix, JointDistribution, SupportMask,
};
pub use error::{Error, Result};
pub use solver::{
    brute_force_oracle, leakage_gradient, solve_privacy_mapping, sweep_curve, sweep_curve_parallel,
    CurvePoint, Init, SolveResult, SolverOptions, StepRule, TradeoffCurve,
};
