//! Conformal geometry of the round 2-sphere.

pub mod conformal;
pub mod harmonics;
pub mod ricci;

pub use conformal::{
    corollary_gap, curvature, mobius_factor, mobius_factor_with, polyakov_diff, polyakov_diff_relative,
    polyakov_path_integral,
    w_first_variation, wmono_check, ConformalFactor, ConformalFactorFile, CorollaryGap, CurvatureField,
    WmonoCheck,
};
pub use ricci::{ricci_flow, FlowRecord, FlowTrace, RicciOptions};
