//! Pipelines built on the simulator: squeezing conversions, EPR variances,
//! distillation curves and the data-size extrapolation of reconstructed
//! negativity.

mod curves;
mod epr;
mod extrapolation;

pub use curves::{distillation_curve, CurveConfig, CurvePoint, Scheme, CURVE_CSV_HEADER};
pub use epr::{epr_crossover, epr_variance, EprCrossover, EprScanPoint, EprVariances};
pub use extrapolation::{
    bootstrap_uncertainty, fit_extrapolation, negativity_from_minus, negativity_vs_datasize,
    BootstrapReport, DataSizeConfig, ExtrapolationFit, FitPoint,
};

use std::f64::consts::LN_10;

/// Squeezing in dB, `10 log10(e^{−2r})`, to `r`. Negative dB is squeezed.
pub fn db_to_r(db: f64) -> f64 {
    -db * LN_10 / 20.0
}

/// `r` to dB, `10 log10(e^{−2r})`.
pub fn r_to_db(r: f64) -> f64 {
    -20.0 * r / LN_10
}
