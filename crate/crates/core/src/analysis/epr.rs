use rayon::prelude::*;
use serde::Serialize;

use super::r_to_db;
use crate::fock::{DensityMatrix, Truncation, TwoModeFockState};
use crate::gaussian::{covariance_of, covariance_of_pure};
use crate::subtraction::{half_split_squeezed_vacuum, ideal_subtract, HeraldPattern};
use crate::Result;

const VACUUM_VARIANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprVariances {
    pub var_x_minus: f64,
    pub var_p_plus: f64,
    pub product: f64,
    /// Whether the variances are in units of the vacuum level 1/2.
    pub vacuum_normalized: bool,
}

/// `Var(x_−)`, `Var(p_+)` and their product for a zero-mean two-mode state.
pub fn epr_variance(rho: &DensityMatrix, vacuum_normalized: bool) -> Result<EprVariances> {
    let v = covariance_of(rho)?;
    let scale = if vacuum_normalized {
        1.0 / VACUUM_VARIANCE
    } else {
        1.0
    };
    let (x, p) = (v.var_x_minus() * scale, v.var_p_plus() * scale);
    Ok(EprVariances {
        var_x_minus: x,
        var_p_plus: p,
        product: x * p,
        vacuum_normalized,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprScanPoint {
    pub r: f64,
    pub squeezing_db: f64,
    pub var_undistilled: f64,
    pub var_one_photon: f64,
    pub var_two_photon: f64,
}

/// Where two-photon subtraction stops reducing `Var(x_−)` in the ideal model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EprCrossover {
    /// Linearly interpolated zero of `Var(x_−|Ψ₂) − Var(x_−|Ψ₀)`; `None`
    /// when the scan shows no sign change.
    pub r: Option<f64>,
    /// Magnitude of the initial squeezing at the crossover, in dB.
    pub squeezing_db: Option<f64>,
    pub scan: Vec<EprScanPoint>,
}

/// Dense scan `r = step, 2 step, …, r_max` of `Var(x_−)` for the undistilled,
/// one- and two-photon-subtracted ideal states.
pub fn epr_crossover(r_max: f64, step: f64, trunc: Truncation) -> Result<EprCrossover> {
    let n = (r_max / step).round() as usize;
    let scan = (1..=n)
        .into_par_iter()
        .map(|k| {
            let r = k as f64 * step;
            let var = |psi: TwoModeFockState| -> Result<f64> {
                Ok(covariance_of_pure(&psi)?.var_x_minus())
            };
            Ok(EprScanPoint {
                r,
                squeezing_db: r_to_db(r),
                var_undistilled: var(half_split_squeezed_vacuum(r, trunc)?)?,
                var_one_photon: var(ideal_subtract(r, HeraldPattern::ALICE, trunc)?.state)?,
                var_two_photon: var(ideal_subtract(r, HeraldPattern::BOTH, trunc)?.state)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r_cross = None;
    for w in scan.windows(2) {
        let (d0, d1) = (
            w[0].var_two_photon - w[0].var_undistilled,
            w[1].var_two_photon - w[1].var_undistilled,
        );
        if d0 < 0.0 && d1 >= 0.0 {
            r_cross = Some(w[0].r + (w[1].r - w[0].r) * d0 / (d0 - d1));
            break;
        }
    }
    Ok(EprCrossover {
        r: r_cross,
        squeezing_db: r_cross.map(|r| r_to_db(r).abs()),
        scan,
    })
}
