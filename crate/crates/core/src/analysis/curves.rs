use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::epr::epr_variance;
use super::r_to_db;
use crate::entanglement::{entropy_of_state, log_negativity, LogBase};
use crate::fock::{loss_channel, Mode, Truncation};
use crate::io::fmt_f64;
use crate::subtraction::{
    half_split_squeezed_vacuum, heralded_subtract, HeraldPattern, SubtractionSpec,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "undistilled")]
    Undistilled,
    #[serde(rename = "1photon")]
    OnePhoton,
    #[serde(rename = "2photon")]
    TwoPhoton,
}

impl Scheme {
    pub fn pattern(self) -> HeraldPattern {
        match self {
            Scheme::Undistilled => HeraldPattern::NONE,
            Scheme::OnePhoton => HeraldPattern::ALICE,
            Scheme::TwoPhoton => HeraldPattern::BOTH,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Undistilled => "undistilled",
            Scheme::OnePhoton => "1photon",
            Scheme::TwoPhoton => "2photon",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "undistilled" | "0photon" => Ok(Scheme::Undistilled),
            "1photon" => Ok(Scheme::OnePhoton),
            "2photon" => Ok(Scheme::TwoPhoton),
            other => Err(Error::Config(format!(
                "unknown scheme {other:?} (undistilled, 1photon, 2photon)"
            ))),
        }
    }
}

/// Protocol settings shared by every point of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub scheme: Scheme,
    pub reflectance: f64,
    pub eta_apd: f64,
    pub eta_out: f64,
    /// Use the annihilation-operator limit instead of the tapped model.
    pub ideal: bool,
}

impl CurveConfig {
    pub fn new(scheme: Scheme, reflectance: f64) -> Self {
        CurveConfig {
            scheme,
            reflectance,
            eta_apd: 1.0,
            eta_out: 1.0,
            ideal: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub squeezing_db: f64,
    pub r: f64,
    pub scheme: Scheme,
    pub reflectance: f64,
    pub eta_out: f64,
    /// Logarithmic negativity in ebits.
    pub log_negativity: f64,
    /// Entropy of entanglement in ebits, for pure states only.
    pub entropy: Option<f64>,
    pub var_x_minus: f64,
    pub var_p_plus: f64,
    pub success_prob: f64,
}

pub const CURVE_CSV_HEADER: &str =
    "squeezing_db,r,scheme,R,eta_out,E_N,entropy,var_xminus,var_pplus,success_prob";

impl CurvePoint {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(self.squeezing_db),
            fmt_f64(self.r),
            self.scheme,
            fmt_f64(self.reflectance),
            fmt_f64(self.eta_out),
            fmt_f64(self.log_negativity),
            self.entropy.map(fmt_f64).unwrap_or_default(),
            fmt_f64(self.var_x_minus),
            fmt_f64(self.var_p_plus),
            fmt_f64(self.success_prob),
        )
    }
}

fn curve_point(cfg: &CurveConfig, r: f64, trunc: Truncation) -> Result<CurvePoint> {
    let (rho, success_prob) = match cfg.scheme {
        // the undistilled reference sees the same downstream loss
        Scheme::Undistilled => {
            let psi0 = half_split_squeezed_vacuum(r, trunc)?.to_density();
            let lossy = loss_channel(
                &loss_channel(&psi0, Mode::A, cfg.eta_out)?,
                Mode::B,
                cfg.eta_out,
            )?;
            (lossy, 1.0)
        }
        scheme => {
            let spec = SubtractionSpec {
                pattern: scheme.pattern(),
                reflectance: cfg.reflectance,
                eta_apd: cfg.eta_apd,
                eta_out: cfg.eta_out,
                ideal: cfg.ideal,
            };
            let h = heralded_subtract(r, spec, trunc)?;
            (h.state, h.success_prob)
        }
    };
    let epr = epr_variance(&rho, false)?;
    Ok(CurvePoint {
        squeezing_db: r_to_db(r),
        r,
        scheme: cfg.scheme,
        reflectance: cfg.reflectance,
        eta_out: cfg.eta_out,
        log_negativity: log_negativity(&rho, LogBase::Two)?,
        entropy: entropy_of_state(&rho, LogBase::Two).ok(),
        var_x_minus: epr.var_x_minus,
        var_p_plus: epr.var_p_plus,
        success_prob,
    })
}

/// One curve point per squeezing parameter in `r_grid`, in grid order.
pub fn distillation_curve(
    cfg: &CurveConfig,
    r_grid: &[f64],
    trunc: Truncation,
) -> Result<Vec<CurvePoint>> {
    r_grid
        .par_iter()
        .map(|&r| curve_point(cfg, r, trunc))
        .collect()
}
