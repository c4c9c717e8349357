//! Wigner functions in the Fock basis.
//!
//! Normalization: `∫ W dx dp = 1`, vacuum `W = exp(−x² − p²)/π`. With
//! `α = (x + ip)/√2`, the Wigner function of `|m><n|` for `m ≥ n` is
//! `(−1)^n/π √(n!/m!) (2α*)^{m−n} e^{−2|α|²} L_n^{(m−n)}(4|α|²)`.

use std::f64::consts::{FRAC_1_PI, FRAC_1_SQRT_2};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fock::DensityMatrix;
use crate::{Error, Result, C64};

/// `W_{|m><n|}(x, p)` for all `m, n < dim`.
pub fn fock_wigner_kernel(dim: usize, x: f64, p: f64) -> DMatrix<C64> {
    let alpha_conj = C64::new(x, -p) * FRAC_1_SQRT_2;
    let z = 2.0 * (x * x + p * p); // 4|α|²
    let gauss = (-(x * x + p * p)).exp() * FRAC_1_PI;
    let mut w = DMatrix::<C64>::zeros(dim, dim);
    let two_ac = alpha_conj * 2.0;
    let mut pow = C64::new(1.0, 0.0); // (2α*)^k
    for k in 0..dim {
        // L_n^{(k)}(z) by upward recurrence
        let count = dim - k;
        let mut lag = vec![0.0; count];
        lag[0] = 1.0;
        if count > 1 {
            lag[1] = 1.0 + k as f64 - z;
        }
        for n in 1..count.saturating_sub(1) {
            let nf = n as f64;
            lag[n + 1] = ((2.0 * nf + 1.0 + k as f64 - z) * lag[n] - (nf + k as f64) * lag[n - 1])
                / (nf + 1.0);
        }
        // √(n!/(n+k)!) built incrementally
        let mut ratio = 1.0 / (1..=k).map(|i| i as f64).product::<f64>().sqrt();
        for n in 0..count {
            if n > 0 {
                ratio *= (n as f64 / (n + k) as f64).sqrt();
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let val = pow * (sign * ratio * gauss * lag[n]);
            w[(n + k, n)] = val;
            if k > 0 {
                w[(n, n + k)] = val.conj();
            }
        }
        pow *= two_ac;
    }
    w
}

/// Single-mode Wigner function at `(x, p)`.
pub fn wigner_point(rho: &DensityMatrix, x: f64, p: f64) -> Result<f64> {
    rho.require_modes(1)?;
    let kernel = fock_wigner_kernel(rho.dim(), x, p);
    let e = rho.elements();
    // Σ_mn ρ_mn W_{|m><n|}
    Ok(e.iter().zip(kernel.iter()).map(|(r, k)| (r * k).re).sum())
}

/// Brute-force two-mode Wigner function `Σ ρ_{(mn),(m'n')} W_{mm'}(A) W_{nn'}(B)`.
pub fn wigner_two_mode_point(rho: &DensityMatrix, point: [f64; 4]) -> Result<f64> {
    rho.require_modes(2)?;
    let d = rho.dim();
    let ka = fock_wigner_kernel(d, point[0], point[1]);
    let kb = fock_wigner_kernel(d, point[2], point[3]);
    let e = rho.elements();
    let mut acc = 0.0;
    for m in 0..d {
        for n in 0..d {
            for mp in 0..d {
                for np in 0..d {
                    acc += (e[(m * d + n, mp * d + np)] * ka[(m, mp)] * kb[(n, np)]).re;
                }
            }
        }
    }
    Ok(acc)
}

/// `W(x_A, p_A, x_B, p_B) = W_−(x_−, p_−) W_+(x_+, p_+)` with
/// `x_± = (x_A ± x_B)/√2` and likewise for `p`.
pub fn factorized_two_mode_wigner(
    rho_minus: &DensityMatrix,
    rho_plus: &DensityMatrix,
    point: [f64; 4],
) -> Result<f64> {
    let [xa, pa, xb, pb] = point;
    let (xm, pm) = ((xa - xb) * FRAC_1_SQRT_2, (pa - pb) * FRAC_1_SQRT_2);
    let (xp, pp) = ((xa + xb) * FRAC_1_SQRT_2, (pa + pb) * FRAC_1_SQRT_2);
    Ok(wigner_point(rho_minus, xm, pm)? * wigner_point(rho_plus, xp, pp)?)
}

/// Wigner function sampled on a uniform grid; `values[i][j] = W(x[j], p[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Normalization convention of `values`.
    pub convention: String,
}

pub const DEFAULT_GRID_EXTENT: f64 = 5.0;
pub const DEFAULT_GRID_POINTS: usize = 201;

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

impl WignerGrid {
    pub fn evaluate(rho: &DensityMatrix, x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        rho.require_modes(1)?;
        if x.len() < 2 || p.len() < 2 {
            return Err(Error::InvalidParameter(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        let values = p
            .par_iter()
            .map(|&pv| {
                x.iter()
                    .map(|&xv| wigner_point(rho, xv, pv))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WignerGrid {
            x,
            p,
            values,
            convention: "integral=1, vacuum peak 1/pi".into(),
        })
    }

    /// Square grid `[−extent, extent]²` with `points` samples per axis.
    pub fn square(rho: &DensityMatrix, extent: f64, points: usize) -> Result<Self> {
        let axis = linspace(-extent, extent, points);
        Self::evaluate(rho, axis.clone(), axis)
    }

    /// Trapezoidal `∫∫ W dx dp`.
    pub fn integral(&self) -> f64 {
        let weights = |axis: &[f64]| -> Vec<f64> {
            let n = axis.len();
            (0..n)
                .map(|i| {
                    let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
                    let right = if i + 1 < n {
                        axis[i + 1] - axis[i]
                    } else {
                        0.0
                    };
                    (left + right) / 2.0
                })
                .collect()
        };
        let (wx, wp) = (weights(&self.x), weights(&self.p));
        self.values
            .iter()
            .zip(&wp)
            .map(|(row, wpi)| row.iter().zip(&wx).map(|(v, wxj)| v * wxj).sum::<f64>() * wpi)
            .sum()
    }

    pub fn min(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Location `(x, p)` and value of the grid minimum.
    pub fn argmin(&self) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < best.2 {
                    best = (self.x[j], self.p[i], v);
                }
            }
        }
        best
    }

    /// CSV: header row `p\x, x_0, x_1, ...`, then one row per `p` value
    /// starting with `p` itself. 17 significant digits.
    pub fn to_csv(&self) -> String {
        let f = |v: f64| format!("{v:.16e}");
        let mut s = String::from("p\\x");
        for &x in &self.x {
            s.push(',');
            s.push_str(&f(x));
        }
        s.push('\n');
        for (p, row) in self.p.iter().zip(&self.values) {
            s.push_str(&f(*p));
            for &v in row {
                s.push(',');
                s.push_str(&f(v));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}
