use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{log_negativity, LogBase};
use crate::fock::{apply_beamsplitter_density, tensor, DensityMatrix};
use crate::tomography::{
    derive_seed, mle_reconstruct, sample_protocol_pm, standard_phases, MleConfig,
};
use crate::{Error, Result};

/// Logarithmic negativity (ebits) of `B(π/4)(ρ_− ⊗ ρ_+)B(π/4)†`. Without a
/// `+` reconstruction that mode is taken to be vacuum.
pub fn negativity_from_minus(minus: &DensityMatrix, plus: Option<&DensityMatrix>) -> Result<f64> {
    minus.require_modes(1)?;
    let d = minus.dim();
    let vacuum = DensityMatrix::vacuum(d, 1)?;
    let (minus, plus) = match plus {
        None => (minus.clone(), vacuum),
        // both modes populated: widen so the recombination is exact
        Some(p) => (minus.padded(2 * d - 1)?, p.padded(2 * d - 1)?),
    };
    let pm = tensor(&minus, &plus)?;
    let ab = apply_beamsplitter_density(&pm, FRAC_PI_4)?.value;
    log_negativity(&ab, LogBase::Two)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    /// Samples per subset.
    pub n: f64,
    pub mean: f64,
    pub std: f64,
    /// Subsets that entered the mean.
    pub count: usize,
}

/// Least-squares fit of `E_N(N) = a + b/√N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationFit {
    pub a: f64,
    pub b: f64,
    pub points: Vec<FitPoint>,
    /// Euclidean norm of the fit residuals.
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Closed-form least squares in `u = 1/√N` over the point means.
pub fn fit_extrapolation(points: Vec<FitPoint>) -> Result<ExtrapolationFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 points to fit, got {}",
            points.len()
        )));
    }
    let u: Vec<f64> = points.iter().map(|p| 1.0 / p.n.sqrt()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let k = u.len() as f64;
    let (mu, my) = (u.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let suu: f64 = u.iter().map(|x| (x - mu).powi(2)).sum();
    if !(suu > 0.0) {
        return Err(Error::InvalidParameter(
            "fit needs at least two distinct sample sizes".into(),
        ));
    }
    let suy: f64 = u.iter().zip(&y).map(|(x, v)| (x - mu) * (v - my)).sum();
    let b = suy / suu;
    let a = my - b * mu;
    let residual = u
        .iter()
        .zip(&y)
        .map(|(x, v)| (v - a - b * x).powi(2))
        .sum::<f64>()
        .sqrt();
    let mut warnings = Vec::new();
    if b < 0.0 {
        warnings.push(format!("negative noise coefficient b = {b}"));
    }
    Ok(ExtrapolationFit {
        a,
        b,
        points,
        residual,
        warnings,
    })
}

/// Settings of the data-size study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSizeConfig {
    pub n_full: usize,
    pub phases: Vec<f64>,
    pub d_list: Vec<usize>,
    pub seed: u64,
    pub mle: MleConfig,
}

impl Default for DataSizeConfig {
    fn default() -> Self {
        DataSizeConfig {
            n_full: 600_000,
            phases: standard_phases(),
            d_list: vec![1, 2, 4, 8, 16],
            seed: 2024,
            mle: MleConfig {
                dim: 14,
                ..MleConfig::default()
            },
        }
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Samples `n_full` homodyne records of the two-mode `truth`, splits the
/// `−`-mode record into `d` phase-balanced subsets for every `d` in
/// `d_list`, reconstructs each subset and fits the mean negativity against
/// `1/√N_d`. Subsets whose reconstruction does not converge are dropped and
/// reported in the warnings.
pub fn negativity_vs_datasize(
    truth: &DensityMatrix,
    cfg: &DataSizeConfig,
) -> Result<ExtrapolationFit> {
    if cfg.d_list.is_empty() || cfg.d_list.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "invalid d_list {:?}",
            cfg.d_list
        )));
    }
    let (_, minus) = sample_protocol_pm(truth, &cfg.phases, cfg.n_full, cfg.seed)?;
    let jobs: Vec<(usize, crate::tomography::QuadratureDataset)> = cfg
        .d_list
        .iter()
        .map(|&d| Ok(minus.stratified_split(d)?.into_iter().map(move |s| (d, s))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|(d, subset)| {
            let rec = mle_reconstruct(subset, &cfg.mle)?;
            let en = negativity_from_minus(&rec.rho, None)?;
            Ok((*d, subset.len(), rec.converged, en))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let mut points = Vec::new();
    for &d in &cfg.d_list {
        let mine: Vec<_> = outcomes.iter().filter(|o| o.0 == d).collect();
        let dropped = mine.iter().filter(|o| !o.2).count();
        if dropped > 0 {
            warnings.push(format!(
                "d = {d}: {dropped} subset(s) dropped, reconstruction did not converge"
            ));
        }
        let values: Vec<f64> = mine.iter().filter(|o| o.2).map(|o| o.3).collect();
        if values.is_empty() {
            continue;
        }
        let n = mine.iter().map(|o| o.1 as f64).sum::<f64>() / mine.len() as f64;
        let (mean, std) = mean_std(&values);
        points.push(FitPoint {
            n,
            mean,
            std,
            count: values.len(),
        });
    }
    let mut fit = fit_extrapolation(points)?;
    fit.warnings.extend(warnings);
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapReport {
    pub mean: f64,
    pub std: f64,
    pub values: Vec<f64>,
    pub n: usize,
    pub seed: u64,
}

/// Monte-Carlo spread of the reconstructed negativity: `resamples`
/// independent `sample → reconstruct → E_N` runs with derived seeds.
pub fn bootstrap_uncertainty(
    truth: &DensityMatrix,
    n: usize,
    phases: &[f64],
    resamples: usize,
    seed: u64,
    mle: &MleConfig,
) -> Result<BootstrapReport> {
    if resamples < 20 {
        return Err(Error::InvalidParameter(format!(
            "at least 20 resamples required, got {resamples}"
        )));
    }
    let values = (0..resamples)
        .into_par_iter()
        .map(|k| {
            let (_, minus) = sample_protocol_pm(truth, phases, n, derive_seed(seed, k as u64))?;
            negativity_from_minus(&mle_reconstruct(&minus, mle)?.rho, None)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, std) = mean_std(&values);
    Ok(BootstrapReport {
        mean,
        std,
        values,
        n,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{squeezed_vacuum, Truncation};
    use crate::subtraction::half_split_squeezed_vacuum;

    #[test]
    fn exact_points_are_recovered() {
        let (a, b) = (0.83, 2.5);
        let points = [1e3, 4e3, 1.6e4, 6.4e4]
            .iter()
            .map(|&n: &f64| FitPoint {
                n,
                mean: a + b / n.sqrt(),
                std: 0.0,
                count: 1,
            })
            .collect();
        let fit = fit_extrapolation(points).unwrap();
        assert!((fit.a - a).abs() < 1e-12 && (fit.b - b).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn fit_needs_distinct_sizes() {
        let p = FitPoint {
            n: 10.0,
            mean: 1.0,
            std: 0.0,
            count: 1,
        };
        assert!(fit_extrapolation(vec![p.clone()]).is_err());
        assert!(fit_extrapolation(vec![p.clone(), p]).is_err());
    }

    #[test]
    fn minus_mode_rebuilds_the_two_mode_negativity() {
        let r = 0.35;
        // a single-mode cutoff of 30 keeps the recombined state within 1e-6
        let t = Truncation::new(30);
        let sv = squeezed_vacuum(r, t).unwrap().to_density();
        let en = negativity_from_minus(&sv, None).unwrap();
        assert!((en - r * std::f64::consts::LOG2_E).abs() < 1e-6);
        let direct = log_negativity(
            &half_split_squeezed_vacuum(r, t).unwrap().to_density(),
            LogBase::Two,
        )
        .unwrap();
        assert!((en - direct).abs() < 1e-6);
        let small = squeezed_vacuum(r, Truncation::new(12))
            .unwrap()
            .to_density();
        let with_plus =
            negativity_from_minus(&small, Some(&DensityMatrix::vacuum(12, 1).unwrap())).unwrap();
        assert!((with_plus - negativity_from_minus(&small, None).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn bootstrap_requires_enough_resamples() {
        let sv = half_split_squeezed_vacuum(0.2, Truncation::new(8))
            .unwrap()
            .to_density();
        assert!(
            bootstrap_uncertainty(&sv, 100, &standard_phases(), 5, 1, &MleConfig::default())
                .is_err()
        );
    }
}
