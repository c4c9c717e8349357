use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::QuadratureDataset;
use super::quadrature::hermite_functions;
use crate::fock::DensityMatrix;
use crate::{Error, Result, C64};

/// Settings of the iterative `RρR` reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MleConfig {
    /// Fock cutoff of the reconstructed state.
    pub dim: usize,
    pub max_iter: usize,
    /// Stop when the relative log-likelihood gain falls below this.
    pub tol: f64,
    /// Histogram bins per phase.
    pub bins: usize,
    /// Treat every record as phase-randomized. The likelihood then sees
    /// only the Fock diagonal, so a single phase fixes the populations of a
    /// phase-insensitive state.
    pub phase_averaged: bool,
}

impl Default for MleConfig {
    fn default() -> Self {
        MleConfig {
            dim: 14,
            max_iter: 2000,
            tol: 1e-9,
            bins: 256,
            phase_averaged: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub converged: bool,
    /// Log-likelihood after each accepted iteration, starting from `I/D`.
    pub log_likelihood_trace: Vec<f64>,
}

/// Binned data of one phase: `psi[b, n] = ψ_n(x_b)` at bin centers.
struct PhaseBins {
    theta: f64,
    psi: DMatrix<f64>,
    freq: DVector<f64>,
    log_width: f64,
    averaged: bool,
}

fn bin_phase(theta: f64, xs: &[f64], cfg: &MleConfig, total: f64) -> PhaseBins {
    let (bins, dim) = (cfg.bins, cfg.dim);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
    let (lo, hi) = (lo - pad, hi + pad);
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    for &x in xs {
        counts[(((x - lo) / w) as usize).min(bins - 1)] += 1.0;
    }
    let kept: Vec<usize> = (0..bins).filter(|&b| counts[b] > 0.0).collect();
    let psi = DMatrix::from_fn(kept.len(), dim, |i, n| {
        hermite_functions(lo + (kept[i] as f64 + 0.5) * w, dim)[n]
    });
    PhaseBins {
        theta,
        psi,
        freq: DVector::from_iterator(kept.len(), kept.iter().map(|&b| counts[b] / total)),
        log_width: w.ln(),
        averaged: cfg.phase_averaged,
    }
}

/// `D_θ† ρ D_θ` with `D_θ = diag(e^{inθ})`; its real part gives the
/// phase-`θ` quadrature statistics.
fn rotate(rho: &DMatrix<C64>, theta: f64, inverse: bool) -> DMatrix<C64> {
    let s = if inverse { -1.0 } else { 1.0 };
    DMatrix::from_fn(rho.nrows(), rho.ncols(), |m, n| {
        rho[(m, n)] * C64::from_polar(1.0, s * (n as f64 - m as f64) * theta)
    })
}

/// Bin probabilities `p_b = ψ_bᵀ Re(ρ_θ) ψ_b` for one phase.
fn bin_probs(rho: &DMatrix<C64>, ph: &PhaseBins) -> DVector<f64> {
    let re = if ph.averaged {
        DMatrix::from_diagonal(&rho.diagonal().map(|z| z.re))
    } else {
        rotate(rho, ph.theta, false).map(|z| z.re)
    };
    let t = &ph.psi * re;
    DVector::from_iterator(
        ph.psi.nrows(),
        t.row_iter()
            .zip(ph.psi.row_iter())
            .map(|(a, b)| a.dot(&b).max(1e-300)),
    )
}

fn log_likelihood(rho: &DMatrix<C64>, phases: &[PhaseBins]) -> f64 {
    phases
        .iter()
        .map(|ph| {
            let p = bin_probs(rho, ph);
            ph.freq
                .iter()
                .zip(p.iter())
                .map(|(f, p)| f * (p.ln() + ph.log_width))
                .sum::<f64>()
        })
        .sum()
}

/// `R(ρ) = Σ_b f_b Π_b / p_b(ρ)`.
fn r_operator(rho: &DMatrix<C64>, phases: &[PhaseBins]) -> DMatrix<C64> {
    let d = rho.nrows();
    let mut r = DMatrix::<C64>::zeros(d, d);
    for ph in phases {
        let p = bin_probs(rho, ph);
        let w = ph.freq.component_div(&p);
        let weighted = DMatrix::from_fn(ph.psi.nrows(), d, |b, n| ph.psi[(b, n)] * w[b]);
        let rt = (ph.psi.transpose() * weighted).map(|x| C64::new(x, 0.0));
        if ph.averaged {
            r += DMatrix::from_diagonal(&rt.diagonal());
        } else {
            r += rotate(&rt, ph.theta, true);
        }
    }
    r
}

fn sandwich(a: &DMatrix<C64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let out = a * rho * a;
    let tr = out.trace().re;
    let out = out.unscale(tr);
    (&out + out.adjoint()).scale(0.5)
}

/// Maximum-likelihood single-mode state from binned homodyne data, by the
/// fixed-point iteration `ρ ← RρR / tr(RρR)` started from `I/D`. If a full
/// step would lower the likelihood, the diluted step `(I + εR)/(1 + ε)` is
/// used with `ε` halved until the likelihood does not decrease.
pub fn mle_reconstruct(data: &QuadratureDataset, cfg: &MleConfig) -> Result<ReconstructionResult> {
    if cfg.dim < 2 || cfg.bins < 2 || cfg.max_iter == 0 {
        return Err(Error::InvalidParameter(format!(
            "invalid reconstruction settings {cfg:?}"
        )));
    }
    if data.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let total = data.len() as f64;
    let phases: Vec<PhaseBins> = data
        .by_phase()
        .iter()
        .map(|(th, xs)| bin_phase(*th, xs, cfg, total))
        .collect();
    let d = cfg.dim;
    let mut rho = DMatrix::<C64>::identity(d, d).unscale(d as f64);
    let mut ll = log_likelihood(&rho, &phases);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let r = r_operator(&rho, &phases);
        let mut next = sandwich(&r, &rho);
        let mut next_ll = log_likelihood(&next, &phases);
        let mut eps = 1.0;
        while next_ll < ll && eps > 1e-9 {
            let a = (DMatrix::<C64>::identity(d, d) + r.scale(eps)).unscale(1.0 + eps);
            next = sandwich(&a, &rho);
            next_ll = log_likelihood(&next, &phases);
            eps *= 0.5;
        }
        if next_ll < ll {
            converged = true;
            break;
        }
        let gain = (next_ll - ll) / ll.abs().max(1e-300);
        rho = next;
        ll = next_ll;
        trace.push(ll);
        if gain < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(ReconstructionResult {
        rho: DensityMatrix::new(rho, d, 1)?,
        iterations,
        log_likelihood: ll,
        converged,
        log_likelihood_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity, squeezed_vacuum, FockVector, Truncation};
    use crate::tomography::{sample_phases, standard_phases, ModeLabel};

    #[test]
    fn recovers_a_single_photon() {
        let one = FockVector::number(1, 8).unwrap().to_density();
        let data = sample_phases(&one, &standard_phases(), 30_000, 3, ModeLabel::A).unwrap();
        let res = mle_reconstruct(
            &data,
            &MleConfig {
                dim: 8,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(res.converged);
        assert!(
            res.rho.populations()[1] > 0.97,
            "{:?}",
            res.rho.populations()
        );
        assert!((res.rho.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn likelihood_never_decreases() {
        let sv = squeezed_vacuum(0.5, Truncation::new(24))
            .unwrap()
            .to_density();
        let data = sample_phases(&sv, &standard_phases(), 12_000, 11, ModeLabel::A).unwrap();
        let res = mle_reconstruct(
            &data,
            &MleConfig {
                dim: 10,
                max_iter: 300,
                ..Default::default()
            },
        )
        .unwrap();
        for w in res.log_likelihood_trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let truth = squeezed_vacuum(0.5, Truncation::new(10).with_tail_tol(1e-3))
            .unwrap()
            .to_density();
        assert!(fidelity(&res.rho, &truth).unwrap() > 0.97);
        assert!(res.rho.check_physical().is_ok());
    }

    #[test]
    fn vacuum_round_trip_across_seeds() {
        let vac = crate::fock::DensityMatrix::vacuum(10, 1).unwrap();
        let mean = (1..=10u64)
            .map(|seed| {
                let data =
                    sample_phases(&vac, &standard_phases(), 60_000, seed, ModeLabel::A).unwrap();
                let res = mle_reconstruct(
                    &data,
                    &MleConfig {
                        dim: 10,
                        ..Default::default()
                    },
                )
                .unwrap();
                fidelity(&res.rho, &vac).unwrap()
            })
            .sum::<f64>()
            / 10.0;
        assert!(mean >= 0.995, "{mean}");
    }

    #[test]
    fn rejects_bad_settings() {
        let data = QuadratureDataset::new(ModeLabel::A, 0, "empty");
        assert!(mle_reconstruct(&data, &MleConfig::default()).is_err());
    }
}
