//! Entanglement measures: logarithmic negativity for any two-mode state,
//! Schmidt spectra and the entropy of entanglement for pure states, and the
//! closed-form Schmidt machinery for the zero-, one- and two-photon subtracted
//! half-split squeezed vacua.
//!
//! All quantities default to base 2 (ebits); [`LogBase::E`] switches to nats.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fock::{partial_trace, DensityMatrix, Mode, TwoModeFockState};
use crate::{Error, Result};

/// Eigenvalues of `ρ^{T_A}` above this are treated as numerical zeros.
pub const NEGATIVITY_NOISE_FLOOR: f64 = 1e-10;
const ENTROPY_FLOOR: f64 = 1e-15;
const PURITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Two,
    E,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }
}

/// Schmidt coefficients in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    pub coefficients: Vec<f64>,
    pub dim: usize,
}

impl SchmidtSpectrum {
    fn from_unsorted(mut coefficients: Vec<f64>, dim: usize) -> Self {
        coefficients.sort_by(|a, b| b.total_cmp(a));
        SchmidtSpectrum { coefficients, dim }
    }

    pub fn total(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// `(Σ √c_n)²`, the trace norm of the partial transpose of the pure state.
    pub fn negativity_trace_norm(&self) -> f64 {
        let s: f64 = self.coefficients.iter().map(|c| c.max(0.0).sqrt()).sum();
        s * s
    }

    pub fn log_negativity(&self, base: LogBase) -> f64 {
        base.log(self.negativity_trace_norm()).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Eigenvalues of the partially transposed density matrix.
    PartialTranspose,
    /// Singular values of a pure-state coefficient matrix.
    Schmidt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub log_negativity: f64,
    /// Entropy of entanglement; only defined for pure states.
    pub entropy: Option<f64>,
    pub method: Method,
    pub base: LogBase,
}

/// `E_N = log(1 + 2 |Σ negative eigenvalues of ρ^{T_A}|)`.
pub fn log_negativity(rho: &DensityMatrix, base: LogBase) -> Result<f64> {
    rho.ensure_hermitian()?;
    let pt = rho.with_elements(rho.partial_transpose_a()?);
    let neg: f64 = pt
        .eigenvalues()
        .into_iter()
        .filter(|&l| l < -NEGATIVITY_NOISE_FLOOR)
        .sum();
    Ok(base.log(1.0 + 2.0 * neg.abs()))
}

/// Schmidt coefficients of a pure two-mode state (normalized to sum 1).
pub fn schmidt(state: &TwoModeFockState) -> SchmidtSpectrum {
    let sv = state.coeffs().clone().singular_values();
    let total: f64 = sv.iter().map(|s| s * s).sum();
    SchmidtSpectrum::from_unsorted(sv.iter().map(|s| s * s / total).collect(), state.dim())
}

/// `E = −Σ c_n log c_n`; coefficients below 1e−15 contribute nothing.
pub fn entropy_of_entanglement(spectrum: &SchmidtSpectrum, base: LogBase) -> f64 {
    spectrum
        .coefficients
        .iter()
        .filter(|&&c| c >= ENTROPY_FLOOR)
        .map(|&c| -c * base.log(c))
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of entanglement of a two-mode density matrix, refused for mixed
/// states where it is not an entanglement measure.
pub fn entropy_of_state(rho: &DensityMatrix, base: LogBase) -> Result<f64> {
    rho.require_modes(2)?;
    let purity = rho.purity() / (rho.trace() * rho.trace());
    if purity < 1.0 - PURITY_TOL {
        return Err(Error::MixedState { purity });
    }
    let reduced = partial_trace(&rho.normalized()?, Mode::A)?;
    let spectrum = SchmidtSpectrum::from_unsorted(
        reduced
            .eigenvalues()
            .into_iter()
            .map(|l| l.max(0.0))
            .collect(),
        rho.dim(),
    );
    Ok(entropy_of_entanglement(&spectrum, base))
}

/// Negativity of any two-mode state plus the entropy when the state is pure.
pub fn entanglement_report(rho: &DensityMatrix, base: LogBase) -> Result<EntanglementReport> {
    let log_negativity = log_negativity(rho, base)?;
    let entropy = match entropy_of_state(rho, base) {
        Ok(e) => Some(e),
        Err(Error::MixedState { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(EntanglementReport {
        log_negativity,
        entropy,
        method: Method::PartialTranspose,
        base,
    })
}

/// Report for a pure state, via its Schmidt spectrum.
pub fn pure_state_report(state: &TwoModeFockState, base: LogBase) -> EntanglementReport {
    let spectrum = schmidt(state);
    EntanglementReport {
        log_negativity: spectrum.log_negativity(base),
        entropy: Some(entropy_of_entanglement(&spectrum, base)),
        method: Method::Schmidt,
        base,
    }
}

/// Which subtracted state an analytic spectrum describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubtractedKind {
    /// `|Ψ₀>`, the half-split squeezed vacuum.
    Zero,
    /// `|Ψ₁> ∝ a_A |Ψ₀>`.
    One,
    /// `|Ψ₂> ∝ a_A a_B |Ψ₀>`.
    Two,
}

impl SubtractedKind {
    pub fn photons(self) -> usize {
        match self {
            SubtractedKind::Zero => 0,
            SubtractedKind::One => 1,
            SubtractedKind::Two => 2,
        }
    }

    pub fn from_photons(n: usize) -> Result<Self> {
        match n {
            0 => Ok(SubtractedKind::Zero),
            1 => Ok(SubtractedKind::One),
            2 => Ok(SubtractedKind::Two),
            _ => Err(Error::InvalidParameter(format!(
                "{n}-photon subtraction is not supported"
            ))),
        }
    }
}

/// `‖a_A |Ψ₀>‖² = sinh²(r)/2`.
pub fn herald_norm_one(r: f64) -> f64 {
    r.sinh().powi(2) / 2.0
}

/// `‖a_A a_B |Ψ₀>‖² = (2 sinh⁴ r + cosh² r sinh² r)/4`.
pub fn herald_norm_two(r: f64) -> f64 {
    let (s, c) = (r.sinh(), r.cosh());
    (2.0 * s.powi(4) + c * c * s * s) / 4.0
}

/// Local-squeezed single-subtracted coefficient matrix
/// `A_mn = λ'^n (cosh(r/2) √n δ_{m,n−1} + sinh(r/2) √(n+1) δ_{m,n+1})`.
pub fn single_subtraction_matrix(r: f64, dim: usize) -> DMatrix<f64> {
    let lp = (r / 2.0).tanh();
    let (ch, sh) = ((r / 2.0).cosh(), (r / 2.0).sinh());
    let mut a = DMatrix::zeros(dim + 1, dim);
    for n in 0..dim {
        let w = lp.powi(n as i32);
        if n >= 1 {
            a[(n - 1, n)] += w * ch * (n as f64).sqrt();
        }
        a[(n + 1, n)] += w * sh * ((n + 1) as f64).sqrt();
    }
    a
}

/// Local-squeezed two-photon-subtracted coefficient matrix `B_mn` (four
/// diagonal bands: `n = m` twice, `n = m + 2`, `n = m − 2`).
pub fn two_subtraction_matrix(r: f64, dim: usize) -> DMatrix<f64> {
    let lp = (r / 2.0).tanh();
    let (ch, sh) = ((r / 2.0).cosh(), (r / 2.0).sinh());
    let rows = dim + 2;
    let mut b = DMatrix::zeros(rows, dim);
    for m in 0..rows {
        let mf = m as f64;
        if m < dim {
            b[(m, m)] += ch * ch * (mf + 1.0) * lp.powi(m as i32 + 1);
            if m >= 1 {
                b[(m, m)] += sh * sh * mf * lp.powi(m as i32 - 1);
            }
        }
        if m + 2 < dim {
            b[(m, m + 2)] += ch * sh * ((mf + 1.0) * (mf + 2.0)).sqrt() * lp.powi(m as i32 + 1);
        }
        if m >= 2 && m - 2 < dim {
            b[(m, m - 2)] += ch * sh * (mf * (mf - 1.0)).sqrt() * lp.powi(m as i32 - 1);
        }
    }
    b
}

/// Schmidt spectrum of `|Ψ_k>` from the closed-form coefficient matrices.
///
/// `c⁽⁰⁾_n = (1 − λ'²) λ'^{2n}`, `c⁽¹⁾_n = (1 − λ'²) α_n² / N₁` and
/// `c⁽²⁾_n = (1 − λ'²) β_n² / N₂`, with `α_n`, `β_n` the singular values of
/// `A_mn`, `B_mn` and `λ' = tanh(r/2)`.
pub fn analytic_schmidt(kind: SubtractedKind, r: f64, dim: usize) -> Result<SchmidtSpectrum> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dimension {dim} < 2")));
    }
    if kind != SubtractedKind::Zero && !(r > 0.0) {
        return Err(Error::InvalidParameter(
            "subtracted states need r > 0".into(),
        ));
    }
    let lp = (r / 2.0).tanh();
    let g = 1.0 - lp * lp;
    let coefficients: Vec<f64> = match kind {
        SubtractedKind::Zero => (0..dim).map(|n| g * lp.powi(2 * n as i32)).collect(),
        SubtractedKind::One => {
            let nrm = herald_norm_one(r);
            single_subtraction_matrix(r, dim)
                .singular_values()
                .iter()
                .map(|a| g * a * a / nrm)
                .collect()
        }
        SubtractedKind::Two => {
            let nrm = herald_norm_two(r);
            two_subtraction_matrix(r, dim)
                .singular_values()
                .iter()
                .map(|b| g * b * b / nrm)
                .collect()
        }
    };
    let spectrum = SchmidtSpectrum::from_unsorted(coefficients, dim);
    let total = spectrum.total();
    if total < 1.0 - 1e-6 {
        return Err(Error::TruncationInsufficient {
            dim,
            tail: 1.0 - total,
            tol: 1e-6,
        });
    }
    Ok(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::TwoModeFockState;
    use crate::C64;

    fn bell() -> TwoModeFockState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut c = DMatrix::zeros(3, 3);
        c[(0, 1)] = C64::new(h, 0.0);
        c[(1, 0)] = C64::new(h, 0.0);
        TwoModeFockState::from_coeffs(c).unwrap()
    }

    #[test]
    fn product_state_has_no_entanglement() {
        let rho = DensityMatrix::vacuum(4, 2).unwrap();
        assert!(log_negativity(&rho, LogBase::Two).unwrap().abs() < 1e-12);
        let s = schmidt(&TwoModeFockState::vacuum(4).unwrap());
        assert!((s.coefficients[0] - 1.0).abs() < 1e-15);
        assert_eq!(entropy_of_entanglement(&s, LogBase::Two), 0.0);
    }

    #[test]
    fn bell_state_is_one_ebit() {
        let b = bell();
        assert!((log_negativity(&b.to_density(), LogBase::Two).unwrap() - 1.0).abs() < 1e-12);
        let s = schmidt(&b);
        assert!((entropy_of_entanglement(&s, LogBase::Two) - 1.0).abs() < 1e-12);
        assert!((entropy_of_entanglement(&s, LogBase::E) - 2f64.ln()).abs() < 1e-12);
        let report = entanglement_report(&b.to_density(), LogBase::Two).unwrap();
        assert!((report.entropy.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_half_spectrum_entropy() {
        let s = SchmidtSpectrum {
            coefficients: vec![0.5, 0.5],
            dim: 2,
        };
        assert!((entropy_of_entanglement(&s, LogBase::Two) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_state_entropy_refused() {
        let mut e = DMatrix::zeros(4, 4);
        e[(0, 0)] = C64::new(0.5, 0.0);
        e[(3, 3)] = C64::new(0.5, 0.0);
        let rho = DensityMatrix::new(e, 2, 2).unwrap();
        assert!(matches!(
            entropy_of_state(&rho, LogBase::Two),
            Err(Error::MixedState { .. })
        ));
        assert!(entanglement_report(&rho, LogBase::Two)
            .unwrap()
            .entropy
            .is_none());
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut e = DMatrix::zeros(4, 4);
        e[(0, 0)] = C64::new(1.0, 0.0);
        e[(0, 1)] = C64::new(0.3, 0.0);
        let rho = DensityMatrix::new(e, 2, 2).unwrap();
        assert!(matches!(
            log_negativity(&rho, LogBase::Two),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn analytic_spectra_are_normalized() {
        for kind in [SubtractedKind::One, SubtractedKind::Two] {
            for r in [0.2, 0.5, 0.9] {
                let s = analytic_schmidt(kind, r, 60).unwrap();
                assert!((s.total() - 1.0).abs() < 1e-10, "{kind:?} {r}");
            }
        }
    }

    #[test]
    fn kind_zero_is_geometric() {
        let r = 0.7;
        let s = analytic_schmidt(SubtractedKind::Zero, r, 40).unwrap();
        let lp2 = (r / 2.0).tanh().powi(2);
        for w in s.coefficients.windows(2).take(10) {
            assert!((w[1] / w[0] - lp2).abs() < 1e-12);
        }
    }

    #[test]
    fn herald_norms_match_moments() {
        // <n> and <n(n−1)>/4 of the squeezed vacuum
        let r: f64 = 0.6;
        let s2 = r.sinh().powi(2);
        assert!((herald_norm_one(r) - s2 / 2.0).abs() < 1e-15);
        let nn = 2.0 * s2 * r.cosh().powi(2) + s2 * s2 - s2;
        assert!((herald_norm_two(r) - nn / 4.0).abs() < 1e-14);
    }

    #[test]
    fn analytic_truncation_audited() {
        assert!(matches!(
            analytic_schmidt(SubtractedKind::Zero, 3.0, 4),
            Err(Error::TruncationInsufficient { .. })
        ));
        assert!(analytic_schmidt(SubtractedKind::One, 0.0, 10).is_err());
    }
}
