use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{DensityMatrix, Mode};
use crate::{Error, Result, C64};

const NORM_TOL: f64 = 1e-10;

/// Pure single-mode state in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: DVector<C64>,
}

impl FockVector {
    pub fn new(amps: DVector<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension {} < 2",
                amps.len()
            )));
        }
        Ok(FockVector { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(DVector::from_iterator(
            amps.len(),
            amps.iter().map(|&a| C64::new(a, 0.0)),
        ))
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::number(0, dim)
    }

    pub fn number(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParameter(format!(
                "|{n}> outside dimension {dim}"
            )));
        }
        let mut amps = DVector::zeros(dim);
        amps[n] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amps[n]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(FockVector {
            amps: self.amps.unscale(n),
        })
    }

    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Applies the single-mode annihilation operator (unnormalized).
    pub fn annihilate(&self) -> FockVector {
        let d = self.dim();
        let amps = DVector::from_fn(d, |n, _| {
            if n + 1 < d {
                self.amps[n + 1] * ((n + 1) as f64).sqrt()
            } else {
                C64::new(0.0, 0.0)
            }
        });
        FockVector { amps }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Pure two-mode state; `coeffs[(m, n)]` is the amplitude of `|m>_A |n>_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFockState {
    coeffs: DMatrix<C64>,
}

impl TwoModeFockState {
    pub fn from_coeffs(coeffs: DMatrix<C64>) -> Result<Self> {
        if coeffs.nrows() != coeffs.ncols() {
            return Err(Error::DimensionMismatch {
                expected: coeffs.nrows(),
                found: coeffs.ncols(),
            });
        }
        if coeffs.nrows() < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension {} < 2",
                coeffs.nrows()
            )));
        }
        Ok(TwoModeFockState { coeffs })
    }

    /// Builds a state from a row-major flat amplitude vector of length `dim²`.
    pub fn from_flat(dim: usize, flat: &[C64]) -> Result<Self> {
        if flat.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: flat.len(),
            });
        }
        Self::from_coeffs(DMatrix::from_row_slice(dim, dim, flat))
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::number(0, 0, dim)
    }

    pub fn number(m: usize, n: usize, dim: usize) -> Result<Self> {
        if m >= dim || n >= dim {
            return Err(Error::InvalidParameter(format!(
                "|{m},{n}> outside dimension {dim}"
            )));
        }
        let mut coeffs = DMatrix::zeros(dim, dim);
        coeffs[(m, n)] = C64::new(1.0, 0.0);
        Self::from_coeffs(coeffs)
    }

    pub fn product(a: &FockVector, b: &FockVector) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Self::from_coeffs(a.amplitudes() * b.amplitudes().transpose())
    }

    /// Two-mode squeezed vacuum `√(1 − λ'²) Σ λ'^n |n, n>`, `λ' = tanh s`,
    /// truncated and renormalized.
    pub fn two_mode_squeezed(s: f64, dim: usize) -> Result<Self> {
        let lp = s.tanh();
        let mut c = DMatrix::<C64>::zeros(dim, dim);
        for n in 0..dim {
            c[(n, n)] = C64::new((1.0 - lp * lp).sqrt() * lp.powi(n as i32), 0.0);
        }
        Self::from_coeffs(c)?.normalized()
    }

    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize, n: usize) -> C64 {
        self.coeffs[(m, n)]
    }

    /// Row-major flattening (`m * D + n`).
    pub fn to_flat(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for m in 0..d {
            for n in 0..d {
                out.push(self.coeffs[(m, n)]);
            }
        }
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(TwoModeFockState {
            coeffs: self.coeffs.unscale(n),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TwoModeFockState {
            coeffs: self.coeffs.scale(factor),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &TwoModeFockState) -> C64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|²` for normalized inputs.
    pub fn fidelity(&self, other: &TwoModeFockState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn swap_modes(&self) -> Self {
        TwoModeFockState {
            coeffs: self.coeffs.transpose(),
        }
    }

    /// Probability of finding `(m, n)` photons in modes `(A, B)`.
    pub fn photon_distribution(&self) -> DMatrix<f64> {
        self.coeffs.map(|c| c.norm_sqr())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_two_mode(self)
    }

    /// Applies the annihilation operator of `mode` (unnormalized).
    pub fn annihilate(&self, mode: Mode) -> Self {
        let d = self.dim();
        let c = &self.coeffs;
        let coeffs = DMatrix::from_fn(d, d, |m, n| match mode {
            Mode::A if m + 1 < d => c[(m + 1, n)] * ((m + 1) as f64).sqrt(),
            Mode::B if n + 1 < d => c[(m, n + 1)] * ((n + 1) as f64).sqrt(),
            _ => C64::new(0.0, 0.0),
        });
        TwoModeFockState { coeffs }
    }
}

/// Serialized form of a state: `{dim, modes, re[], im[]}` in row-major order.
///
/// A pure state carries `dim^modes` entries; a density matrix carries
/// `dim^(2 modes)` entries (row-major over the flattened `A ⊗ B` index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub dim: usize,
    pub modes: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl StateJson {
    fn from_entries(dim: usize, modes: usize, entries: impl Iterator<Item = C64>) -> Self {
        let (re, im) = entries.map(|c| (c.re, c.im)).unzip();
        StateJson { dim, modes, re, im }
    }

    fn entries(&self, expected: usize) -> Result<Vec<C64>> {
        if self.re.len() != expected || self.im.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.re.len().min(self.im.len()),
            });
        }
        Ok(self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl From<&FockVector> for StateJson {
    fn from(v: &FockVector) -> Self {
        StateJson::from_entries(v.dim(), 1, v.amplitudes().iter().copied())
    }
}

impl From<&TwoModeFockState> for StateJson {
    fn from(s: &TwoModeFockState) -> Self {
        StateJson::from_entries(s.dim(), 2, s.to_flat().into_iter())
    }
}

impl From<&DensityMatrix> for StateJson {
    fn from(rho: &DensityMatrix) -> Self {
        let e = rho.elements();
        let n = e.nrows();
        StateJson::from_entries(
            rho.dim(),
            rho.modes(),
            (0..n * n).map(|k| e[(k / n, k % n)]),
        )
    }
}

impl TryFrom<&StateJson> for FockVector {
    type Error = Error;

    fn try_from(j: &StateJson) -> Result<Self> {
        if j.modes != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: j.modes,
            });
        }
        FockVector::new(DVector::from_vec(j.entries(j.dim)?))
    }
}

impl TryFrom<&StateJson> for TwoModeFockState {
    type Error = Error;

    fn try_from(j: &StateJson) -> Result<Self> {
        if j.modes != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: j.modes,
            });
        }
        TwoModeFockState::from_flat(j.dim, &j.entries(j.dim * j.dim)?)
    }
}

impl TryFrom<&StateJson> for DensityMatrix {
    type Error = Error;

    fn try_from(j: &StateJson) -> Result<Self> {
        let n = j.dim.pow(j.modes as u32);
        let entries = j.entries(n * n)?;
        DensityMatrix::new(DMatrix::from_row_slice(n, n, &entries), j.dim, j.modes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annihilation_ladder() {
        let s = TwoModeFockState::number(2, 0, 4).unwrap();
        let out = s.annihilate(Mode::A);
        assert!((out.coeff(1, 0).re - 2f64.sqrt()).abs() < 1e-15);
        assert!((out.norm_sqr() - 2.0).abs() < 1e-14);
        let vac = TwoModeFockState::vacuum(4).unwrap().annihilate(Mode::A);
        assert_eq!(vac.norm_sqr(), 0.0);
        assert!(matches!(vac.normalized(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn json_round_trip() {
        let v = FockVector::from_real(&[0.6, 0.0, -0.8]).unwrap();
        let j = StateJson::from(&v);
        let back =
            FockVector::try_from(&StateJson::from_json(&j.to_json().unwrap()).unwrap()).unwrap();
        assert_eq!(back, v);

        let s = TwoModeFockState::number(1, 2, 3).unwrap();
        let j = StateJson::from(&s);
        assert_eq!(j.re[1 * 3 + 2], 1.0);
        assert_eq!(TwoModeFockState::try_from(&j).unwrap(), s);
        assert!(FockVector::try_from(&j).is_err());
    }

    #[test]
    fn rejects_tiny_dimension() {
        assert!(FockVector::from_real(&[1.0]).is_err());
    }
}
