use nalgebra::{DMatrix, DVector};

use super::{FockVector, Mode, TwoModeFockState};
use crate::{Error, Result, C64};

const HERMITIAN_TOL: f64 = 1e-10;

/// Mixed single- or two-mode state. Two-mode matrices are `D² × D²` with
/// row-major `A ⊗ B` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: DMatrix<C64>,
    dim: usize,
    modes: usize,
}

impl DensityMatrix {
    pub fn new(elements: DMatrix<C64>, dim: usize, modes: usize) -> Result<Self> {
        if !(1..=2).contains(&modes) || dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "unsupported shape: dim {dim}, modes {modes}"
            )));
        }
        let n = dim.pow(modes as u32);
        if elements.nrows() != n || elements.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: elements.nrows(),
            });
        }
        Ok(DensityMatrix {
            elements,
            dim,
            modes,
        })
    }

    pub fn from_pure(v: &FockVector) -> Self {
        let a = v.amplitudes();
        DensityMatrix {
            elements: a * a.adjoint(),
            dim: v.dim(),
            modes: 1,
        }
    }

    pub fn from_two_mode(s: &TwoModeFockState) -> Self {
        let flat = DVector::from_vec(s.to_flat());
        DensityMatrix {
            elements: &flat * flat.adjoint(),
            dim: s.dim(),
            modes: 2,
        }
    }

    /// Diagonal single-mode state from photon-number probabilities.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let d = probs.len();
        let mut e = DMatrix::zeros(d, d);
        for (n, &p) in probs.iter().enumerate() {
            e[(n, n)] = C64::new(p, 0.0);
        }
        Self::new(e, d, 1)
    }

    pub fn vacuum(dim: usize, modes: usize) -> Result<Self> {
        let n = dim.pow(modes as u32);
        let mut e = DMatrix::zeros(n, n);
        e[(0, 0)] = C64::new(1.0, 0.0);
        Self::new(e, dim, modes)
    }

    /// Single-mode state embedded in a larger cutoff with zero padding.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        self.require_modes(1)?;
        if dim < self.dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        let mut e = DMatrix::zeros(dim, dim);
        e.view_mut((0, 0), (self.dim, self.dim))
            .copy_from(&self.elements);
        Self::new(e, dim, 1)
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn into_elements(self) -> DMatrix<C64> {
        self.elements
    }

    /// Single-mode cutoff.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Side length of the matrix (`dim^modes`).
    pub fn size(&self) -> usize {
        self.elements.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.elements.norm_squared()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let e = &self.elements;
        let n = e.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((e[(i, j)] - e[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .hermitian_part()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub(crate) fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.elements + self.elements.adjoint()).scale(0.5)
    }

    /// Checks Hermiticity, positivity (eigenvalues ≥ −1e−9) and unit trace.
    pub fn check_physical(&self) -> Result<()> {
        self.ensure_hermitian()?;
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -1e-9 {
            return Err(Error::InvalidParameter(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        if (self.trace() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "trace {} != 1",
                self.trace()
            )));
        }
        Ok(())
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(DensityMatrix {
            elements: self.elements.unscale(t),
            dim: self.dim,
            modes: self.modes,
        })
    }

    /// Photon-number populations (single-mode) or joint populations flattened
    /// row-major (two-mode).
    pub fn populations(&self) -> Vec<f64> {
        self.elements.diagonal().iter().map(|c| c.re).collect()
    }

    /// Partial transpose with respect to mode A (two-mode only).
    pub fn partial_transpose_a(&self) -> Result<DMatrix<C64>> {
        self.require_modes(2)?;
        let d = self.dim;
        let e = &self.elements;
        Ok(DMatrix::from_fn(d * d, d * d, |i, j| {
            let (m, n) = (i / d, i % d);
            let (mp, np) = (j / d, j % d);
            e[(mp * d + n, m * d + np)]
        }))
    }

    pub fn swap_modes(&self) -> Result<Self> {
        self.require_modes(2)?;
        let d = self.dim;
        let e = &self.elements;
        let swap = |i: usize| (i % d) * d + i / d;
        let elements = DMatrix::from_fn(d * d, d * d, |i, j| e[(swap(i), swap(j))]);
        Ok(DensityMatrix {
            elements,
            dim: d,
            modes: 2,
        })
    }

    /// Expectation value of a matrix operator on the full space.
    pub fn expectation(&self, op: &DMatrix<C64>) -> C64 {
        (&self.elements * op).trace()
    }

    pub(crate) fn require_modes(&self, modes: usize) -> Result<()> {
        if self.modes != modes {
            return Err(Error::DimensionMismatch {
                expected: modes,
                found: self.modes,
            });
        }
        Ok(())
    }

    pub(crate) fn with_elements(&self, elements: DMatrix<C64>) -> Self {
        DensityMatrix {
            elements,
            dim: self.dim,
            modes: self.modes,
        }
    }
}

/// Reduced state of `keep` after tracing out the other mode.
pub fn partial_trace(rho: &DensityMatrix, keep: Mode) -> Result<DensityMatrix> {
    rho.require_modes(2)?;
    let d = rho.dim();
    let e = rho.elements();
    let elements = DMatrix::from_fn(d, d, |i, j| match keep {
        Mode::A => (0..d).map(|k| e[(i * d + k, j * d + k)]).sum(),
        Mode::B => (0..d).map(|k| e[(k * d + i, k * d + j)]).sum(),
    });
    DensityMatrix::new(elements, d, 1)
}

/// `ρ_A ⊗ ρ_B` for two single-mode states of equal cutoff.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    a.require_modes(1)?;
    b.require_modes(1)?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    DensityMatrix::new(a.elements().kronecker(b.elements()), a.dim(), 2)
}

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let sq = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&sq) * v.adjoint()
}

/// `<ψ|ρ|ψ>`, the fidelity between a mixed state and a pure two-mode state.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &TwoModeFockState) -> Result<f64> {
    rho.require_modes(2)?;
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: psi.dim(),
        });
    }
    let v = DVector::from_vec(psi.to_flat());
    Ok(v.dotc(&(rho.elements() * &v)).re)
}

/// Uhlmann fidelity `F(ρ, σ) = (tr √(√ρ σ √ρ))²`, evaluated as the squared
/// trace norm of `√σ √ρ`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.size() != sigma.size() || rho.modes() != sigma.modes() {
        return Err(Error::DimensionMismatch {
            expected: rho.size(),
            found: sigma.size(),
        });
    }
    let a = psd_sqrt(&rho.hermitian_part());
    let b = psd_sqrt(&sigma.hermitian_part());
    let tn: f64 = (b * a).singular_values().iter().sum();
    Ok(tn * tn)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_trace_of_product_vacuum() {
        let rho = DensityMatrix::vacuum(4, 2).unwrap();
        let red = partial_trace(&rho, Mode::A).unwrap();
        assert_eq!(red, DensityMatrix::vacuum(4, 1).unwrap());
    }

    #[test]
    fn partial_trace_picks_the_right_mode() {
        let s = TwoModeFockState::number(1, 2, 3).unwrap().to_density();
        let a = partial_trace(&s, Mode::A).unwrap();
        let b = partial_trace(&s, Mode::B).unwrap();
        assert_eq!(a.populations(), vec![0.0, 1.0, 0.0]);
        assert_eq!(b.populations(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn fidelity_basics() {
        let v0 = FockVector::vacuum(5).unwrap().to_density();
        let v1 = FockVector::number(1, 5).unwrap().to_density();
        assert!((fidelity(&v0, &v0).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&v0, &v1).unwrap().abs() < 1e-12);
        let mix = DensityMatrix::diagonal(&[0.5, 0.5, 0.0, 0.0, 0.0]).unwrap();
        assert!((fidelity(&v0, &mix).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&mix, &mix).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_dimension_mismatch() {
        let a = DensityMatrix::vacuum(3, 1).unwrap();
        let b = DensityMatrix::vacuum(4, 1).unwrap();
        assert!(matches!(
            tensor(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_transpose_is_involution() {
        let s = TwoModeFockState::from_flat(
            2,
            &[
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.5),
                C64::new(0.5, 0.0),
                C64::new(-0.5, 0.0),
            ],
        )
        .unwrap()
        .to_density();
        let pt = s.partial_transpose_a().unwrap();
        let back = s.with_elements(pt).partial_transpose_a().unwrap();
        assert!((back - s.elements()).norm() < 1e-15);
    }
}
