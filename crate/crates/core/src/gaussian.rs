//! Second-moment (covariance-matrix) description of two-mode states.
//!
//! Ordering is `(x_A, p_A, x_B, p_B)` and entries are symmetrized central
//! moments `<{ΔO_i, ΔO_j}>/2`, so the vacuum is `I/2`.

use nalgebra::Matrix4;

use crate::entanglement::LogBase;
use crate::fock::{DensityMatrix, TwoModeFockState};
use crate::{Error, Result, C64};

const DISPLACEMENT_TOL: f64 = 1e-8;

fn omega() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix2M(pub Matrix4<f64>);

impl CovarianceMatrix2M {
    pub fn vacuum() -> Self {
        CovarianceMatrix2M(Matrix4::identity() * 0.5)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Symplectic eigenvalues `(ν_-, ν_+)`; both equal 1/2 for pure states.
    ///
    /// Computed as the positive eigenvalues of the Hermitian matrix
    /// `V^{1/2} (iΩ) V^{1/2}`, which share the spectrum `±ν_k` of `iΩV`.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let eig = self.0.symmetric_eigen();
        let sqrt_v = eig.eigenvectors
            * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let h = sqrt_v.map(|x| C64::new(x, 0.0))
            * omega().map(|x| C64::new(0.0, x))
            * sqrt_v.map(|x| C64::new(x, 0.0));
        let mut nu: Vec<f64> = h.symmetric_eigenvalues().iter().map(|x| x.abs()).collect();
        nu.sort_by(f64::total_cmp);
        (nu[0].min(nu[1]), nu[2].max(nu[3]))
    }

    /// Covariance matrix of the partial transpose (`p_B → −p_B`).
    pub fn partial_transpose(&self) -> Self {
        let flip = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
        CovarianceMatrix2M(flip * self.0 * flip)
    }

    /// Logarithmic negativity from the smallest symplectic eigenvalue of the
    /// partially transposed covariance matrix. Exact for Gaussian states only.
    pub fn gaussian_log_negativity(&self, base: LogBase) -> f64 {
        let (nu, _) = self.partial_transpose().symplectic_eigenvalues();
        if nu >= 0.5 {
            0.0
        } else {
            base.log(1.0 / (2.0 * nu))
        }
    }

    /// Smallest eigenvalue of `V + iΩ/2`; nonnegative for physical states.
    pub fn uncertainty_margin(&self) -> f64 {
        let m = self.0.map(|x| C64::new(x, 0.0)) + omega().map(|x| C64::new(0.0, x / 2.0));
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_physical(&self) -> bool {
        (self.0 - self.0.transpose()).abs().max() < 1e-10 && self.uncertainty_margin() > -1e-8
    }

    /// `Var(x_−)` with `x_− = (x_A − x_B)/√2`.
    pub fn var_x_minus(&self) -> f64 {
        (self.0[(0, 0)] + self.0[(2, 2)] - 2.0 * self.0[(0, 2)]) / 2.0
    }

    /// `Var(p_+)` with `p_+ = (p_A + p_B)/√2`.
    pub fn var_p_plus(&self) -> f64 {
        (self.0[(1, 1)] + self.0[(3, 3)] + 2.0 * self.0[(1, 3)]) / 2.0
    }

    /// Four comma-separated rows at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..4 {
            let row: Vec<String> = (0..4).map(|j| format!("{:.16e}", self.0[(i, j)])).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != 4 {
            return Err(Error::Parse(format!(
                "expected 4 rows, found {}",
                rows.len()
            )));
        }
        let mut m = Matrix4::zeros();
        for (i, row) in rows.iter().enumerate() {
            let vals: Vec<&str> = row.split(',').collect();
            if vals.len() != 4 {
                return Err(Error::Parse(format!(
                    "row {i}: expected 4 columns, found {}",
                    vals.len()
                )));
            }
            for (j, v) in vals.iter().enumerate() {
                m[(i, j)] = v
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("row {i}: {e}")))?;
            }
        }
        Ok(CovarianceMatrix2M(m))
    }
}

/// Matrix elements `<m, n|ρ|m', n'>` of a two-mode state with cutoff `dim`.
struct Moments<F: Fn(usize, usize, usize, usize) -> C64> {
    dim: usize,
    elem: F,
}

impl<F: Fn(usize, usize, usize, usize) -> C64> Moments<F> {
    /// `tr(ρ O)` for a ladder monomial `O|m, n> = c(m, n) |m', n'>`, given as
    /// a map returning `(m', n', c)`, or `None` when `O|m, n> = 0`.
    fn ladder(&self, op: impl Fn(usize, usize) -> Option<(usize, usize, f64)>) -> C64 {
        let d = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..d {
            for n in 0..d {
                if let Some((mp, np, c)) = op(m, n) {
                    if mp < d && np < d {
                        acc += (self.elem)(m, n, mp, np) * c;
                    }
                }
            }
        }
        acc
    }

    /// Normal-ordered moments of one mode, `(<a>, <a²>, <a†a>)`.
    fn mode(&self, first: bool) -> (C64, C64, f64) {
        let pick = |m: usize, n: usize| if first { m } else { n };
        let lower = |k: usize| {
            move |m: usize, n: usize| {
                let q = if first { m } else { n };
                if q < k {
                    return None;
                }
                let c: f64 = (0..k).map(|i| sqrt_f(q - i)).product();
                Some(if first { (m - k, n, c) } else { (m, n - k, c) })
            }
        };
        let a = self.ladder(lower(1));
        let a2 = self.ladder(lower(2));
        let num = self.ladder(|m, n| Some((m, n, pick(m, n) as f64))).re;
        (a, a2, num)
    }

    fn covariance(&self) -> Result<CovarianceMatrix2M> {
        let tr = self.ladder(|m, n| Some((m, n, 1.0))).re;
        let (a_a, a2_a, n_a) = self.mode(true);
        let (a_b, a2_b, n_b) = self.mode(false);
        let max_mean = [a_a.norm(), a_b.norm()].into_iter().fold(0.0, f64::max) / tr;
        if max_mean > DISPLACEMENT_TOL {
            return Err(Error::Displaced { max_mean });
        }
        // <a_A a_B> and <a_A† a_B>
        let ab =
            self.ladder(|m, n| (m > 0 && n > 0).then(|| (m - 1, n - 1, sqrt_f(m) * sqrt_f(n))));
        let adag_b = self.ladder(|m, n| (n > 0).then(|| (m + 1, n - 1, sqrt_f(m + 1) * sqrt_f(n))));
        let (a2_a, a2_b, ab, adag_b) = (a2_a / tr, a2_b / tr, ab / tr, adag_b / tr);
        let (n_a, n_b) = (n_a / tr, n_b / tr);

        let xx = |a2: C64, n: f64| (2.0 * a2.re + 2.0 * n + 1.0) / 2.0;
        let pp = |a2: C64, n: f64| (-2.0 * a2.re + 2.0 * n + 1.0) / 2.0;
        let xp = |a2: C64| a2.im;

        let mut v = Matrix4::zeros();
        v[(0, 0)] = xx(a2_a, n_a);
        v[(1, 1)] = pp(a2_a, n_a);
        v[(0, 1)] = xp(a2_a);
        v[(2, 2)] = xx(a2_b, n_b);
        v[(3, 3)] = pp(a2_b, n_b);
        v[(2, 3)] = xp(a2_b);
        v[(0, 2)] = ab.re + adag_b.re; // x_A x_B
        v[(0, 3)] = ab.im + adag_b.im; // x_A p_B
        v[(1, 2)] = ab.im - adag_b.im; // p_A x_B
        v[(1, 3)] = -ab.re + adag_b.re; // p_A p_B
        for i in 0..4 {
            for j in 0..i {
                v[(i, j)] = v[(j, i)];
            }
        }
        Ok(CovarianceMatrix2M(v))
    }
}

fn sqrt_f(n: usize) -> f64 {
    (n as f64).sqrt()
}

/// Covariance matrix of a zero-mean two-mode state, from exact normal-ordered
/// moments of the truncated density matrix.
pub fn covariance_of(rho: &DensityMatrix) -> Result<CovarianceMatrix2M> {
    rho.require_modes(2)?;
    let (d, e) = (rho.dim(), rho.elements());
    Moments {
        dim: d,
        elem: |m: usize, n: usize, mp: usize, np: usize| e[(m * d + n, mp * d + np)],
    }
    .covariance()
}

/// [`covariance_of`] for a pure state, without forming the density matrix.
pub fn covariance_of_pure(state: &TwoModeFockState) -> Result<CovarianceMatrix2M> {
    let c = state.coeffs();
    Moments {
        dim: state.dim(),
        elem: |m: usize, n: usize, mp: usize, np: usize| c[(m, n)] * c[(mp, np)].conj(),
    }
    .covariance()
}

/// Covariance matrix of the half-split squeezed vacuum `B(π/4) S_A(r)|0,0>`.
pub fn hssv_covariance(r: f64) -> CovarianceMatrix2M {
    let (xd, pd) = ((-r).exp() * r.cosh() / 2.0, r.exp() * r.cosh() / 2.0);
    let (xo, po) = ((-r).exp() * r.sinh() / 2.0, -r.exp() * r.sinh() / 2.0);
    CovarianceMatrix2M(Matrix4::new(
        xd, 0.0, xo, 0.0, //
        0.0, pd, 0.0, po, //
        xo, 0.0, xd, 0.0, //
        0.0, po, 0.0, pd,
    ))
}

/// Covariance matrix of the two-mode squeezed vacuum `∝ Σ tanh(s)^n |n, n>`.
pub fn tmsv_covariance(s: f64) -> CovarianceMatrix2M {
    let (c, sh) = ((2.0 * s).cosh() / 2.0, (2.0 * s).sinh() / 2.0);
    CovarianceMatrix2M(Matrix4::new(
        c, 0.0, sh, 0.0, //
        0.0, c, 0.0, -sh, //
        sh, 0.0, c, 0.0, //
        0.0, -sh, 0.0, c,
    ))
}

/// Covariance after `S_A(r_a) S_B(r_b)`: `x → e^{−r} x`, `p → e^{r} p` per mode.
pub fn local_squeeze_cov(v: &CovarianceMatrix2M, r_a: f64, r_b: f64) -> CovarianceMatrix2M {
    let s = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        (-r_a).exp(),
        r_a.exp(),
        (-r_b).exp(),
        r_b.exp(),
    ));
    CovarianceMatrix2M(s * v.0 * s.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{
        apply_beamsplitter, squeezed_vacuum, FockVector, Truncation, TwoModeFockState,
    };
    use std::f64::consts::FRAC_PI_4;

    fn hssv(r: f64, d: usize) -> TwoModeFockState {
        let sv = squeezed_vacuum(r, Truncation::new(d)).unwrap();
        let s = TwoModeFockState::product(&sv, &FockVector::vacuum(d).unwrap()).unwrap();
        apply_beamsplitter(&s, FRAC_PI_4).unwrap().value
    }

    #[test]
    fn vacuum_covariance() {
        let rho = crate::fock::DensityMatrix::vacuum(6, 2).unwrap();
        let v = covariance_of(&rho).unwrap();
        assert!((v.0 - CovarianceMatrix2M::vacuum().0).abs().max() < 1e-15);
        assert!(
            (hssv_covariance(0.0).0 - CovarianceMatrix2M::vacuum().0)
                .abs()
                .max()
                < 1e-15
        );
    }

    #[test]
    fn hssv_fock_matches_closed_form() {
        let v = covariance_of(&hssv(0.4, 25).to_density()).unwrap();
        assert!((v.0 - hssv_covariance(0.4).0).abs().max() < 1e-8, "{}", v.0);
    }

    #[test]
    fn pure_route_matches_density_route() {
        let mut c = nalgebra::DMatrix::<C64>::zeros(4, 4);
        c[(0, 0)] = C64::new(1.0, 0.0);
        c[(2, 0)] = C64::new(0.0, 0.6);
        c[(1, 1)] = C64::new(0.5, -0.2);
        c[(0, 2)] = C64::new(-0.3, 0.1);
        let s = TwoModeFockState::from_coeffs(c)
            .unwrap()
            .normalized()
            .unwrap();
        let (a, b) = (
            covariance_of_pure(&s).unwrap(),
            covariance_of(&s.to_density()).unwrap(),
        );
        assert!((a.0 - b.0).abs().max() < 1e-14);
        assert!(a.get(0, 1).abs() > 0.1);
    }

    #[test]
    fn local_squeeze_maps_hssv_to_tmsv() {
        for r in [0.1, 0.4, 1.3] {
            let v = local_squeeze_cov(&hssv_covariance(r), -r / 2.0, -r / 2.0);
            assert!((v.0 - tmsv_covariance(r / 2.0).0).abs().max() < 1e-12);
        }
    }

    #[test]
    fn local_squeeze_composition() {
        let v = hssv_covariance(0.3);
        let once = local_squeeze_cov(&v, 0.5, -0.2);
        let twice = local_squeeze_cov(&local_squeeze_cov(&v, 0.2, -0.1), 0.3, -0.1);
        assert!((once.0 - twice.0).abs().max() < 1e-14);
        assert_eq!(local_squeeze_cov(&v, 0.0, 0.0), v);
    }

    #[test]
    fn hssv_is_pure() {
        for r in [0.0, 0.3, 1.0, 2.0] {
            let (a, b) = hssv_covariance(r).symplectic_eigenvalues();
            assert!(
                (a - 0.5).abs() < 1e-10 && (b - 0.5).abs() < 1e-10,
                "r={r}: {a} {b}"
            );
            assert!(hssv_covariance(r).is_physical());
        }
    }

    #[test]
    fn gaussian_negativity_of_tmsv() {
        let s = 0.35;
        let en = tmsv_covariance(s).gaussian_log_negativity(LogBase::Two);
        assert!((en - 2.0 * s * std::f64::consts::LOG2_E).abs() < 1e-12);
        assert_eq!(
            CovarianceMatrix2M::vacuum().gaussian_log_negativity(LogBase::Two),
            0.0
        );
    }

    #[test]
    fn unphysical_matrix_detected() {
        let v = CovarianceMatrix2M(Matrix4::identity() * 0.1);
        assert!(!v.is_physical());
    }

    #[test]
    fn csv_round_trip() {
        let v = hssv_covariance(0.37);
        let back = CovarianceMatrix2M::from_csv(&v.to_csv()).unwrap();
        assert_eq!(back, v);
        assert!(CovarianceMatrix2M::from_csv("1,2\n").is_err());
    }

    #[test]
    fn displaced_state_rejected() {
        let v = FockVector::from_real(&[0.8, 0.6, 0.0]).unwrap();
        let s = TwoModeFockState::product(&v, &FockVector::vacuum(3).unwrap()).unwrap();
        assert!(matches!(
            covariance_of(&s.to_density()),
            Err(Error::Displaced { .. })
        ));
    }
}
