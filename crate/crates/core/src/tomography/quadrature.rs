use crate::fock::DensityMatrix;
use crate::{Result, C64};

/// Harmonic-oscillator eigenfunctions `ψ_n(x)`, `n < dim`, for the
/// vacuum-variance-1/2 convention: `ψ_0 = π^{−1/4} e^{−x²/2}`.
pub fn hermite_functions(x: f64, dim: usize) -> Vec<f64> {
    let mut psi = vec![0.0; dim];
    psi[0] = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    if dim > 1 {
        psi[1] = std::f64::consts::SQRT_2 * x * psi[0];
    }
    for n in 1..dim.saturating_sub(1) {
        let nf = n as f64;
        psi[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
    }
    psi
}

/// Homodyne density `p(x|θ) = Σ_mn ρ_mn ψ_m(x) ψ_n(x) e^{i(n−m)θ}` of the
/// quadrature `x cos θ + p sin θ`.
pub fn quadrature_pdf(rho: &DensityMatrix, theta: f64, x: f64) -> Result<f64> {
    rho.require_modes(1)?;
    let d = rho.dim();
    let psi = hermite_functions(x, d);
    let e = rho.elements();
    let mut acc = 0.0;
    for m in 0..d {
        acc += e[(m, m)].re * psi[m] * psi[m];
        for n in m + 1..d {
            let phase = C64::from_polar(1.0, (n as f64 - m as f64) * theta);
            acc += 2.0 * (e[(m, n)] * phase).re * psi[m] * psi[n];
        }
    }
    Ok(acc.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{squeezed_vacuum, FockVector, Truncation};
    use crate::wigner::linspace;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn gauss(x: f64, var: f64) -> f64 {
        (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let xs = linspace(-12.0, 12.0, 4001);
        let dx = xs[1] - xs[0];
        let table: Vec<Vec<f64>> = xs.iter().map(|&x| hermite_functions(x, 12)).collect();
        for m in 0..12 {
            for n in 0..12 {
                let ip: f64 = table.iter().map(|p| p[m] * p[n]).sum::<f64>() * dx;
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-10, "<{m}|{n}> = {ip}");
            }
        }
    }

    #[test]
    fn vacuum_is_gaussian_half_variance() {
        let vac = DensityMatrix::vacuum(5, 1).unwrap();
        for &x in &[-1.5, 0.0, 0.4, 2.0] {
            assert!((quadrature_pdf(&vac, 0.7, x).unwrap() - gauss(x, 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_photon_is_phase_independent() {
        let one = FockVector::number(1, 5).unwrap().to_density();
        for &x in &[-1.0, 0.3, 1.7] {
            let expected = 2.0 * x * x / PI.sqrt() * (-x * x).exp();
            for &th in &[0.0, 0.5, 2.0] {
                assert!((quadrature_pdf(&one, th, x).unwrap() - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn squeezed_vacuum_marginals() {
        let r = 0.368;
        let sv = squeezed_vacuum(r, Truncation::new(44))
            .unwrap()
            .to_density();
        for &x in &[-1.0, 0.0, 0.5] {
            let p0 = quadrature_pdf(&sv, 0.0, x).unwrap();
            assert!((p0 - gauss(x, (-2.0 * r).exp() / 2.0)).abs() < 1e-9);
            let p90 = quadrature_pdf(&sv, PI / 2.0, x).unwrap();
            assert!(
                (p90 - gauss(x, (2.0 * r).exp() / 2.0)).abs() < 1e-9,
                "{p90} {}",
                gauss(x, (2.0 * r).exp() / 2.0)
            );
        }
    }

    #[test]
    fn phase_orientation() {
        // (|0> + i|1>)/√2 is displaced towards +p, seen at θ = π/2
        let v = FockVector::new(nalgebra::DVector::from_vec(vec![
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, FRAC_1_SQRT_2),
            C64::new(0.0, 0.0),
        ]))
        .unwrap()
        .to_density();
        let xs = linspace(-8.0, 8.0, 1601);
        let dx = xs[1] - xs[0];
        let mean = |th: f64| {
            xs.iter()
                .map(|&x| x * quadrature_pdf(&v, th, x).unwrap())
                .sum::<f64>()
                * dx
        };
        assert!(mean(PI / 2.0) > 0.3);
        assert!(mean(0.0).abs() < 1e-10);
        let total: f64 = xs
            .iter()
            .map(|&x| quadrature_pdf(&v, 1.1, x).unwrap())
            .sum::<f64>()
            * dx;
        assert!((total - 1.0).abs() < 1e-6);
    }
}
