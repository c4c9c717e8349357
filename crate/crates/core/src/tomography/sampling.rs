use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::{ModeLabel, QuadratureDataset, QuadratureSample};
use super::quadrature::{hermite_functions, quadrature_pdf};
use crate::fock::{apply_beamsplitter_density, partial_trace, tensor, DensityMatrix, Mode};
use crate::{Error, Result, C64};

/// Inverse-CDF grid resolution for single-mode sampling.
pub const SAMPLER_GRID_POINTS: usize = 4096;
/// Quadrature range covered by the sampling grid.
pub const SAMPLER_RANGE: (f64, f64) = (-10.0, 10.0);

const JOINT_GRID_POINTS: usize = 512;
const JOINT_RANGE: (f64, f64) = (-8.0, 8.0);
/// Largest `‖ρ_{−+} − ρ_− ⊗ ρ_+‖_F` treated as a product state. Cropping a
/// product state to the `D × D` box leaves correlations of roughly the
/// dropped amplitudes, well below this.
const FACTORIZATION_TOL: f64 = 1e-3;

/// Independent seed for sub-job `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(seed ^ splitmix(index.wrapping_add(1)))
}

/// Tabulated inverse CDF of `p(x|θ)` for one state and phase.
#[derive(Debug, Clone)]
pub struct QuadratureSampler {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl QuadratureSampler {
    pub fn new(rho: &DensityMatrix, theta: f64) -> Result<Self> {
        rho.require_modes(1)?;
        let (lo, hi) = SAMPLER_RANGE;
        let n = SAMPLER_GRID_POINTS;
        let grid: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let pdf = grid
            .iter()
            .map(|&x| quadrature_pdf(rho, theta, x))
            .collect::<Result<Vec<_>>>()?;
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (grid[i] - grid[i - 1]);
        }
        let total = cdf[n - 1];
        if !(total > 0.0) {
            return Err(Error::ZeroNorm);
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(QuadratureSampler { grid, cdf })
    }

    /// Quadrature value at cumulative probability `u ∈ [0, 1)`.
    pub fn invert(&self, u: f64) -> f64 {
        let i = self
            .cdf
            .partition_point(|&c| c <= u)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[i - 1] + t * (self.grid[i] - self.grid[i - 1])
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.invert(rng.random::<f64>())).collect()
    }
}

/// `n` homodyne outcomes of a single-mode state at phase `theta`.
pub fn sample_homodyne(
    rho: &DensityMatrix,
    theta: f64,
    n: usize,
    seed: u64,
) -> Result<QuadratureDataset> {
    let sampler = QuadratureSampler::new(rho, theta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out =
        QuadratureDataset::new(ModeLabel::A, seed, format!("single mode, theta = {theta}"));
    out.samples = sampler
        .sample(&mut rng, n)
        .into_iter()
        .map(|x| QuadratureSample { x, theta })
        .collect();
    Ok(out)
}

fn phase_counts(n_total: usize, phases: usize) -> Vec<usize> {
    (0..phases)
        .map(|k| n_total / phases + usize::from(k < n_total % phases))
        .collect()
}

/// Stratified protocol: `n_total` samples shared evenly over `phases`, each
/// phase drawn from its own derived seed.
pub fn sample_phases(
    rho: &DensityMatrix,
    phases: &[f64],
    n_total: usize,
    seed: u64,
    mode: ModeLabel,
) -> Result<QuadratureDataset> {
    if phases.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one phase is required".into(),
        ));
    }
    let counts = phase_counts(n_total, phases.len());
    let chunks = phases
        .par_iter()
        .zip(counts.par_iter())
        .enumerate()
        .map(|(k, (&theta, &n))| {
            let mut d = sample_homodyne(rho, theta, n, derive_seed(seed, k as u64))?;
            d.mode = mode;
            Ok(d.samples)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = QuadratureDataset::new(
        mode,
        seed,
        format!("{} phases, {} samples", phases.len(), n_total),
    );
    out.samples = chunks.into_iter().flatten().collect();
    Ok(out)
}

/// How [`joint_sample_and_rotate`] drew its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointRoute {
    /// The state factorizes over the `±` modes; each is sampled on its own.
    Factorized,
    /// Joint `(x_A, x_B)` grid density, for states correlated across `±`.
    JointGrid,
}

/// Zero-padded copy of a two-mode state in a larger per-mode dimension.
fn pad_two_mode(rho: &DensityMatrix, dim: usize) -> Result<DensityMatrix> {
    let d = rho.dim();
    let mut e = DMatrix::<C64>::zeros(dim * dim, dim * dim);
    for i in 0..d * d {
        for j in 0..d * d {
            e[((i / d) * dim + i % d, (j / d) * dim + j % d)] = rho.elements()[(i, j)];
        }
    }
    DensityMatrix::new(e, dim, 2)
}

fn crop_single(rho: &DensityMatrix, dim: usize) -> Result<DensityMatrix> {
    DensityMatrix::new(rho.elements().view((0, 0), (dim, dim)).into_owned(), dim, 1)?.normalized()
}

/// Reduced `(−, +)` states of a two-mode `ρ_AB` and the residual correlation
/// `‖ρ_{−+} − ρ_− ⊗ ρ_+‖_F`.
///
/// The rotation is carried out in per-mode dimension `2D − 1`, where it is
/// exact; the reduced states are cut back to `D` and renormalized.
pub fn plus_minus_split(rho: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix, f64)> {
    rho.require_modes(2)?;
    let d = rho.dim();
    let wide = pad_two_mode(rho, 2 * d - 1)?;
    // B(π/4)† ρ B(π/4) puts the "−" mode first and the "+" mode second
    let pm = apply_beamsplitter_density(&wide, -std::f64::consts::FRAC_PI_4)?.value;
    let minus = partial_trace(&pm, Mode::A)?;
    let plus = partial_trace(&pm, Mode::B)?;
    let residual = (tensor(&minus, &plus)?.elements() - pm.elements()).norm();
    Ok((crop_single(&minus, d)?, crop_single(&plus, d)?, residual))
}

fn joint_grid_samples(
    rho: &DensityMatrix,
    theta: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, f64)>> {
    let d = rho.dim();
    let g = JOINT_GRID_POINTS;
    let (lo, hi) = JOINT_RANGE;
    let h = (hi - lo) / g as f64;
    let centers: Vec<f64> = (0..g).map(|i| lo + (i as f64 + 0.5) * h).collect();
    // Φ[i, n] = <x_θ = c_i | n> = e^{−inθ} ψ_n(c_i)
    let phi = DMatrix::<C64>::from_fn(g, d, |i, k| {
        C64::from_polar(1.0, -(k as f64) * theta) * hermite_functions(centers[i], d)[k]
    });
    let eig = rho.hermitian_part().symmetric_eigen();
    let mut pdf = DMatrix::<f64>::zeros(g, g);
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 1e-14 {
            continue;
        }
        let u = DMatrix::<C64>::from_fn(d, d, |m, k| eig.eigenvectors[(m * d + k, j)]);
        let amp = &phi * u * phi.transpose();
        pdf.zip_apply(&amp, |p, a| *p += lam * a.norm_sqr());
    }
    let mut cdf = Vec::with_capacity(g * g);
    let mut acc = 0.0;
    for i in 0..g {
        for k in 0..g {
            acc += pdf[(i, k)];
            cdf.push(acc);
        }
    }
    if !(acc > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok((0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let cell = cdf.partition_point(|&c| c <= u).min(g * g - 1);
            let (i, k) = (cell / g, cell % g);
            let xa = centers[i] + (rng.random::<f64>() - 0.5) * h;
            let xb = centers[k] + (rng.random::<f64>() - 0.5) * h;
            (xa, xb)
        })
        .collect())
}

/// Samples joint quadratures `(x_A, x_B)` of a two-mode state at a common
/// phase and returns the rotated records `x_± = (x_A ± x_B)/√2` as
/// `(plus, minus)`.
pub fn joint_sample_and_rotate(
    rho: &DensityMatrix,
    theta: f64,
    n: usize,
    seed: u64,
) -> Result<(QuadratureDataset, QuadratureDataset, JointRoute)> {
    let (minus_state, plus_state, residual) = plus_minus_split(rho)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pairs: Vec<(f64, f64)>;
    let route;
    if residual < FACTORIZATION_TOL {
        route = JointRoute::Factorized;
        let mut rng_m = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
        let mut rng_p = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
        let xm = QuadratureSampler::new(&minus_state, theta)?.sample(&mut rng_m, n);
        let xp = QuadratureSampler::new(&plus_state, theta)?.sample(&mut rng_p, n);
        pairs = xm
            .iter()
            .zip(&xp)
            .map(|(&m, &p)| ((p + m) * s, (p - m) * s))
            .collect();
    } else {
        route = JointRoute::JointGrid;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        pairs = joint_grid_samples(rho, theta, n, &mut rng)?;
    }
    let mut plus = QuadratureDataset::new(
        ModeLabel::Plus,
        seed,
        format!("rotated '+' record, theta = {theta}"),
    );
    let mut minus = QuadratureDataset::new(
        ModeLabel::Minus,
        seed,
        format!("rotated '-' record, theta = {theta}"),
    );
    for (xa, xb) in pairs {
        plus.samples.push(QuadratureSample {
            x: (xa + xb) * s,
            theta,
        });
        minus.samples.push(QuadratureSample {
            x: (xa - xb) * s,
            theta,
        });
    }
    Ok((plus, minus, route))
}

/// Stratified joint protocol over `phases`, returning `(plus, minus)`.
pub fn sample_protocol_pm(
    rho: &DensityMatrix,
    phases: &[f64],
    n_total: usize,
    seed: u64,
) -> Result<(QuadratureDataset, QuadratureDataset)> {
    if phases.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one phase is required".into(),
        ));
    }
    let counts = phase_counts(n_total, phases.len());
    let parts = phases
        .par_iter()
        .zip(counts.par_iter())
        .enumerate()
        .map(|(k, (&theta, &n))| {
            joint_sample_and_rotate(rho, theta, n, derive_seed(seed, k as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let desc = format!("{} phases, {} samples", phases.len(), n_total);
    let mut plus = QuadratureDataset::new(ModeLabel::Plus, seed, format!("'+' mode, {desc}"));
    let mut minus = QuadratureDataset::new(ModeLabel::Minus, seed, format!("'-' mode, {desc}"));
    for (p, m, _) in parts {
        plus.samples.extend(p.samples);
        minus.samples.extend(m.samples);
    }
    Ok((plus, minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{squeezed_vacuum, FockVector, Truncation, TwoModeFockState};
    use crate::subtraction::half_split_squeezed_vacuum;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        (
            mean,
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0),
        )
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
        assert_ne!(derive_seed(42, 3), derive_seed(42, 4));
        assert_ne!(derive_seed(42, 3), derive_seed(43, 3));
    }

    #[test]
    fn vacuum_samples_have_half_variance() {
        let vac = DensityMatrix::vacuum(4, 1).unwrap();
        let d = sample_homodyne(&vac, 0.3, 40_000, 1).unwrap();
        let xs: Vec<f64> = d.samples.iter().map(|s| s.x).collect();
        let (mean, var) = moments(&xs);
        assert!(mean.abs() < 0.02);
        assert!((var - 0.5).abs() < 0.015, "var = {var}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let sv = squeezed_vacuum(0.3, Truncation::new(20))
            .unwrap()
            .to_density();
        let a =
            sample_phases(&sv, &super::super::standard_phases(), 1000, 9, ModeLabel::A).unwrap();
        let b =
            sample_phases(&sv, &super::super::standard_phases(), 1000, 9, ModeLabel::A).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
        assert_eq!(a.phases().len(), 6);
    }

    #[test]
    fn half_split_factorizes_over_plus_minus() {
        let psi = half_split_squeezed_vacuum(0.4, Truncation::new(16)).unwrap();
        let (minus, plus, residual) = plus_minus_split(&psi.to_density()).unwrap();
        // only the box edge correlates the two modes
        assert!(residual < 1e-4, "{residual}");
        let sv = squeezed_vacuum(0.4, Truncation::new(16))
            .unwrap()
            .to_density();
        assert!((minus.elements() - sv.elements()).norm() < 1e-4);
        assert!((plus.populations()[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn joint_routes_agree_on_a_correlated_state() {
        // |1,0>: after rotation the "-" and "+" modes share one photon
        let s = TwoModeFockState::number(1, 0, 4).unwrap().to_density();
        let (p, m, route) = joint_sample_and_rotate(&s, 0.0, 30_000, 5).unwrap();
        assert_eq!(route, JointRoute::JointGrid);
        let xs_p: Vec<f64> = p.samples.iter().map(|q| q.x).collect();
        let xs_m: Vec<f64> = m.samples.iter().map(|q| q.x).collect();
        // each of x_± sees a 50/50 mixture of |0> and |1>: variance 1
        assert!((moments(&xs_p).1 - 1.0).abs() < 0.04);
        assert!((moments(&xs_m).1 - 1.0).abs() < 0.04);
        let vac = FockVector::vacuum(4).unwrap();
        let product = TwoModeFockState::product(&vac, &vac).unwrap().to_density();
        assert_eq!(
            joint_sample_and_rotate(&product, 0.0, 10, 1).unwrap().2,
            JointRoute::Factorized
        );
    }
}
