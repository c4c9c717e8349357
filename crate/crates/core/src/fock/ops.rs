use nalgebra::DMatrix;

use super::{binomial, Audited, DensityMatrix, FockVector, Mode, Truncation, TwoModeFockState};
use crate::{Error, Result, C64};

/// Largest probability mass a beam splitter may push past the cutoff.
pub const BEAMSPLITTER_LEAKAGE_TOL: f64 = 1e-8;

const MAX_SQUEEZING: f64 = 5.0;

fn check_squeezing(r: f64) -> Result<()> {
    if !(r.abs() < MAX_SQUEEZING) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "squeezing |r| = {} must be < {MAX_SQUEEZING}",
            r.abs()
        )));
    }
    Ok(())
}

/// Ratio `c_{2n+2} / c_{2n}` of the squeezed-vacuum expansion.
fn sv_ratio(lambda: f64, n: usize) -> f64 {
    -lambda * (((2 * n + 1) as f64) / ((2 * n + 2) as f64)).sqrt()
}

/// Probability mass of `S(r)|0>` on number states `>= dim`.
pub fn squeezed_vacuum_tail(r: f64, dim: usize) -> f64 {
    let lambda = r.tanh();
    let mut c = 1.0 / r.cosh().sqrt();
    let mut n = 0;
    while 2 * n < dim {
        c *= sv_ratio(lambda, n);
        n += 1;
    }
    let mut tail = 0.0;
    loop {
        let t = c * c;
        tail += t;
        if t < 1e-18 * tail.max(1e-300) || t < 1e-300 {
            break;
        }
        c *= sv_ratio(lambda, n);
        n += 1;
    }
    tail
}

/// `S(r)|0>` truncated to `trunc.dim` and renormalized.
///
/// Amplitudes follow `c_{2n} = (−tanh r)^n √((2n)!) / (2^n n!) / √(cosh r)`;
/// odd amplitudes vanish.
pub fn squeezed_vacuum(r: f64, trunc: Truncation) -> Result<FockVector> {
    trunc.check()?;
    check_squeezing(r)?;
    let tail = squeezed_vacuum_tail(r, trunc.dim);
    if tail > trunc.tail_tol {
        return Err(Error::TruncationInsufficient {
            dim: trunc.dim,
            tail,
            tol: trunc.tail_tol,
        });
    }
    let lambda = r.tanh();
    let mut amps = vec![0.0; trunc.dim];
    let mut c = 1.0 / r.cosh().sqrt();
    let mut n = 0;
    while 2 * n < trunc.dim {
        amps[2 * n] = c;
        c *= sv_ratio(lambda, n);
        n += 1;
    }
    FockVector::from_real(&amps)?.normalized()
}

/// Truncated annihilation operator, `a|n> = √n |n−1>`.
pub fn annihilation_matrix(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(
        dim,
        dim,
        |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 },
    )
}

fn padded_dim(dim: usize) -> usize {
    2 * dim + 40
}

/// Columns `S(r)|n>` for `n < dim`, expressed in a padded basis of size
/// `2 dim + 40`. The unitary is the matrix exponential of the truncated
/// generator `r(a² − a†²)/2` on the padded space.
pub fn squeeze_operator(r: f64, dim: usize) -> Result<DMatrix<f64>> {
    check_squeezing(r)?;
    let p = padded_dim(dim);
    let a = annihilation_matrix(p);
    let a2 = &a * &a;
    let gen = (&a2 - a2.transpose()).scale(r / 2.0);
    let u = gen.exp();
    Ok(u.columns(0, dim).into_owned())
}

fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// `S_A(r_a) S_B(r_b)` applied to a two-mode state, renormalized after
/// truncation. The returned leakage is the mass that landed beyond the cutoff.
pub fn apply_local_squeezing(
    state: &TwoModeFockState,
    r_a: f64,
    r_b: f64,
    tail_tol: f64,
) -> Result<Audited<TwoModeFockState>> {
    let d = state.dim();
    let sa = complexify(&squeeze_operator(r_a, d)?);
    let sb = complexify(&squeeze_operator(r_b, d)?);
    let full = &sa * state.coeffs() * sb.transpose();
    let kept = full.view((0, 0), (d, d)).into_owned();
    let leakage =
        (full.norm_squared() - kept.norm_squared()).max(0.0) / full.norm_squared().max(1e-300);
    if leakage > tail_tol {
        return Err(Error::TruncationInsufficient {
            dim: d,
            tail: leakage,
            tol: tail_tol,
        });
    }
    Ok(Audited {
        value: TwoModeFockState::from_coeffs(kept)?.normalized()?,
        leakage,
    })
}

/// Unnormalized `a_mode |ψ>`; its squared norm is the heralding weight.
pub fn apply_annihilation(state: &TwoModeFockState, mode: Mode) -> TwoModeFockState {
    state.annihilate(mode)
}

/// Photon-number blocks of the beam splitter `exp(θ(a_1† a_2 − a_1 a_2†))`.
///
/// Block `N` acts on the basis `|m, N−m>`, `m = 0..=N`, where `m` counts
/// photons in the first mode. The generator conserves total photon number, so
/// the exponential of each (exact, untruncated) block is the exact unitary.
pub fn beamsplitter_blocks(theta: f64, max_total: usize) -> Vec<DMatrix<f64>> {
    (0..=max_total)
        .map(|n| {
            let mut g = DMatrix::<f64>::zeros(n + 1, n + 1);
            for m in 0..n {
                // a_1† a_2 |m, n−m> = √((m+1)(n−m)) |m+1, n−m−1>
                let w = theta * (((m + 1) * (n - m)) as f64).sqrt();
                g[(m + 1, m)] = w;
                g[(m, m + 1)] = -w;
            }
            g.exp()
        })
        .collect()
}

/// Applies beam-splitter blocks to modes `i` and `j` of a row-major tensor.
/// Returns the probability mass that left the truncated space.
pub(crate) fn bs_apply_flat(
    amps: &mut [C64],
    dims: &[usize],
    i: usize,
    j: usize,
    blocks: &[DMatrix<f64>],
) -> f64 {
    let stride = |k: usize| -> usize { dims[k + 1..].iter().product() };
    let (si, sj) = (stride(i), stride(j));
    let (di, dj) = (dims[i], dims[j]);
    let max_total = di + dj - 2;
    let mut leak = 0.0;
    let mut v = vec![C64::new(0.0, 0.0); max_total + 1];
    let mut out = vec![C64::new(0.0, 0.0); max_total + 1];
    for base in 0..amps.len() {
        if (base / si) % di != 0 || (base / sj) % dj != 0 {
            continue;
        }
        for n in 0..=max_total.min(blocks.len() - 1) {
            let lo = n.saturating_sub(dj - 1);
            let hi = n.min(di - 1);
            if lo > hi {
                continue;
            }
            let mut any = false;
            for m in 0..=n {
                v[m] = if m >= lo && m <= hi {
                    amps[base + m * si + (n - m) * sj]
                } else {
                    C64::new(0.0, 0.0)
                };
                any |= v[m].re != 0.0 || v[m].im != 0.0;
            }
            if !any {
                continue;
            }
            let u = &blocks[n];
            for (row, o) in out.iter_mut().enumerate().take(n + 1) {
                let mut acc = C64::new(0.0, 0.0);
                for (col, x) in v.iter().enumerate().take(n + 1) {
                    acc += *x * u[(row, col)];
                }
                *o = acc;
            }
            for m in 0..=n {
                if m >= lo && m <= hi {
                    amps[base + m * si + (n - m) * sj] = out[m];
                } else {
                    leak += out[m].norm_sqr();
                }
            }
        }
    }
    leak
}

/// `B(θ) = exp(θ(a_A† a_B − a_A a_B†))` on a two-mode state. `θ = π/4` is the
/// balanced splitter; a tap of reflectance `R` uses `θ = arcsin √R`.
pub fn apply_beamsplitter(
    state: &TwoModeFockState,
    theta: f64,
) -> Result<Audited<TwoModeFockState>> {
    let d = state.dim();
    let mut flat = state.to_flat();
    let blocks = beamsplitter_blocks(theta, 2 * d - 2);
    let leakage = bs_apply_flat(&mut flat, &[d, d], 0, 1, &blocks);
    if leakage > BEAMSPLITTER_LEAKAGE_TOL {
        return Err(Error::Leakage {
            leakage,
            tol: BEAMSPLITTER_LEAKAGE_TOL,
        });
    }
    Ok(Audited {
        value: TwoModeFockState::from_flat(d, &flat)?,
        leakage,
    })
}

/// `B(θ) ρ B(θ)†` for a two-mode density matrix.
pub fn apply_beamsplitter_density(
    rho: &DensityMatrix,
    theta: f64,
) -> Result<Audited<DensityMatrix>> {
    rho.require_modes(2)?;
    let d = rho.dim();
    let n = d * d;
    let blocks = beamsplitter_blocks(theta, 2 * d - 2);
    let dims = [d, d];
    let apply_cols = |m: &DMatrix<C64>| -> DMatrix<C64> {
        let mut out = m.clone();
        for mut col in out.column_iter_mut() {
            let mut v: Vec<C64> = col.iter().copied().collect();
            bs_apply_flat(&mut v, &dims, 0, 1, &blocks);
            col.copy_from_slice(&v);
        }
        out
    };
    // U ρ U† = (U (U ρ)†)†
    let half = apply_cols(rho.elements());
    let full = apply_cols(&half.adjoint()).adjoint();
    let leakage = (rho.trace() - full.trace().re).max(0.0);
    if leakage > BEAMSPLITTER_LEAKAGE_TOL {
        return Err(Error::Leakage {
            leakage,
            tol: BEAMSPLITTER_LEAKAGE_TOL,
        });
    }
    debug_assert_eq!(full.nrows(), n);
    Ok(Audited {
        value: DensityMatrix::new(full, d, 2)?,
        leakage,
    })
}

/// Kraus element `K_k[n−k, n]` of the pure-loss channel with transmittance `eta`.
fn loss_kraus(eta: f64, n: usize, k: usize) -> f64 {
    (binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32)).sqrt()
}

/// Pure-loss channel of transmittance `eta` on one mode: a beam splitter with
/// a vacuum ancilla followed by tracing out the ancilla. For single-mode
/// states `mode` is ignored.
pub fn loss_channel(rho: &DensityMatrix, mode: Mode, eta: f64) -> Result<DensityMatrix> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "efficiency {eta} not in (0, 1]"
        )));
    }
    if eta == 1.0 {
        return Ok(rho.clone());
    }
    let d = rho.dim();
    let e = rho.elements();
    let size = rho.size();
    // Flat index split into (lossy-mode photon number, spectator index).
    let (split, join): (
        Box<dyn Fn(usize) -> (usize, usize)>,
        Box<dyn Fn(usize, usize) -> usize>,
    ) = match (rho.modes(), mode) {
        (1, _) => (Box::new(|i| (i, 0)), Box::new(|n, _| n)),
        (_, Mode::A) => (
            Box::new(move |i| (i / d, i % d)),
            Box::new(move |n, s| n * d + s),
        ),
        (_, Mode::B) => (
            Box::new(move |i| (i % d, i / d)),
            Box::new(move |n, s| s * d + n),
        ),
    };
    let mut out = DMatrix::<C64>::zeros(size, size);
    for i in 0..size {
        let (m, s) = split(i);
        for j in 0..size {
            let (mp, sp) = split(j);
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d - m.max(mp) {
                let c = loss_kraus(eta, m + k, k) * loss_kraus(eta, mp + k, k);
                acc += e[(join(m + k, s), join(mp + k, sp))] * c;
            }
            out[(i, j)] = acc;
        }
    }
    Ok(rho.with_elements(out))
}
