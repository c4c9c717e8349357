//! Local photon subtraction from a half-split squeezed vacuum.
//!
//! The ideal protocol applies annihilation operators directly. The realistic
//! protocol taps each arm with a beam splitter of reflectance `R` and heralds
//! on on/off detectors; it is simulated as a four-mode pure state
//! `(A, B, C, D)`, with `C` and `D` the tap modes of Alice and Bob.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fock::{
    binomial, loss_channel, squeezed_vacuum, tap_angle, DensityMatrix, FockVector, Mode,
    MultiModeState, Truncation, TwoModeFockState, BEAMSPLITTER_LEAKAGE_TOL,
};
use crate::{Error, Result, C64};

const COMMUTATION_TOL: f64 = 1e-10;
/// Conditional branches lighter than this (relative to the success
/// probability) are dropped from the ensemble.
const BRANCH_FLOOR: f64 = 1e-16;

/// Which tap detectors must click: `(n_A, n_B) ∈ {0, 1}²`. A zero entry
/// requires that detector to stay silent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeraldPattern {
    pub n_a: u8,
    pub n_b: u8,
}

impl HeraldPattern {
    /// `(0, 0)`: the undistilled state.
    pub const NONE: HeraldPattern = HeraldPattern { n_a: 0, n_b: 0 };
    pub const ALICE: HeraldPattern = HeraldPattern { n_a: 1, n_b: 0 };
    pub const BOB: HeraldPattern = HeraldPattern { n_a: 0, n_b: 1 };
    /// Coincidence of both detectors.
    pub const BOTH: HeraldPattern = HeraldPattern { n_a: 1, n_b: 1 };
    pub const ALL: [HeraldPattern; 4] = [Self::NONE, Self::ALICE, Self::BOB, Self::BOTH];

    pub fn new(n_a: u8, n_b: u8) -> Result<Self> {
        if n_a > 1 || n_b > 1 {
            return Err(Error::InvalidParameter(format!(
                "herald pattern ({n_a}, {n_b}) outside {{0,1}}²"
            )));
        }
        Ok(HeraldPattern { n_a, n_b })
    }

    pub fn photons(&self) -> usize {
        (self.n_a + self.n_b) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubtractionSpec {
    pub pattern: HeraldPattern,
    /// Tap reflectance `R`.
    pub reflectance: f64,
    /// Heralding-detector efficiency.
    pub eta_apd: f64,
    /// Transmittance applied to each kept mode after heralding.
    pub eta_out: f64,
    /// Use the annihilation-operator (`R → 0`) limit.
    pub ideal: bool,
}

impl SubtractionSpec {
    pub fn ideal(pattern: HeraldPattern) -> Self {
        SubtractionSpec {
            pattern,
            reflectance: 0.0,
            eta_apd: 1.0,
            eta_out: 1.0,
            ideal: true,
        }
    }

    pub fn tapped(pattern: HeraldPattern, reflectance: f64) -> Self {
        SubtractionSpec {
            pattern,
            reflectance,
            eta_apd: 1.0,
            eta_out: 1.0,
            ideal: false,
        }
    }

    pub fn with_losses(mut self, eta_apd: f64, eta_out: f64) -> Self {
        self.eta_apd = eta_apd;
        self.eta_out = eta_out;
        self
    }

    fn validate(&self) -> Result<()> {
        HeraldPattern::new(self.pattern.n_a, self.pattern.n_b)?;
        if !self.ideal && !(0.0..0.5).contains(&self.reflectance) {
            return Err(Error::InvalidParameter(format!(
                "reflectance {} not in [0, 0.5)",
                self.reflectance
            )));
        }
        for (name, eta) in [("eta_apd", self.eta_apd), ("eta_out", self.eta_out)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {eta} not in (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Conditional two-mode state together with its heralding probability.
#[derive(Debug, Clone)]
pub struct HeraldedState {
    pub state: DensityMatrix,
    pub success_prob: f64,
    pub spec: SubtractionSpec,
}

#[derive(Debug, Clone)]
pub struct IdealSubtraction {
    /// Normalized `a_A^{n_A} a_B^{n_B} B(π/4) S_A(r)|0,0>`.
    pub state: TwoModeFockState,
    /// Normalized `B(π/4) a_A^{n_A+n_B} S_A(r)|0,0>`.
    pub commuted: TwoModeFockState,
    pub commutation_fidelity: f64,
    /// Squared norm of the unnormalized subtracted state.
    pub herald_weight: f64,
}

/// `B(π/4)|ψ>|0>` for a single-mode input, in closed form:
/// `B(π/4)|n,0> = 2^{−n/2} Σ_m √C(n,m) (−1)^{n−m} |m, n−m>`.
/// The output keeps every term, so its per-mode dimension equals the input's.
fn split_with_vacuum(input: &FockVector) -> Result<TwoModeFockState> {
    let big = input.dim();
    let mut c = DMatrix::<C64>::zeros(big, big);
    for n in 0..big {
        let amp = input.amplitude(n);
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        for m in 0..=n {
            let sign = if (n - m) % 2 == 1 { -1.0 } else { 1.0 };
            c[(m, n - m)] = amp * sign * (binomial(n, m) / 2f64.powi(n as i32)).sqrt();
        }
    }
    TwoModeFockState::from_coeffs(c)
}

/// Restriction to the `d × d` Fock box and the fraction of mass outside it.
fn crop(state: &TwoModeFockState, d: usize) -> Result<(TwoModeFockState, f64)> {
    let boxed = TwoModeFockState::from_coeffs(state.coeffs().view((0, 0), (d, d)).into_owned())?;
    let total = state.norm_sqr();
    let lost = if total > 0.0 {
        (total - boxed.norm_sqr()).max(0.0) / total
    } else {
        0.0
    };
    Ok((boxed, lost))
}

/// Single-mode squeezed vacuum in the working dimension `2D − 1`, which
/// reaches every `|m, n>` of the `D × D` box after the split.
fn wide_squeezed_vacuum(r: f64, trunc: Truncation) -> Result<FockVector> {
    trunc.check()?;
    squeezed_vacuum(
        r,
        Truncation {
            dim: 2 * trunc.dim - 1,
            tail_tol: trunc.tail_tol,
        },
    )
}

fn boxed_output(state: &TwoModeFockState, trunc: Truncation) -> Result<TwoModeFockState> {
    let (boxed, lost) = crop(state, trunc.dim)?;
    if lost > trunc.tail_tol {
        return Err(Error::TruncationInsufficient {
            dim: trunc.dim,
            tail: lost,
            tol: trunc.tail_tol,
        });
    }
    Ok(boxed)
}

/// `B(π/4) S_A(r)|0,0>`, the half-split squeezed vacuum, projected onto the
/// `D × D` Fock box and renormalized.
pub fn half_split_squeezed_vacuum(r: f64, trunc: Truncation) -> Result<TwoModeFockState> {
    let full = split_with_vacuum(&wide_squeezed_vacuum(r, trunc)?)?;
    boxed_output(&full, trunc)?.normalized()
}

/// Ideal local subtraction, computed both as subtract-after-split and as
/// split-after-subtract; the two must agree to within 1e−10 in fidelity.
pub fn ideal_subtract(
    r: f64,
    pattern: HeraldPattern,
    trunc: Truncation,
) -> Result<IdealSubtraction> {
    HeraldPattern::new(pattern.n_a, pattern.n_b)?;
    let sv = wide_squeezed_vacuum(r, trunc)?;

    let mut full = split_with_vacuum(&sv)?;
    for _ in 0..pattern.n_a {
        full = full.annihilate(Mode::A);
    }
    for _ in 0..pattern.n_b {
        full = full.annihilate(Mode::B);
    }
    let direct = boxed_output(&full, trunc)?;
    let herald_weight = direct.norm_sqr();
    if herald_weight < 1e-300 {
        return Err(Error::ZeroNorm);
    }
    let state = direct.normalized()?;

    let mut subtracted = sv;
    for _ in 0..pattern.photons() {
        subtracted = subtracted.annihilate();
    }
    let commuted = crop(&split_with_vacuum(&subtracted)?, trunc.dim)?
        .0
        .normalized()?;
    let commutation_fidelity = state.fidelity(&commuted);
    if (1.0 - commutation_fidelity).abs() > COMMUTATION_TOL {
        return Err(Error::Consistency {
            what: "subtraction commutation infidelity",
            value: 1.0 - commutation_fidelity,
        });
    }
    Ok(IdealSubtraction {
        state,
        commuted,
        commutation_fidelity,
        herald_weight,
    })
}

fn no_click(eta: f64, photons: usize) -> f64 {
    (1.0 - eta).powi(photons as i32)
}

fn herald_weight(eta: f64, photons: usize, click: bool) -> f64 {
    if click {
        1.0 - no_click(eta, photons)
    } else {
        no_click(eta, photons)
    }
}

/// Four-mode state after splitting and tapping, in `(A, B, C, D)` order.
/// `tap_first` selects the tap-then-split arrangement, which recombines the
/// tap modes on a balanced splitter instead of tapping each arm.
///
/// Modes A and B are evolved in the working dimension `2D − 1` and cropped
/// to `D` at the end, so both arrangements yield the same truncated state.
fn four_mode_state(
    r: f64,
    reflectance: f64,
    trunc: Truncation,
    tap_first: bool,
) -> Result<MultiModeState> {
    let sv = wide_squeezed_vacuum(r, trunc)?;
    let d = trunc.dim;
    let w = sv.dim();
    let theta = tap_angle(reflectance);
    let mut s;
    let steps: Vec<(usize, usize, f64)> = if tap_first {
        s = MultiModeState::with_vacuum_ancillas(sv.amplitudes().as_slice(), vec![w, w, d, d])?;
        vec![(0, 2, theta), (2, 3, FRAC_PI_4), (0, 1, FRAC_PI_4)]
    } else {
        s = MultiModeState::from_two_mode(&split_with_vacuum(&sv)?, &[d, d]);
        vec![(0, 2, theta), (1, 3, theta)]
    };
    let mut leakage = 0.0;
    for (i, j, th) in steps {
        leakage += s.apply_beamsplitter(i, j, th)?;
    }
    if leakage > BEAMSPLITTER_LEAKAGE_TOL {
        return Err(Error::Leakage {
            leakage,
            tol: BEAMSPLITTER_LEAKAGE_TOL,
        });
    }
    let (boxed, lost) = s.crop(&[d, d, d, d])?;
    if lost > trunc.tail_tol {
        return Err(Error::TruncationInsufficient {
            dim: d,
            tail: lost,
            tol: trunc.tail_tol,
        });
    }
    boxed.normalized()
}

/// Unnormalized conditional branches `√w_cd <c, d|Ψ>` as columns of a
/// `D² × k` matrix (row-major `A ⊗ B` index), plus the total herald probability.
struct Branches {
    columns: DMatrix<C64>,
    success: f64,
    dim: usize,
}

fn conditional_branches(
    state: &MultiModeState,
    pattern: HeraldPattern,
    eta_apd: f64,
) -> Result<Branches> {
    let d = state.dims()[0];
    let (dc, dd) = (state.dims()[2], state.dims()[3]);
    let mut kept: Vec<(f64, DMatrix<C64>)> = Vec::new();
    let mut success = 0.0;
    for c in 0..dc {
        let wc = herald_weight(eta_apd, c, pattern.n_a == 1);
        if wc == 0.0 {
            continue;
        }
        for dn in 0..dd {
            let w = wc * herald_weight(eta_apd, dn, pattern.n_b == 1);
            if w == 0.0 {
                continue;
            }
            let m = state.project_trailing(c, dn)?;
            let mass = w * m.norm_squared();
            if mass == 0.0 {
                continue;
            }
            success += mass;
            kept.push((mass, m.scale(w.sqrt())));
        }
    }
    kept.retain(|(mass, _)| *mass >= BRANCH_FLOOR * success);
    let mut columns = DMatrix::<C64>::zeros(d * d, kept.len());
    for (k, (_, m)) in kept.iter().enumerate() {
        for a in 0..d {
            for b in 0..d {
                columns[(a * d + b, k)] = m[(a, b)];
            }
        }
    }
    Ok(Branches {
        columns,
        success,
        dim: d,
    })
}

impl Branches {
    fn density(&self) -> Result<DensityMatrix> {
        if self.success <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        let e = (&self.columns * self.columns.adjoint()).unscale(self.success);
        DensityMatrix::new(e, self.dim, 2)?.normalized()
    }
}

/// Fidelity `(‖V†W‖₁)² / (tr VV† tr WW†)` between two ensembles.
fn ensemble_fidelity(a: &Branches, b: &Branches) -> f64 {
    let overlap = a.columns.adjoint() * &b.columns;
    let tn: f64 = overlap.singular_values().iter().sum();
    let na = a.columns.norm_squared();
    let nb = b.columns.norm_squared();
    tn * tn / (na * nb)
}

/// Probability of the heralding event for the tapped protocol; zero when the
/// tap reflectance is zero and a click is required.
pub fn herald_probability(r: f64, spec: &SubtractionSpec, trunc: Truncation) -> Result<f64> {
    spec.validate()?;
    let state = four_mode_state(r, spec.reflectance, trunc, false)?;
    Ok(conditional_branches(&state, spec.pattern, spec.eta_apd)?.success)
}

/// Conditional state of the full protocol.
///
/// In the ideal limit the heralding probability is reported to leading order
/// in the tap, `(R η_apd)^{n_A+n_B} ‖a_A^{n_A} a_B^{n_B} |Ψ₀>‖²` (1 for no
/// subtraction).
pub fn heralded_subtract(
    r: f64,
    spec: SubtractionSpec,
    trunc: Truncation,
) -> Result<HeraldedState> {
    spec.validate()?;
    let (state, success_prob) = if spec.ideal {
        let ideal = ideal_subtract(r, spec.pattern, trunc)?;
        let n = spec.pattern.photons() as i32;
        let p = if n == 0 {
            1.0
        } else {
            ((spec.reflectance * spec.eta_apd).powi(n) * ideal.herald_weight).min(1.0)
        };
        (ideal.state.to_density(), p)
    } else {
        let four = four_mode_state(r, spec.reflectance, trunc, false)?;
        let branches = conditional_branches(&four, spec.pattern, spec.eta_apd)?;
        if branches.success <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        (branches.density()?, branches.success)
    };
    let state = loss_channel(
        &loss_channel(&state, Mode::A, spec.eta_out)?,
        Mode::B,
        spec.eta_out,
    )?;
    Ok(HeraldedState {
        state,
        success_prob,
        spec,
    })
}

/// Comparison of the split-then-tap and tap-then-split constructions.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub r: f64,
    pub reflectance: f64,
    pub pattern: HeraldPattern,
    /// Overlap of the two four-mode pure states.
    pub four_mode_fidelity: f64,
    /// Fidelity of the normalized conditional states; `None` when the herald
    /// has zero probability.
    pub state_fidelity: Option<f64>,
    pub prob_split_first: f64,
    pub prob_tap_first: f64,
}

impl EquivalenceReport {
    pub fn agrees_within(&self, tol: f64) -> bool {
        (1.0 - self.four_mode_fidelity).abs() <= tol
            && self.state_fidelity.map_or(true, |f| (1.0 - f).abs() <= tol)
            && (self.prob_split_first - self.prob_tap_first).abs() <= tol
    }
}

pub fn verify_model_equivalence(
    r: f64,
    reflectance: f64,
    pattern: HeraldPattern,
    trunc: Truncation,
) -> Result<EquivalenceReport> {
    Ok(verify_model_equivalence_patterns(r, reflectance, &[pattern], trunc)?.remove(0))
}

/// Builds both four-mode states once and compares every requested pattern.
pub fn verify_model_equivalence_patterns(
    r: f64,
    reflectance: f64,
    patterns: &[HeraldPattern],
    trunc: Truncation,
) -> Result<Vec<EquivalenceReport>> {
    if !(0.0..0.5).contains(&reflectance) {
        return Err(Error::InvalidParameter(format!(
            "reflectance {reflectance} not in [0, 0.5)"
        )));
    }
    let split_first = four_mode_state(r, reflectance, trunc, false)?;
    let tap_first = four_mode_state(r, reflectance, trunc, true)?;
    let four_mode_fidelity = split_first.inner(&tap_first).norm_sqr();
    patterns
        .iter()
        .map(|&pattern| {
            let a = conditional_branches(&split_first, pattern, 1.0)?;
            let b = conditional_branches(&tap_first, pattern, 1.0)?;
            let state_fidelity = (a.success > 0.0 && b.success > 0.0 && a.columns.ncols() > 0)
                .then(|| ensemble_fidelity(&a, &b));
            Ok(EquivalenceReport {
                r,
                reflectance,
                pattern,
                four_mode_fidelity,
                state_fidelity,
                prob_split_first: a.success,
                prob_tap_first: b.success,
            })
        })
        .collect()
}
