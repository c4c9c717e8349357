//! Truncated Fock-space states and the elementary operations acting on them.
//!
//! Single-mode states live in span{|0>, ..., |D-1>}; two-mode states use the
//! same cutoff on both modes with row-major `A ⊗ B` ordering (flat index
//! `m * D + n` for `|m>_A |n>_B`). Every operation that can push amplitude
//! past the cutoff audits the lost mass and fails loudly when it exceeds the
//! configured tolerance.

mod density;
mod multimode;
mod ops;
mod state;

pub use density::{fidelity, fidelity_pure, partial_trace, tensor, DensityMatrix};
pub use multimode::MultiModeState;
pub use ops::{
    annihilation_matrix, apply_annihilation, apply_beamsplitter, apply_beamsplitter_density,
    apply_local_squeezing, beamsplitter_blocks, loss_channel, squeeze_operator, squeezed_vacuum,
    squeezed_vacuum_tail, BEAMSPLITTER_LEAKAGE_TOL,
};
pub use state::{FockVector, StateJson, TwoModeFockState};

use crate::{Error, Result};

/// Default single-mode cutoff.
pub const DEFAULT_DIM: usize = 20;
/// Default bound on probability mass discarded by truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-6;

/// Fock-space cutoff together with the truncation budget it must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub dim: usize,
    pub tail_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            dim: DEFAULT_DIM,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

impl Truncation {
    pub fn new(dim: usize) -> Self {
        Truncation {
            dim,
            ..Default::default()
        }
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Self {
        self.tail_tol = tail_tol;
        self
    }

    /// Smallest cutoff (at least `min_dim`) whose squeezed-vacuum tail mass at
    /// squeezing `r` stays below `tail_tol`.
    pub fn for_squeezing(r: f64, tail_tol: f64, min_dim: usize) -> Self {
        let mut dim = min_dim.max(2);
        while squeezed_vacuum_tail(r, dim) > tail_tol && dim < 400 {
            dim += 1;
        }
        Truncation { dim, tail_tol }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "truncation dimension {} < 2",
                self.dim
            )));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "tail tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One of the two spatial modes held by Alice (`A`) and Bob (`B`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    A,
    B,
}

/// A value produced by an operation that may lose norm to truncation, along
/// with the mass that was lost.
#[derive(Debug, Clone)]
pub struct Audited<T> {
    pub value: T,
    pub leakage: f64,
}

impl<T> Audited<T> {
    pub fn into_inner(self) -> T {
        self.value
    }
}

/// Physical parameters of one protocol run. `λ = tanh r` and `λ' = tanh(r/2)`
/// are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    /// Squeezing parameter of the source.
    pub r: f64,
    /// Tap reflectance, `0 <= R < 1`.
    pub reflectance: f64,
    /// Efficiency of a loss channel, `0 < η <= 1`.
    pub eta: f64,
}

impl ModeParams {
    pub fn new(r: f64, reflectance: f64, eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&reflectance) {
            return Err(Error::InvalidParameter(format!(
                "reflectance {reflectance} not in [0, 1)"
            )));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "efficiency {eta} not in (0, 1]"
            )));
        }
        Ok(ModeParams {
            r,
            reflectance,
            eta,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.r.tanh()
    }

    pub fn lambda_prime(&self) -> f64 {
        (self.r / 2.0).tanh()
    }

    pub fn tap_angle(&self) -> f64 {
        tap_angle(self.reflectance)
    }
}

/// Beam-splitter angle `θ = arcsin √R` of a tap with reflectance `R`.
pub fn tap_angle(reflectance: f64) -> f64 {
    reflectance.sqrt().asin()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}
