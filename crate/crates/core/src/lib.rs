//! Truncated Fock-space simulation of continuous-variable entanglement
//! distillation by local photon subtraction.
//!
//! The crate is organized bottom-up:
//!
//! - [`fock`]: one- and two-mode states in a truncated number basis, with the
//!   squeezing, beam-splitter, annihilation and loss operations that build every
//!   protocol state.
//! - [`subtraction`]: ideal and heralded (finite-reflectance tap, on/off
//!   detector) photon subtraction from a half-split squeezed vacuum.
//! - [`gaussian`]: covariance matrices, both measured from Fock-basis states and
//!   in closed form.
//! - [`entanglement`]: logarithmic negativity, Schmidt spectra and the entropy of
//!   entanglement, including the analytic spectra of the subtracted states.
//! - [`wigner`]: Wigner functions of single-mode states and the factorized
//!   two-mode form.
//! - [`tomography`]: simulated homodyne sampling and iterative maximum-likelihood
//!   reconstruction.
//! - [`analysis`]: distillation curves, EPR variances, data-size extrapolation
//!   of the negativity and bootstrap uncertainties.
//! - [`verify`]: a fast suite of internal consistency checks.
//! - [`cli`]: the config-driven pipelines behind the `cvdistill` binary, with
//!   [`io`] for atomic artifact writes.
//!
//! Quadratures follow `x = (a + a†)/√2`, `p = (a − a†)/(i√2)`, so the vacuum
//! has variance 1/2 in both. Squeezing is `S(r) = exp(r(a² − a†²)/2)`, which
//! squeezes `x` for `r > 0`.

pub mod analysis;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod io;
pub mod subtraction;
pub mod tomography;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
