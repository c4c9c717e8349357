//! Simulated balanced homodyne detection and maximum-likelihood state
//! reconstruction.

mod dataset;
mod mle;
mod quadrature;
mod sampling;

pub use dataset::{ModeLabel, QuadratureDataset, QuadratureSample, RNG_ALGORITHM};
pub use mle::{mle_reconstruct, MleConfig, ReconstructionResult};
pub use quadrature::{hermite_functions, quadrature_pdf};
pub use sampling::{
    derive_seed, joint_sample_and_rotate, plus_minus_split, sample_homodyne, sample_phases,
    sample_protocol_pm, JointRoute, QuadratureSampler, SAMPLER_GRID_POINTS, SAMPLER_RANGE,
};

/// The six local-oscillator phases `kπ/6`, `k = 0..6`.
pub fn standard_phases() -> Vec<f64> {
    (0..6)
        .map(|k| k as f64 * std::f64::consts::PI / 6.0)
        .collect()
}
