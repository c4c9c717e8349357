//! Reconstructed negativity is biased upward by statistical noise. Splitting
//! the record into d parts, reconstructing each, and fitting
//! `E_N(N) = a + b/√N` recovers the noise-free value `a`.

use cvdistill::analysis::{db_to_r, negativity_vs_datasize, DataSizeConfig};
use cvdistill::entanglement::{log_negativity, LogBase};
use cvdistill::fock::Truncation;
use cvdistill::subtraction::{ideal_subtract, HeraldPattern};
use cvdistill::tomography::MleConfig;

pub fn run_example() -> cvdistill::Result<()> {
    let truth = ideal_subtract(db_to_r(-3.2), HeraldPattern::ALICE, Truncation::new(14))?
        .state
        .to_density();
    let cfg = DataSizeConfig {
        n_full: 120_000,
        d_list: vec![1, 2, 4, 8],
        mle: MleConfig {
            dim: 12,
            ..MleConfig::default()
        },
        ..DataSizeConfig::default()
    };
    let fit = negativity_vs_datasize(&truth, &cfg)?;
    for p in &fit.points {
        println!(
            "N = {:>7.0}: E_N = {:.4} +/- {:.4} ({} subsets)",
            p.n, p.mean, p.std, p.count
        );
    }
    println!(
        "a = {:.4}, b = {:.3}, true E_N = {:.4}",
        fit.a,
        fit.b,
        log_negativity(&truth, LogBase::Two)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
