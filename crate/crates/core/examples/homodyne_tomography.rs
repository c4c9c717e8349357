//! Simulated homodyne tomography of a distilled state. Quadratures of the two
//! output modes are sampled jointly, rotated into the "+"/"−" basis, and each
//! rotated mode is reconstructed by maximum likelihood.

use cvdistill::analysis::{db_to_r, negativity_from_minus};
use cvdistill::entanglement::{log_negativity, LogBase};
use cvdistill::fock::{fidelity, Truncation};
use cvdistill::subtraction::{ideal_subtract, HeraldPattern};
use cvdistill::tomography::{
    mle_reconstruct, plus_minus_split, sample_protocol_pm, standard_phases, MleConfig,
};

pub fn run_example() -> cvdistill::Result<()> {
    let truth = ideal_subtract(db_to_r(-3.2), HeraldPattern::ALICE, Truncation::new(14))?
        .state
        .to_density();
    let (plus, minus) = sample_protocol_pm(&truth, &standard_phases(), 60_000, 7)?;
    println!(
        "{} samples per mode over {} phases",
        minus.len(),
        minus.phases().len()
    );

    let cfg = MleConfig {
        dim: 12,
        ..MleConfig::default()
    };
    let rec_minus = mle_reconstruct(&minus, &cfg)?;
    let rec_plus = mle_reconstruct(&plus, &cfg)?;
    println!(
        "'-': {} iterations, converged {}",
        rec_minus.iterations, rec_minus.converged
    );

    let (true_minus, _, _) = plus_minus_split(&truth)?;
    let f = fidelity(&rec_minus.rho.padded(14)?, &true_minus)?;
    println!(
        "'-' fidelity with truth {f:.5}; '+' vacuum population {:.5}",
        rec_plus.rho.populations()[0]
    );
    println!(
        "E_N from the reconstruction {:.4}, true {:.4}",
        negativity_from_minus(&rec_minus.rho, None)?,
        log_negativity(&truth, LogBase::Two)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
