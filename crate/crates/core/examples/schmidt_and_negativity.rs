//! Schmidt spectra of the subtracted states, computed twice: from the closed
//! form coefficient matrices and from an SVD of the simulated state.

use cvdistill::entanglement::{
    analytic_schmidt, entropy_of_entanglement, log_negativity, schmidt, LogBase, SubtractedKind,
};
use cvdistill::fock::Truncation;
use cvdistill::subtraction::{ideal_subtract, HeraldPattern};

pub fn run_example() -> cvdistill::Result<()> {
    let r = 0.5;
    let trunc = Truncation::new(30);
    let cases = [
        (SubtractedKind::Zero, HeraldPattern::NONE),
        (SubtractedKind::One, HeraldPattern::ALICE),
        (SubtractedKind::Two, HeraldPattern::BOTH),
    ];
    for (kind, pattern) in cases {
        let state = ideal_subtract(r, pattern, trunc)?.state;
        let numeric = schmidt(&state);
        let analytic = analytic_schmidt(kind, r, 30)?;
        let worst = numeric
            .coefficients
            .iter()
            .zip(&analytic.coefficients)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "{kind:?}: E = {:.6} ebit, E_N = {:.6} ebit (density route {:.6}), spectra agree to {worst:.1e}",
            entropy_of_entanglement(&analytic, LogBase::Two),
            analytic.log_negativity(LogBase::Two),
            log_negativity(&state.to_density(), LogBase::Two)?,
        );
        println!(
            "    leading coefficients {:.5?}",
            &analytic.coefficients[..4]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
