//! Builds the half-split squeezed vacuum in a truncated Fock space and checks
//! it against the two-mode squeezed vacuum it is locally equivalent to.

use std::f64::consts::FRAC_PI_4;

use cvdistill::fock::{
    apply_beamsplitter, apply_local_squeezing, squeezed_vacuum, squeezed_vacuum_tail, FockVector,
    Truncation, TwoModeFockState,
};
use cvdistill::subtraction::half_split_squeezed_vacuum;

pub fn run_example() -> cvdistill::Result<()> {
    let r = 0.4;
    let trunc = Truncation::for_squeezing(r, 1e-10, 10);
    println!(
        "r = {r}: cutoff {} keeps the tail at {:.2e}",
        trunc.dim,
        squeezed_vacuum_tail(r, trunc.dim)
    );

    let sv = squeezed_vacuum(r, trunc)?;
    let input = TwoModeFockState::product(&sv, &FockVector::vacuum(trunc.dim)?)?;
    let split = apply_beamsplitter(&input, FRAC_PI_4)?;
    println!("beam splitter leakage {:.2e}", split.leakage);

    let psi0 = half_split_squeezed_vacuum(r, Truncation::new(25))?;
    let local = apply_local_squeezing(&psi0, -r / 2.0, -r / 2.0, 1e-6)?.value;
    let tmsv = TwoModeFockState::two_mode_squeezed(r / 2.0, 25)?;
    println!(
        "fidelity with the two-mode squeezed vacuum: {:.12}",
        local.fidelity(&tmsv)
    );

    let lp = (r / 2.0_f64).tanh();
    for n in 0..4 {
        println!(
            "  |{n},{n}> amplitude {:+.6}   expected {:+.6}",
            local.coeff(n, n).re,
            (1.0 - lp * lp).sqrt() * lp.powi(n as i32)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
