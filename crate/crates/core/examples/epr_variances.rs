use cvdistill::analysis::{epr_crossover, epr_variance};
use cvdistill::fock::Truncation;
use cvdistill::subtraction::{ideal_subtract, HeraldPattern};

pub fn run_example() -> cvdistill::Result<()> {
    let rho = ideal_subtract(0.3, HeraldPattern::BOTH, Truncation::new(24))?
        .state
        .to_density();
    let v = epr_variance(&rho, true)?;
    println!(
        "two-photon subtracted, r = 0.3: Var(x-) = {:.4}, Var(p+) = {:.4} (vacuum units)",
        v.var_x_minus, v.var_p_plus
    );

    let scan = epr_crossover(1.0, 0.01, Truncation::new(40))?;
    for p in scan.scan.iter().step_by(20) {
        println!(
            "r = {:.2} ({:+.2} dB): {:.4} {:.4} {:.4}",
            p.r, p.squeezing_db, p.var_undistilled, p.var_one_photon, p.var_two_photon
        );
    }
    if let (Some(r), Some(db)) = (scan.r, scan.squeezing_db) {
        println!("two-photon subtraction stops helping at r = {r:.4} ({db:.3} dB)");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
