use std::f64::consts::FRAC_1_PI;

use cvdistill::analysis::db_to_r;
use cvdistill::fock::{loss_channel, Mode, Truncation};
use cvdistill::subtraction::{ideal_subtract, HeraldPattern};
use cvdistill::tomography::plus_minus_split;
use cvdistill::wigner::{wigner_point, WignerGrid};

pub fn run_example() -> cvdistill::Result<()> {
    let rho = ideal_subtract(db_to_r(-3.2), HeraldPattern::ALICE, Truncation::new(20))?
        .state
        .to_density();
    let (minus, plus, residual) = plus_minus_split(&rho)?;
    println!(
        "'+'/'-' factorization residual {residual:.1e}, '+' vacuum population {:.8}",
        plus.populations()[0]
    );

    let grid = WignerGrid::square(&minus, 3.0, 61)?;
    let (x, p, w) = grid.argmin();
    println!(
        "min W = {w:.8} at ({x}, {p}), -1/pi = {:.8}, integral {:.6}",
        -FRAC_1_PI,
        grid.integral()
    );

    for eta in [1.0, 0.9, 0.7, 0.5] {
        let lossy = loss_channel(&minus, Mode::A, eta)?;
        println!(
            "eta = {eta}: W(0,0) = {:+.5}",
            wigner_point(&lossy, 0.0, 0.0)?
        );
    }

    let path = std::env::temp_dir().join("wigner_minus.csv");
    std::fs::write(&path, grid.to_csv())?;
    println!("grid written to {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
