use cvdistill::entanglement::LogBase;
use cvdistill::fock::{loss_channel, Mode, Truncation};
use cvdistill::gaussian::{covariance_of, hssv_covariance, local_squeeze_cov, tmsv_covariance};
use cvdistill::subtraction::half_split_squeezed_vacuum;

pub fn run_example() -> cvdistill::Result<()> {
    let r = 0.6;
    let rho = half_split_squeezed_vacuum(r, Truncation::new(30))?.to_density();
    let numeric = covariance_of(&rho)?;
    let closed = hssv_covariance(r);
    println!(
        "max |V_fock - V_closed| = {:.2e}",
        (numeric.matrix() - closed.matrix()).abs().max()
    );
    println!(
        "symplectic eigenvalues {:?}",
        closed.symplectic_eigenvalues()
    );
    println!(
        "Gaussian E_N = {:.6} ebit",
        closed.gaussian_log_negativity(LogBase::Two)
    );

    let back = local_squeeze_cov(&closed, -r / 2.0, -r / 2.0);
    println!(
        "locally squeezed to TMSV: deviation {:.2e}",
        (back.matrix() - tmsv_covariance(r / 2.0).matrix())
            .abs()
            .max()
    );

    let lossy = covariance_of(&loss_channel(
        &loss_channel(&rho, Mode::A, 0.8)?,
        Mode::B,
        0.8,
    )?)?;
    println!(
        "after 20% loss per arm: Var(x-) = {:.4}, Var(p+) = {:.4}",
        lossy.var_x_minus(),
        lossy.var_p_plus()
    );
    print!("{}", lossy.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
