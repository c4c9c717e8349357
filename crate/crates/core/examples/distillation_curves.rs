use cvdistill::analysis::{db_to_r, distillation_curve, CurveConfig, Scheme};
use cvdistill::fock::Truncation;

pub fn run_example() -> cvdistill::Result<()> {
    let dbs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let grid: Vec<f64> = dbs.iter().map(|&d| db_to_r(-d)).collect();
    let trunc = Truncation::new(16);
    for eta_out in [1.0, 0.85] {
        let with_loss = |mut c: CurveConfig| {
            c.eta_out = eta_out;
            c
        };
        let base = distillation_curve(
            &with_loss(CurveConfig::new(Scheme::Undistilled, 0.0)),
            &grid,
            trunc,
        )?;
        let one = distillation_curve(
            &with_loss(CurveConfig::new(Scheme::OnePhoton, 0.05)),
            &grid,
            trunc,
        )?;
        let two = distillation_curve(
            &with_loss(CurveConfig::new(Scheme::TwoPhoton, 0.1)),
            &grid,
            trunc,
        )?;
        println!("eta_out = {eta_out}");
        println!("  dB   E_N(0)   E_N(1)   E_N(2)   P(1)       P(2)");
        for i in 0..grid.len() {
            println!(
                "  {:.0}   {:.4}   {:.4}   {:.4}   {:.3e}  {:.3e}",
                dbs[i],
                base[i].log_negativity,
                one[i].log_negativity,
                two[i].log_negativity,
                one[i].success_prob,
                two[i].success_prob
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
