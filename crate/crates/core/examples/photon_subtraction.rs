use cvdistill::analysis::db_to_r;
use cvdistill::fock::{fidelity_pure, Truncation};
use cvdistill::subtraction::{
    heralded_subtract, ideal_subtract, verify_model_equivalence_patterns, HeraldPattern,
    SubtractionSpec,
};

pub fn run_example() -> cvdistill::Result<()> {
    let r = db_to_r(-3.2);
    let trunc = Truncation::new(14);

    let ideal = ideal_subtract(r, HeraldPattern::ALICE, Truncation::new(20))?;
    println!(
        "a_A|Psi0>: norm^2 {:.6}, commutes with the splitter to {:.1e}",
        ideal.herald_weight,
        1.0 - ideal.commutation_fidelity
    );

    // finite tap with on/off detectors
    let ideal14 = ideal_subtract(r, HeraldPattern::ALICE, trunc)?;
    for reflectance in [0.01, 0.05, 0.1] {
        let spec = SubtractionSpec::tapped(HeraldPattern::ALICE, reflectance);
        let h = heralded_subtract(r, spec, trunc)?;
        println!(
            "R = {reflectance:<4}  P(click) = {:.3e}  fidelity with ideal = {:.6}",
            h.success_prob,
            fidelity_pure(&h.state, &ideal14.state)?
        );
    }

    let lossy = heralded_subtract(
        r,
        SubtractionSpec::tapped(HeraldPattern::BOTH, 0.1).with_losses(0.6, 0.85),
        trunc,
    )?;
    println!(
        "two clicks, eta_apd 0.6, eta_out 0.85: P = {:.3e}, purity {:.4}",
        lossy.success_prob,
        lossy.state.purity()
    );

    for rep in verify_model_equivalence_patterns(r, 0.05, &HeraldPattern::ALL, Truncation::new(10))?
    {
        println!(
            "pattern ({},{}): split-first P = {:.6e}, tap-first P = {:.6e}",
            rep.pattern.n_a, rep.pattern.n_b, rep.prob_split_first, rep.prob_tap_first
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
