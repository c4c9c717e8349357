use cvdistill::verify::run_invariant_suite;

pub fn run_example() -> cvdistill::Result<()> {
    let checks = run_invariant_suite();
    for c in &checks {
        println!(
            "{:<4} {:<55} {:.3e}",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.value
        );
    }
    println!(
        "{}/{} checks passed",
        checks.iter().filter(|c| c.passed).count(),
        checks.len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
