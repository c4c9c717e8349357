//! Drives a pipeline from a TOML config, the same way the `cvdistill` binary
//! does, and lists the artifacts.

use cvdistill::cli::{run, Command, PhysicsArgs, RunConfig};

const CONFIG: &str = r#"
pipeline = "wigner"

[physics]
scheme = "1photon"
db = -3.2
ideal = true
dim = 16

[wigner]
extent = 3.0
points = 31
"#;

pub fn run_example() -> cvdistill::Result<()> {
    let mut cfg = RunConfig::from_toml(CONFIG)?;
    cfg.output_dir = Some(std::env::temp_dir().join("cvdistill-config-example"));
    cfg.validate()?;
    let cmd = Command::Wigner {
        physics: PhysicsArgs::default(),
        extent: None,
        points: None,
    };
    let summary = run(&cmd, &cfg)?;
    for line in &summary.lines {
        println!("{line}");
    }
    for path in &summary.artifacts {
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cvdistill::Result<()> {
    run_example()
}
