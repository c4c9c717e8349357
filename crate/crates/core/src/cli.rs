//! Command-line front end.
//!
//! Settings are resolved in this order, later entries winning: built-in
//! defaults, the TOML file given with `--config`, command-line flags. The
//! output directory falls back to `$CVDISTILL_OUTPUT_DIR`, then to
//! `cvdistill-out`.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 truncation or
//! convergence failure, 3 a `verify` check failed. Errors are reported on
//! stderr as a single JSON object.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{
    bootstrap_uncertainty, db_to_r, distillation_curve, epr_crossover, negativity_vs_datasize,
    r_to_db, CurveConfig, DataSizeConfig, Scheme, CURVE_CSV_HEADER,
};
use crate::entanglement::{analytic_schmidt, entropy_of_entanglement, LogBase, SubtractedKind};
use crate::fock::{fidelity, DensityMatrix, StateJson, Truncation, DEFAULT_DIM};
use crate::io::{fmt_f64, write_atomic, write_json, SCHEMA_VERSION};
use crate::subtraction::{heralded_subtract, SubtractionSpec};
use crate::tomography::{
    mle_reconstruct, plus_minus_split, sample_protocol_pm, standard_phases, MleConfig,
    RNG_ALGORITHM,
};
use crate::verify::run_invariant_suite;
use crate::wigner::{WignerGrid, DEFAULT_GRID_EXTENT, DEFAULT_GRID_POINTS};
use crate::{Error, Result};

pub const OUTPUT_DIR_ENV: &str = "CVDISTILL_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "cvdistill-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub scheme: Scheme,
    /// Squeezing parameter; give either this or `db`.
    pub r: Option<f64>,
    /// Initial squeezing in dB, negative for squeezed (e.g. −3.2).
    pub db: Option<f64>,
    pub reflectance: f64,
    pub eta_apd: f64,
    pub eta_out: f64,
    /// Use the annihilation-operator limit instead of a finite tap.
    pub ideal: bool,
    pub dim: usize,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            scheme: Scheme::OnePhoton,
            r: None,
            db: None,
            reflectance: 0.05,
            eta_apd: 1.0,
            eta_out: 1.0,
            ideal: false,
            dim: DEFAULT_DIM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Squeezing range in dB magnitude for `curve`.
    pub db_min: f64,
    pub db_max: f64,
    pub db_step: f64,
    /// `r` range for `epr` and `entropy-curve`.
    pub r_max: f64,
    pub r_step: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            db_min: 1.0,
            db_max: 5.0,
            db_step: 0.25,
            r_max: 1.2,
            r_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    /// Total quadrature samples per mode.
    pub n: usize,
    pub phases: Vec<f64>,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n: 100_000,
            phases: standard_phases(),
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub d_list: Vec<usize>,
    /// Bootstrap resamples for the `tomo-sim` uncertainty; 0 disables it.
    pub bootstrap_resamples: usize,
    pub mle: MleConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            d_list: vec![1, 2, 4, 8, 16],
            bootstrap_resamples: 0,
            mle: MleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerConfig {
    pub extent: f64,
    pub points: usize,
}

impl Default for WignerConfig {
    fn default() -> Self {
        WignerConfig {
            extent: DEFAULT_GRID_EXTENT,
            points: DEFAULT_GRID_POINTS,
        }
    }
}

/// Complete settings of one run. Everything except `output_dir` is embedded
/// in the artifacts, so outputs do not depend on where they are written.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Subcommand this file is meant for; checked against the one invoked.
    pub pipeline: Option<String>,
    pub physics: PhysicsConfig,
    pub scan: ScanConfig,
    pub sampling: SamplingConfig,
    pub analysis: AnalysisConfig,
    pub wigner: WignerConfig,
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Squeezing parameter from `r` or `db`, defaulting to −3.2 dB.
    pub fn squeezing(&self) -> f64 {
        match (self.physics.r, self.physics.db) {
            (Some(r), _) => r,
            (None, Some(db)) => db_to_r(db),
            (None, None) => db_to_r(-3.2),
        }
    }

    pub fn truncation(&self) -> Truncation {
        Truncation::new(self.physics.dim)
    }

    pub fn subtraction_spec(&self) -> SubtractionSpec {
        let p = &self.physics;
        SubtractionSpec {
            pattern: p.scheme.pattern(),
            reflectance: p.reflectance,
            eta_apd: p.eta_apd,
            eta_out: p.eta_out,
            ideal: p.ideal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.physics;
        if p.r.is_some() && p.db.is_some() {
            return Err(config_err("give either physics.r or physics.db, not both"));
        }
        if let Some(db) = p.db {
            if !(db <= 0.0 && db.is_finite()) {
                return Err(config_err(format!(
                    "physics.db = {db}: squeezing is a non-positive dB value"
                )));
            }
        }
        if let Some(r) = p.r {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(config_err(format!("physics.r = {r} must be non-negative")));
            }
        }
        if !(0.0..0.5).contains(&p.reflectance) {
            return Err(config_err(format!(
                "physics.reflectance = {} not in [0, 0.5)",
                p.reflectance
            )));
        }
        for (name, eta) in [
            ("physics.eta_apd", p.eta_apd),
            ("physics.eta_out", p.eta_out),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(config_err(format!("{name} = {eta} not in (0, 1]")));
            }
        }
        if !(2..=200).contains(&p.dim) {
            return Err(config_err(format!(
                "physics.dim = {} not in [2, 200]",
                p.dim
            )));
        }
        let s = &self.scan;
        if !(s.db_step > 0.0 && s.db_min >= 0.0 && s.db_max >= s.db_min) {
            return Err(config_err(
                "scan needs 0 <= db_min <= db_max and db_step > 0",
            ));
        }
        if !(s.r_step > 0.0 && s.r_max >= s.r_step) {
            return Err(config_err("scan needs r_max >= r_step > 0"));
        }
        let sm = &self.sampling;
        if sm.phases.is_empty() || sm.n < sm.phases.len() {
            return Err(config_err(
                "sampling needs at least one phase and one sample per phase",
            ));
        }
        let a = &self.analysis;
        if a.d_list.is_empty() || a.d_list.contains(&0) {
            return Err(config_err(format!(
                "analysis.d_list = {:?} must be non-empty and positive",
                a.d_list
            )));
        }
        if a.bootstrap_resamples != 0 && a.bootstrap_resamples < 20 {
            return Err(config_err(
                "analysis.bootstrap_resamples must be 0 or at least 20",
            ));
        }
        if a.mle.dim < 2 || a.mle.bins < 2 || a.mle.max_iter == 0 {
            return Err(config_err(
                "analysis.mle needs dim >= 2, bins >= 2 and max_iter >= 1",
            ));
        }
        if !(self.wigner.extent > 0.0 && self.wigner.points >= 2) {
            return Err(config_err("wigner needs extent > 0 and points >= 2"));
        }
        Ok(())
    }

    /// `--output-dir`, then the file, then the environment, then the default.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

#[derive(Debug, Clone, Args, Default)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Artifact directory (overrides the file and $CVDISTILL_OUTPUT_DIR).
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct PhysicsArgs {
    /// undistilled, 1photon or 2photon.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// Squeezing parameter r.
    #[arg(long, conflicts_with = "db")]
    pub r: Option<f64>,
    /// Initial squeezing in dB (negative).
    #[arg(long, allow_negative_numbers = true)]
    pub db: Option<f64>,
    /// Tap reflectance.
    #[arg(long = "R")]
    pub reflectance: Option<f64>,
    /// Heralding-detector efficiency.
    #[arg(long)]
    pub eta_apd: Option<f64>,
    /// Transmittance of each output mode.
    #[arg(long)]
    pub eta_out: Option<f64>,
    /// Annihilation-operator limit instead of a finite tap.
    #[arg(long)]
    pub ideal: bool,
    /// Fock cutoff per mode.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct SamplingArgs {
    /// Total quadrature samples per mode.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated local-oscillator phases in radians.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub phases: Option<Vec<f64>>,
    /// Reconstruction cutoff.
    #[arg(long)]
    pub mle_dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distillation curve of E_N against initial squeezing.
    Curve {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long)]
        db_min: Option<f64>,
        #[arg(long)]
        db_max: Option<f64>,
        #[arg(long)]
        db_step: Option<f64>,
    },
    /// Entropy of entanglement of the ideal subtracted states against r.
    EntropyCurve {
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        r_step: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// EPR variances of the ideal states and the two-photon crossover.
    Epr {
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        r_step: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Wigner function of the "−" mode on a square grid.
    Wigner {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long)]
        extent: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Simulated homodyne tomography of the "+" and "−" modes.
    TomoSim {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Bootstrap resamples for the E_N uncertainty (0 disables).
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Reconstructed E_N against data-set size, extrapolated to N → ∞.
    Extrapolate {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Comma-separated partition counts.
        #[arg(long, value_delimiter = ',')]
        d_list: Option<Vec<usize>>,
    },
    /// Runs the invariant suite.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Curve { .. } => "curve",
            Command::EntropyCurve { .. } => "entropy-curve",
            Command::Epr { .. } => "epr",
            Command::Wigner { .. } => "wigner",
            Command::TomoSim { .. } => "tomo-sim",
            Command::Extrapolate { .. } => "extrapolate",
            Command::Verify => "verify",
        }
    }
}

impl PhysicsArgs {
    fn apply(&self, p: &mut PhysicsConfig) {
        if let Some(s) = self.scheme {
            p.scheme = s;
        }
        // a flag for one squeezing form replaces the other form from the file
        if let Some(r) = self.r {
            p.r = Some(r);
            p.db = None;
        }
        if let Some(db) = self.db {
            p.db = Some(db);
            p.r = None;
        }
        set(&mut p.reflectance, self.reflectance);
        set(&mut p.eta_apd, self.eta_apd);
        set(&mut p.eta_out, self.eta_out);
        set(&mut p.dim, self.dim);
        p.ideal |= self.ideal;
    }
}

impl SamplingArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.sampling.n, self.n);
        set(&mut cfg.sampling.seed, self.seed);
        set(&mut cfg.sampling.phases, self.phases.clone());
        set(&mut cfg.analysis.mle.dim, self.mle_dim);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Merges the config file and the flags of `command` into a validated config.
pub fn resolve_config(command: &Command, common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &cfg.pipeline {
        if p != command.name() {
            return Err(config_err(format!(
                "config is for pipeline {p:?}, not {:?}",
                command.name()
            )));
        }
    }
    cfg.pipeline = Some(command.name().to_string());
    match command {
        Command::Curve {
            physics,
            db_min,
            db_max,
            db_step,
        } => {
            physics.apply(&mut cfg.physics);
            set(&mut cfg.scan.db_min, *db_min);
            set(&mut cfg.scan.db_max, *db_max);
            set(&mut cfg.scan.db_step, *db_step);
        }
        Command::EntropyCurve { r_max, r_step, dim } | Command::Epr { r_max, r_step, dim } => {
            set(&mut cfg.scan.r_max, *r_max);
            set(&mut cfg.scan.r_step, *r_step);
            set(&mut cfg.physics.dim, *dim);
        }
        Command::Wigner {
            physics,
            extent,
            points,
        } => {
            physics.apply(&mut cfg.physics);
            set(&mut cfg.wigner.extent, *extent);
            set(&mut cfg.wigner.points, *points);
        }
        Command::TomoSim {
            physics,
            sampling,
            bootstrap,
        } => {
            physics.apply(&mut cfg.physics);
            sampling.apply(&mut cfg);
            set(&mut cfg.analysis.bootstrap_resamples, *bootstrap);
        }
        Command::Extrapolate {
            physics,
            sampling,
            d_list,
        } => {
            physics.apply(&mut cfg.physics);
            sampling.apply(&mut cfg);
            set(&mut cfg.analysis.d_list, d_list.clone());
        }
        Command::Verify => {}
    }
    if common.output_dir.is_some() {
        cfg.output_dir = common.output_dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// What a run produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub pipeline: String,
    pub artifacts: Vec<PathBuf>,
    /// One line per headline number, printed by the binary.
    pub lines: Vec<String>,
    /// `false` only when a `verify` check failed.
    pub passed: bool,
}

struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, body.as_bytes())?;
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, cfg: &RunConfig, body: serde_json::Value) -> Result<()> {
        let path = self.dir.join(name);
        write_json(
            &path,
            &json!({ "schema_version": SCHEMA_VERSION, "config": cfg, "result": body }),
        )?;
        self.written.push(path);
        Ok(())
    }
}

fn csv_line(fields: &[f64]) -> String {
    let mut s = fields
        .iter()
        .map(|&v| fmt_f64(v))
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    s
}

/// Runs one pipeline and writes its artifacts.
pub fn run(command: &Command, cfg: &RunConfig) -> Result<RunSummary> {
    let mut out = Outputs {
        dir: cfg.output_dir(),
        written: Vec::new(),
    };
    let mut lines = Vec::new();
    let mut passed = true;
    let r = cfg.squeezing();
    let trunc = cfg.truncation();
    match command {
        Command::Curve { .. } => {
            let s = &cfg.scan;
            let steps = ((s.db_max - s.db_min) / s.db_step + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=steps)
                .map(|k| db_to_r(-(s.db_min + k as f64 * s.db_step)))
                .collect();
            let p = &cfg.physics;
            let mut curve_cfg = CurveConfig::new(p.scheme, p.reflectance);
            curve_cfg.eta_apd = p.eta_apd;
            curve_cfg.eta_out = p.eta_out;
            curve_cfg.ideal = p.ideal;
            let reference = CurveConfig {
                scheme: Scheme::Undistilled,
                reflectance: 0.0,
                ..curve_cfg
            };
            let base = distillation_curve(&reference, &grid, trunc)?;
            let mut csv = format!("{CURVE_CSV_HEADER}\n");
            for pt in &base {
                csv.push_str(&pt.csv_row());
                csv.push('\n');
            }
            let mut gain = f64::INFINITY;
            if p.scheme != Scheme::Undistilled {
                let pts = distillation_curve(&curve_cfg, &grid, trunc)?;
                for (pt, b) in pts.iter().zip(&base) {
                    csv.push_str(&pt.csv_row());
                    csv.push('\n');
                    gain = gain.min(pt.log_negativity - b.log_negativity);
                }
                lines.push(format!(
                    "minimum E_N gain over the undistilled state: {gain:.6} ebit"
                ));
            }
            let stem = format!("curve_{}", p.scheme);
            out.text(&format!("{stem}.csv"), &csv)?;
            out.json(
                &format!("{stem}.json"),
                cfg,
                json!({ "points": grid.len(), "min_gain": gain.is_finite().then_some(gain) }),
            )?;
        }
        Command::EntropyCurve { .. } => {
            let s = &cfg.scan;
            let n = (s.r_max / s.r_step).round() as usize;
            let (csv, used) = grow_until_fits(s.r_max, cfg.physics.dim, |t| {
                let mut csv = String::from("r,squeezing_db,E0,E1,E2,E_N0,E_N1,E_N2\n");
                for k in 1..=n {
                    let r = k as f64 * s.r_step;
                    let mut e = [0.0; 3];
                    let mut en = [0.0; 3];
                    for (i, kind) in [
                        SubtractedKind::Zero,
                        SubtractedKind::One,
                        SubtractedKind::Two,
                    ]
                    .into_iter()
                    .enumerate()
                    {
                        let spec = analytic_schmidt(kind, r, t.dim)?;
                        e[i] = entropy_of_entanglement(&spec, LogBase::Two);
                        en[i] = spec.log_negativity(LogBase::Two);
                    }
                    csv.push_str(&csv_line(&[
                        r,
                        r_to_db(r),
                        e[0],
                        e[1],
                        e[2],
                        en[0],
                        en[1],
                        en[2],
                    ]));
                }
                Ok(csv)
            })?;
            out.text("entropy_curve.csv", &csv)?;
            out.json(
                "entropy_curve.json",
                cfg,
                json!({ "points": n, "log_base": 2, "dim_used": used }),
            )?;
        }
        Command::Epr { .. } => {
            let (scan, used) = grow_until_fits(cfg.scan.r_max, cfg.physics.dim, |t| {
                epr_crossover(cfg.scan.r_max, cfg.scan.r_step, t)
            })?;
            let mut csv = String::from("r,squeezing_db,var_undistilled,var_1photon,var_2photon\n");
            for p in &scan.scan {
                csv.push_str(&csv_line(&[
                    p.r,
                    p.squeezing_db,
                    p.var_undistilled,
                    p.var_one_photon,
                    p.var_two_photon,
                ]));
            }
            match (scan.r, scan.squeezing_db) {
                (Some(r), Some(db)) => {
                    lines.push(format!("two-photon EPR crossover: r = {r:.6} ({db:.4} dB)"))
                }
                _ => lines.push("no two-photon EPR crossover in the scanned range".into()),
            }
            out.text("epr_scan.csv", &csv)?;
            out.json("epr.json", cfg, json!({ "crossover_r": scan.r, "crossover_db": scan.squeezing_db, "dim_used": used }))?;
        }
        Command::Wigner { .. } => {
            let truth = heralded_subtract(r, cfg.subtraction_spec(), trunc)?.state;
            let (minus, _, _) = plus_minus_split(&truth)?;
            let grid = WignerGrid::square(&minus, cfg.wigner.extent, cfg.wigner.points)?;
            let (x0, p0, w0) = grid.argmin();
            lines.push(format!(
                "minimum W = {w0:.8} at ({x0:.4}, {p0:.4}); -1/pi = {:.8}",
                -std::f64::consts::FRAC_1_PI
            ));
            let stem = format!("wigner_{}", cfg.physics.scheme);
            out.text(&format!("{stem}.csv"), &grid.to_csv())?;
            let flat: Vec<f64> = grid.values.iter().flatten().copied().collect();
            out.json(
                &format!("{stem}.json"),
                cfg,
                json!({
                    "mode": "-",
                    "r": r,
                    "x": grid.x,
                    "p": grid.p,
                    "shape": [grid.p.len(), grid.x.len()],
                    "values": flat,
                    "convention": grid.convention,
                    "min": { "x": x0, "p": p0, "value": w0 },
                    "integral": grid.integral(),
                }),
            )?;
        }
        Command::TomoSim { .. } => {
            let truth = heralded_subtract(r, cfg.subtraction_spec(), trunc)?;
            let sm = &cfg.sampling;
            let (plus, minus) = sample_protocol_pm(&truth.state, &sm.phases, sm.n, sm.seed)?;
            plus.save(&out.dir, "tomo_plus")?;
            minus.save(&out.dir, "tomo_minus")?;
            for stem in ["tomo_plus", "tomo_minus"] {
                out.written.push(out.dir.join(format!("{stem}.csv")));
                out.written.push(out.dir.join(format!("{stem}.json")));
            }
            let mle = &cfg.analysis.mle;
            let rec_minus = converged(mle_reconstruct(&minus, mle)?)?;
            let rec_plus = converged(mle_reconstruct(&plus, mle)?)?;
            let (true_minus, _, residual) = plus_minus_split(&truth.state)?;
            let f_minus = fidelity_any_dim(&rec_minus.rho, &true_minus)?;
            let f_plus_vac = rec_plus.rho.populations()[0];
            let en_rec = crate::analysis::negativity_from_minus(&rec_minus.rho, None)?;
            let en_true = crate::entanglement::log_negativity(&truth.state, LogBase::Two)?;
            lines.push(format!("'-' mode fidelity with truth: {f_minus:.6}"));
            lines.push(format!("'+' mode vacuum fidelity: {f_plus_vac:.6}"));
            lines.push(format!("E_N reconstructed {en_rec:.6}, true {en_true:.6}"));
            let bootstrap = if cfg.analysis.bootstrap_resamples > 0 {
                let b = bootstrap_uncertainty(
                    &truth.state,
                    sm.n,
                    &sm.phases,
                    cfg.analysis.bootstrap_resamples,
                    sm.seed,
                    mle,
                )?;
                lines.push(format!("bootstrap E_N = {:.6} +/- {:.6}", b.mean, b.std));
                Some(b)
            } else {
                None
            };
            out.json(
                "tomo_report.json",
                cfg,
                json!({
                    "r": r,
                    "success_prob": truth.success_prob,
                    "rng": RNG_ALGORITHM,
                    "plus_minus_residual": residual,
                    "minus": { "fidelity_with_truth": f_minus, "iterations": rec_minus.iterations, "log_likelihood": rec_minus.log_likelihood },
                    "plus": { "vacuum_fidelity": f_plus_vac, "iterations": rec_plus.iterations, "log_likelihood": rec_plus.log_likelihood },
                    "log_negativity_reconstructed": en_rec,
                    "log_negativity_true": en_true,
                    "bootstrap": bootstrap,
                    "rho_minus": StateJson::from(&rec_minus.rho),
                    "rho_plus": StateJson::from(&rec_plus.rho),
                }),
            )?;
        }
        Command::Extrapolate { .. } => {
            let truth = heralded_subtract(r, cfg.subtraction_spec(), trunc)?.state;
            let en_true = crate::entanglement::log_negativity(&truth, LogBase::Two)?;
            let ds = DataSizeConfig {
                n_full: cfg.sampling.n,
                phases: cfg.sampling.phases.clone(),
                d_list: cfg.analysis.d_list.clone(),
                seed: cfg.sampling.seed,
                mle: cfg.analysis.mle,
            };
            let fit = negativity_vs_datasize(&truth, &ds)?;
            lines.push(format!(
                "E_N(N) = a + b/sqrt(N): a = {:.6}, b = {:.6}; true E_N = {en_true:.6}",
                fit.a, fit.b
            ));
            for w in &fit.warnings {
                lines.push(format!("warning: {w}"));
            }
            out.json(
                "extrapolation.json",
                cfg,
                json!({
                    "a": fit.a,
                    "b": fit.b,
                    "points": fit.points,
                    "residual": fit.residual,
                    "warnings": fit.warnings,
                    "log_negativity_true": en_true,
                    "relative_error": (fit.a - en_true) / en_true,
                }),
            )?;
        }
        Command::Verify => {
            let checks = run_invariant_suite();
            for c in &checks {
                lines.push(format!(
                    "{} {} (value {:.3e}, threshold {:.3e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold
                ));
            }
            passed = checks.iter().all(|c| c.passed);
            out.json(
                "verify.json",
                cfg,
                json!({ "passed": passed, "checks": checks }),
            )?;
        }
    }
    Ok(RunSummary {
        pipeline: command.name().into(),
        artifacts: out.written,
        lines,
        passed,
    })
}

/// Scans treat `dim` as a starting cutoff and grow it until the largest
/// squeezing of the scan fits the tail budget.
fn grow_until_fits<T>(
    r_max: f64,
    dim: usize,
    f: impl Fn(Truncation) -> Result<T>,
) -> Result<(T, usize)> {
    let mut t = Truncation::for_squeezing(r_max, Truncation::default().tail_tol, dim);
    loop {
        match f(t) {
            Err(Error::TruncationInsufficient { .. }) if t.dim < 120 => t.dim += 4,
            other => return other.map(|v| (v, t.dim)),
        }
    }
}

fn converged(
    res: crate::tomography::ReconstructionResult,
) -> Result<crate::tomography::ReconstructionResult> {
    if res.converged {
        Ok(res)
    } else {
        Err(Error::NotConverged {
            iterations: res.iterations,
        })
    }
}

fn fidelity_any_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let d = a.dim().max(b.dim());
    fidelity(&a.padded(d)?, &b.padded(d)?)
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::TruncationInsufficient { .. }
        | Error::Leakage { .. }
        | Error::NotConverged { .. }
        | Error::ZeroNorm
        | Error::ZeroProbability
        | Error::Consistency { .. } => 2,
        _ => 1,
    }
}

fn report_error(kind: &str, message: &str, code: i32) -> i32 {
    eprintln!(
        "{}",
        json!({ "error": kind, "message": message, "exit_code": code })
    );
    code
}

#[derive(Debug, Parser)]
#[command(
    name = "cvdistill",
    version,
    about = "Photon-subtraction entanglement distillation simulator"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => return report_error("config", e.to_string().trim(), 1),
    };
    let result = resolve_config(&cli.command, &cli.common).and_then(|cfg| run(&cli.command, &cfg));
    match result {
        Ok(summary) => {
            // a closed pipe downstream is not an error of the run
            let mut stdout = std::io::stdout().lock();
            for line in &summary.lines {
                let _ = writeln!(stdout, "{line}");
            }
            for path in &summary.artifacts {
                let _ = writeln!(stdout, "wrote {}", path.display());
            }
            if summary.passed {
                0
            } else {
                3
            }
        }
        Err(e) => report_error(e.kind(), &e.to_string(), exit_code(&e)),
    }
}
