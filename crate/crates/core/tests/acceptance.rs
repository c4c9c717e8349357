//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero only on a failure that is not a known, analysed deviation.

use std::f64::consts::{FRAC_1_PI, LOG2_E};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use cvdistill::analysis::{
    db_to_r, distillation_curve, epr_crossover, negativity_vs_datasize, r_to_db, CurveConfig,
    DataSizeConfig, Scheme,
};
use cvdistill::cli::{resolve_config, run, Cli};
use cvdistill::entanglement::{
    analytic_schmidt, entropy_of_entanglement, herald_norm_one, herald_norm_two, log_negativity,
    schmidt, LogBase, SubtractedKind,
};
use cvdistill::fock::{
    apply_local_squeezing, fidelity, squeezed_vacuum, DensityMatrix, FockVector, Truncation,
    TwoModeFockState,
};
use cvdistill::subtraction::{
    half_split_squeezed_vacuum, heralded_subtract, ideal_subtract,
    verify_model_equivalence_patterns, HeraldPattern, SubtractionSpec,
};
use cvdistill::tomography::{
    mle_reconstruct, plus_minus_split, sample_protocol_pm, standard_phases, MleConfig,
};
use cvdistill::wigner::{factorized_two_mode_wigner, wigner_point, wigner_two_mode_point};
use cvdistill::Result;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
    /// Why a failure is expected; `None` makes any failure fatal.
    known: Option<String>,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Outcome {
            passed,
            detail,
            known: None,
        }
    }
}

const KINDS: [SubtractedKind; 3] = [
    SubtractedKind::Zero,
    SubtractedKind::One,
    SubtractedKind::Two,
];

fn pattern_of(kind: SubtractedKind) -> HeraldPattern {
    match kind {
        SubtractedKind::Zero => HeraldPattern::NONE,
        SubtractedKind::One => HeraldPattern::ALICE,
        SubtractedKind::Two => HeraldPattern::BOTH,
    }
}

fn c1_local_unitary() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for r in [0.2, 0.4, 0.8] {
        let psi0 = half_split_squeezed_vacuum(r, Truncation::new(25))?;
        let local = apply_local_squeezing(&psi0, -r / 2.0, -r / 2.0, 1.0)?.value;
        let f = local.fidelity(&TwoModeFockState::two_mode_squeezed(r / 2.0, 25)?);
        parts.push(format!("F(r={r})={f:.8}"));
        worst = worst.max(1.0 - f);
    }
    Ok(Outcome::new(
        worst <= 1e-4,
        format!("{} (need >= 0.9999)", parts.join(", ")),
    ))
}

fn c2_model_equivalence() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for r in [0.4, 0.8] {
        let t = Truncation::for_squeezing(r, 1e-6, 12);
        for refl in [0.05, 0.1, 0.2] {
            for rep in verify_model_equivalence_patterns(r, refl, &HeraldPattern::ALL, t)? {
                let f = rep.state_fidelity.map(|f| (1.0 - f).abs()).unwrap_or(0.0);
                worst = worst
                    .max(f)
                    .max((rep.prob_split_first - rep.prob_tap_first).abs());
            }
        }
    }
    Ok(Outcome::new(
        worst <= 1e-9,
        format!("worst deviation {worst:.3e} over 24 cases (tol 1e-9)"),
    ))
}

fn c3_closed_form_negativity() -> Result<Outcome> {
    let mut failing = Vec::new();
    let mut parts = Vec::new();
    for r in [0.2, 0.4, 0.6, 0.8] {
        let en = log_negativity(
            &half_split_squeezed_vacuum(r, Truncation::new(25))?.to_density(),
            LogBase::Two,
        )?;
        let err = (en - r * LOG2_E).abs();
        parts.push(format!("r={r}: {err:.2e}"));
        if err > 1e-6 {
            failing.push(r);
        }
    }
    let r = 0.8;
    let en40 = log_negativity(
        &half_split_squeezed_vacuum(r, Truncation::new(40))?.to_density(),
        LogBase::Two,
    )?;
    let err40 = (en40 - r * LOG2_E).abs();
    let mut out = Outcome::new(
        failing.is_empty(),
        format!(
            "|E_N - r log2 e| at D=25: {} (tol 1e-6); r=0.8 at D=40: {err40:.2e}",
            parts.join(", ")
        ),
    );
    if failing == [0.8] && err40 <= 1e-6 {
        out.known = Some(
            "D=25 truncates the r=0.8 state at the 1e-5 level; the same check passes at D=40"
                .into(),
        );
    }
    Ok(out)
}

fn c4_schmidt() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for r in [0.2, 0.5, 1.0] {
        let t = Truncation::for_squeezing(r, 1e-14, 40);
        for kind in KINDS {
            let state = ideal_subtract(r, pattern_of(kind), t)?;
            let numeric = schmidt(&state.state);
            let analytic = analytic_schmidt(kind, r, t.dim)?;
            for (a, b) in numeric.coefficients.iter().zip(&analytic.coefficients) {
                worst = worst.max((a - b).abs());
            }
            let norm = match kind {
                SubtractedKind::Zero => 1.0,
                SubtractedKind::One => herald_norm_one(r),
                SubtractedKind::Two => herald_norm_two(r),
            };
            worst = worst.max((state.herald_weight - norm).abs());
        }
    }
    Ok(Outcome::new(
        worst <= 1e-8,
        format!("worst spectrum/norm deviation {worst:.3e} (tol 1e-8)"),
    ))
}

fn entropy(kind: SubtractedKind, r: f64) -> Result<f64> {
    let t = Truncation::for_squeezing(r, 1e-14, 40);
    Ok(entropy_of_entanglement(
        &analytic_schmidt(kind, r, t.dim)?,
        LogBase::Two,
    ))
}

fn c5_entropy_ordering() -> Result<Outcome> {
    let mut one_over_zero = true;
    let mut two_over_one = Vec::new();
    for k in 1..=20 {
        let r = 0.05 * k as f64;
        let e = [
            entropy(SubtractedKind::Zero, r)?,
            entropy(SubtractedKind::One, r)?,
            entropy(SubtractedKind::Two, r)?,
        ];
        one_over_zero &= e[1] > e[0];
        two_over_one.push((r, e[2] > e[1]));
    }
    let limit = entropy(SubtractedKind::One, 0.01)?;
    let limit_ok = (limit - 1.0).abs() <= 0.01;
    let held = two_over_one.iter().filter(|p| p.1).count();
    let first_held = two_over_one.iter().find(|p| p.1).map(|p| p.0);
    let monotone_after = first_held
        .map(|r0| two_over_one.iter().all(|p| p.1 == (p.0 >= r0)))
        .unwrap_or(false);
    let mut out = Outcome::new(
        one_over_zero && limit_ok && held == 20,
        format!(
            "E1>E0 on grid: {one_over_zero}; E2>E1 at {held}/20 points (from r={}); E1(0.01)={limit:.5}",
            first_held.map_or("-".into(), |r| format!("{r:.2}"))
        ),
    );
    if one_over_zero && limit_ok && monotone_after && first_held.is_some_and(|r| r > 0.5) {
        out.known = Some(
            "E(Ψ₂) - E(Ψ₁) changes sign once, at r ≈ 0.568; below it the one-photon state is more entangled"
                .into(),
        );
    }
    Ok(out)
}

fn c6_distillation_gain() -> Result<Outcome> {
    let grid = |lo: f64, hi: f64| -> Vec<f64> {
        let n = ((hi - lo) / 0.25).round() as usize;
        (0..=n).map(|k| db_to_r(-(lo + 0.25 * k as f64))).collect()
    };
    let t = Truncation::for_squeezing(db_to_r(-5.0), 1e-6, 20);
    let min_gain = |scheme, refl, eta_out, g: &[f64]| -> Result<f64> {
        let mut cfg = CurveConfig::new(scheme, refl);
        cfg.eta_out = eta_out;
        let base = CurveConfig {
            scheme: Scheme::Undistilled,
            reflectance: 0.0,
            ..cfg
        };
        let a = distillation_curve(&cfg, g, t)?;
        let b = distillation_curve(&base, g, t)?;
        Ok(a.iter()
            .zip(&b)
            .map(|(x, y)| x.log_negativity - y.log_negativity)
            .fold(f64::INFINITY, f64::min))
    };
    let full = grid(1.0, 5.0);
    let lossy = grid(2.0, 4.0);
    let g = [
        min_gain(Scheme::OnePhoton, 0.05, 1.0, &full)?,
        min_gain(Scheme::TwoPhoton, 0.1, 1.0, &full)?,
        min_gain(Scheme::OnePhoton, 0.05, 0.85, &lossy)?,
        min_gain(Scheme::TwoPhoton, 0.1, 0.85, &lossy)?,
    ];
    Ok(Outcome::new(
        g.iter().all(|&x| x > 0.0),
        format!(
            "min gain lossless 1-5 dB: 1photon {:.4}, 2photon {:.4}; eta_out=0.85 2-4 dB: 1photon {:.4}, 2photon {:.4}",
            g[0], g[1], g[2], g[3]
        ),
    ))
}

fn c7_epr() -> Result<Outcome> {
    let r_max = db_to_r(-6.0);
    let scan = epr_crossover(r_max, 0.002, Truncation::for_squeezing(r_max, 1e-10, 20))?;
    let one_ok = scan
        .scan
        .iter()
        .all(|p| p.var_one_photon >= p.var_undistilled);
    let below_ok = scan
        .scan
        .iter()
        .filter(|p| p.squeezing_db.abs() < 3.5)
        .all(|p| p.var_two_photon < p.var_undistilled);
    let above_ok = scan
        .scan
        .iter()
        .filter(|p| p.squeezing_db.abs() > 4.5)
        .all(|p| p.var_two_photon > p.var_undistilled);
    // scan dB values are signed; the criterion is stated in magnitudes
    let db = scan.squeezing_db.map(f64::abs);
    let inside = db.is_some_and(|d| (3.5..=4.5).contains(&d));
    let mut out = Outcome::new(
        one_ok && below_ok && above_ok && inside,
        format!(
            "Var1>=Var0: {one_ok}; Var2<Var0 below 3.5 dB: {below_ok}; Var2>Var0 above 4.5 dB: {above_ok}; crossover {} dB",
            db.map_or("none".into(), |d| format!("{d:.4}"))
        ),
    );
    let exact = r_to_db(0.5f64.atanh()).abs();
    if one_ok && below_ok && db.is_some_and(|d| (d - exact).abs() < 0.01) {
        out.known = Some(format!(
            "the ideal-model crossover sits at tanh r = 1/2, i.e. {exact:.4} dB, outside [3.5, 4.5]"
        ));
    }
    Ok(out)
}

fn c8_wigner() -> Result<Outcome> {
    let r = db_to_r(-3.2);
    let t = Truncation::new(24);
    let psi1 = ideal_subtract(r, HeraldPattern::ALICE, t)?
        .state
        .to_density();
    let (minus, plus, _) = plus_minus_split(&psi1)?;
    let parity = (wigner_point(&minus, 0.0, 0.0)? + FRAC_1_PI).abs();
    let sub = squeezed_vacuum(r, Truncation::new(48))?.annihilate();
    let amps: Vec<f64> = (0..24).map(|n| sub.amplitude(n).re).collect();
    let minus_exact = FockVector::from_real(&amps)?.normalized()?.to_density();
    let vac = DensityMatrix::vacuum(24, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let point: [f64; 4] = std::array::from_fn(|_| 3.0 * rng.random::<f64>() - 1.5);
        let full = wigner_two_mode_point(&psi1, point)?;
        worst = worst.max((full - factorized_two_mode_wigner(&minus_exact, &vac, point)?).abs());
    }
    let plus_vac = plus.populations()[0];
    Ok(Outcome::new(
        parity <= 1e-8 && worst <= 1e-6,
        format!(
            "|W_-(0,0) + 1/pi| = {parity:.2e} (tol 1e-8); factorization worst {worst:.2e} at 10 points (tol 1e-6); '+' vacuum weight {plus_vac:.12}"
        ),
    ))
}

fn c9_tomography() -> Result<Outcome> {
    let r = db_to_r(-3.2);
    let truth = heralded_subtract(
        r,
        SubtractionSpec::ideal(HeraldPattern::ALICE),
        Truncation::new(20),
    )?
    .state;
    let (plus, minus) = sample_protocol_pm(&truth, &standard_phases(), 100_000, 2024)?;
    let cfg = MleConfig {
        dim: 14,
        ..MleConfig::default()
    };
    let rec_minus = mle_reconstruct(&minus, &cfg)?;
    let rec_plus = mle_reconstruct(&plus, &cfg)?;
    let (true_minus, _, _) = plus_minus_split(&truth)?;
    let f = fidelity(&rec_minus.rho.padded(true_minus.dim())?, &true_minus)?;
    let vac = rec_plus.rho.populations()[0];
    Ok(Outcome::new(
        f >= 0.99 && vac > 0.99,
        format!("'-' fidelity {f:.5} (need >= 0.99); '+' vacuum fidelity {vac:.5} (need > 0.99)"),
    ))
}

fn c10_extrapolation() -> Result<Outcome> {
    let r = db_to_r(-3.2);
    let truth = heralded_subtract(
        r,
        SubtractionSpec::ideal(HeraldPattern::ALICE),
        Truncation::new(20),
    )?
    .state;
    let en_true = log_negativity(&truth, LogBase::Two)?;
    let fit = negativity_vs_datasize(&truth, &DataSizeConfig::default())?;
    let rel = (fit.a - en_true) / en_true;
    // points run from the full record (d = 1) to the smallest subsets
    let decreasing = fit.points.len() == 5 && fit.points.windows(2).all(|w| w[0].mean < w[1].mean);
    let means: Vec<String> = fit
        .points
        .iter()
        .map(|p| format!("{:.4}", p.mean))
        .collect();
    Ok(Outcome::new(
        rel.abs() <= 0.02 && decreasing,
        format!(
            "a = {:.5}, true E_N = {en_true:.5}, relative error {:+.3}% (tol 2%); means by N_d descending [{}], strictly decreasing in N_d: {decreasing}",
            fit.a,
            100.0 * rel,
            means.join(", ")
        ),
    ))
}

/// Parses and runs a subcommand in-process without printing.
fn run_cli(args: &[&str], dir: &Path) -> Result<()> {
    let dir = dir.display().to_string();
    let argv = std::iter::once("cvdistill")
        .chain(args.iter().copied())
        .chain(["--output-dir", dir.as_str()]);
    let cli = Cli::try_parse_from(argv).map_err(|e| cvdistill::Error::Config(e.to_string()))?;
    let cfg = resolve_config(&cli.command, &cli.common)?;
    run(&cli.command, &cfg).map(|_| ())
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn c11_determinism() -> Result<Outcome> {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let _ = std::fs::remove_dir_all(&root);
    let runs: [&[&str]; 2] = [
        &[
            "tomo-sim",
            "--n",
            "30000",
            "--mle-dim",
            "10",
            "--seed",
            "77",
        ],
        &[
            "extrapolate",
            "--n",
            "60000",
            "--d-list",
            "1,2,4",
            "--mle-dim",
            "10",
            "--seed",
            "77",
        ],
    ];
    let mut compared = 0;
    let mut identical = true;
    for (i, args) in runs.iter().enumerate() {
        let (a, b) = (root.join(format!("{i}a")), root.join(format!("{i}b")));
        run_cli(args, &a)?;
        run_cli(args, &b)?;
        let (fa, fb) = (read_all(&a), read_all(&b));
        compared += fa.len();
        identical &= !fa.is_empty() && fa == fb;
    }
    Ok(Outcome::new(
        identical,
        format!("{compared} artifacts from tomo-sim and extrapolate compared byte for byte: identical = {identical}"),
    ))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

const CRITERIA: &[Criterion] = &[
    ("local-unitary equivalence", c1_local_unitary),
    ("split-first vs tap-first models", c2_model_equivalence),
    (
        "closed-form negativity of the half-split state",
        c3_closed_form_negativity,
    ),
    ("analytic Schmidt spectra and herald norms", c4_schmidt),
    ("entanglement ordering", c5_entropy_ordering),
    ("distillation gain", c6_distillation_gain),
    ("EPR variances", c7_epr),
    ("Wigner parity and factorization", c8_wigner),
    ("tomography round trip", c9_tomography),
    ("negativity extrapolation", c10_extrapolation),
    ("determinism of tomo-sim and extrapolate", c11_determinism),
];

fn main() {
    let mut unexpected = Vec::new();
    let (mut pass, mut known) = (0, 0);
    for (i, (name, f)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "{tag} [{:>2}] {name}: {} ({secs:.1} s)",
            i + 1,
            outcome.detail
        );
        match (outcome.passed, &outcome.known) {
            (true, _) => pass += 1,
            (false, Some(why)) => {
                known += 1;
                println!("          known deviation: {why}");
            }
            (false, None) => unexpected.push(i + 1),
        }
    }
    println!(
        "acceptance: {pass} passed, {known} failed with a known deviation, {} unexpected failures",
        unexpected.len()
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
