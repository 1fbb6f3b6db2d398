//! `thardy` — command-line laboratory for two-time Hardy tests.
//!
//! Four verbs: `verify` reproduces a named construction (or checks a setting
//! file) and exits 0 only if the test succeeds and the 1/4 bound holds;
//! `scan` sweeps a one-parameter family and emits the probability curve;
//! `optimize` runs the black-box penalty search; `classical` enumerates
//! deterministic strategies. Every command prints a canonical JSON report to
//! stdout. Exit codes: 0 success, 1 verification failure, 2 parse or
//! validation failure.

mod report;
mod setting_file;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use thardy_core::hardy::{
    classify_condition_sets, evaluate, verify_bound, BoundCheck, ConditionSetClassification,
    HardyReport, MeasurementSetting, DEFAULT_P4_MIN, DEFAULT_ZERO_TOL,
};
use thardy_core::optimize::{
    maximize_success, recipe_setting, scan_family, OptResult, RecipeInput, ScanFamily, SearchConfig,
};
use thardy_core::qcore::{PureState, DEFAULT_CLUSTER_TOL};
use thardy_core::realism::{classical_max_success_relaxed, RealismVerdict};
use thardy_core::spin::{
    general_spin_setting, solve_theta32, spin1_optimal_alpha, spin1_setting, spin32_setting,
    SpinQuantum,
};

use report::{to_canonical_json, ReportFile, Tolerances};
use setting_file::SettingFile;

#[derive(Parser)]
#[command(name = "thardy", version, about = "Two-time Hardy test laboratory")]
struct Cli {
    /// Probability tolerance under which the three zero conditions count as
    /// satisfied (vector residuals use its square root)
    #[arg(long, global = true, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,

    /// Threshold above which the success probability counts as positive
    #[arg(long, global = true, default_value_t = DEFAULT_P4_MIN)]
    p4_min: f64,

    /// Eigenvalue clustering tolerance, relative to the spectral radius
    #[arg(long, global = true, default_value_t = DEFAULT_CLUSTER_TOL)]
    cluster_tol: f64,

    /// Seed for stochastic commands; echoed into reports
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce a named construction, or check a setting file
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
        /// Write the constructed setting (and state) as a setting file
        #[arg(long, global = true)]
        dump_setting: Option<PathBuf>,
    },
    /// Sweep a one-parameter family and emit the probability curve
    Scan {
        /// Which family to sweep
        family: FamilyArg,
        /// Grid as start:stop:count (inclusive endpoints)
        grid: String,
        /// Also write the curve as CSV (param,p1,p2,p3,p4)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Search for the maximal success probability in a given dimension
    Optimize {
        dim: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Enumerate classical deterministic strategies
    Classical {
        /// Relax the three zero conditions to probability <= epsilon each
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
}

#[derive(Subcommand)]
enum VerifyTarget {
    /// Three-level construction at its optimal angle
    Spin1,
    /// Four-level construction at the angle-equation root
    Spin32,
    /// Two-level maximal construction
    Qubit,
    /// General-spin candidate found by angle search, e.g. 2 or 5/2
    Conjecture { spin: String },
    /// A setting file with a state
    File { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(name = "spin1-alpha")]
    Spin1Alpha,
    #[value(name = "spin32-theta")]
    Spin32Theta,
    #[value(name = "recipe-dim")]
    RecipeDim,
}

impl From<FamilyArg> for ScanFamily {
    fn from(value: FamilyArg) -> Self {
        match value {
            FamilyArg::Spin1Alpha => ScanFamily::Spin1Alpha,
            FamilyArg::Spin32Theta => ScanFamily::Spin32Theta,
            FamilyArg::RecipeDim => ScanFamily::RecipeDim,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let tolerances = Tolerances {
        zero_tol: cli.zero_tol,
        p4_min: cli.p4_min,
        cluster_tol: cli.cluster_tol,
    };
    match cli.command {
        Command::Verify {
            target,
            dump_setting,
        } => run_verify(target, dump_setting, tolerances, cli.seed),
        Command::Scan { family, grid, out } => run_scan(family, &grid, out, tolerances, cli.seed),
        Command::Optimize { dim, restarts } => run_optimize(dim, restarts, tolerances, cli.seed),
        Command::Classical { epsilon } => run_classical(epsilon, tolerances, cli.seed),
    }
}

#[derive(Serialize)]
struct VerifyPayload {
    target: String,
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    hardy: HardyReport,
    classification: ConditionSetClassification,
    /// Present only when the zero conditions hold, i.e. the bound applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<BoundCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    structure: Option<StructureCheckPayload>,
    passed: bool,
}

#[derive(Serialize)]
struct StructureCheckPayload {
    proj_norm_sq: f64,
    phase_eta: f64,
    residual: f64,
}

fn run_verify(
    target: VerifyTarget,
    dump_setting: Option<PathBuf>,
    tolerances: Tolerances,
    seed: Option<u64>,
) -> anyhow::Result<u8> {
    let mut angle = None;
    let mut structure = None;
    let (name, setting, psi): (String, MeasurementSetting, PureState) = match target {
        VerifyTarget::Spin1 => {
            let s = spin1_setting(spin1_optimal_alpha())?;
            angle = Some(s.angle);
            ("spin1".into(), s.setting, s.psi)
        }
        VerifyTarget::Spin32 => {
            let s = spin32_setting(solve_theta32())?;
            angle = Some(s.angle);
            ("spin32".into(), s.setting, s.psi)
        }
        VerifyTarget::Qubit => {
            let input = RecipeInput::canonical(2, 1, 1)?;
            let (setting, psi) = recipe_setting(&input)?;
            ("qubit".into(), setting, psi)
        }
        VerifyTarget::Conjecture { spin } => {
            let s = parse_spin(&spin)?;
            let g = general_spin_setting(s)?;
            angle = Some(g.theta);
            structure = Some(StructureCheckPayload {
                proj_norm_sq: g.proj_norm_sq,
                phase_eta: g.phase_eta,
                residual: g.structure_residual,
            });
            (
                format!("conjecture {s}"),
                g.spin_setting.setting,
                g.spin_setting.psi,
            )
        }
        VerifyTarget::File { path } => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let file = SettingFile::parse(&text)?;
            let (setting, state) = file.to_setting(tolerances.cluster_tol)?;
            let psi = state.context("setting file has no state; verification needs one")?;
            (format!("file {}", path.display()), setting, psi)
        }
    };

    if let Some(path) = &dump_setting {
        let file = SettingFile::from_setting(&setting, Some(&psi));
        fs::write(path, to_canonical_json(&file)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }

    let hardy = evaluate(&setting, &psi, tolerances.zero_tol, tolerances.p4_min)?;
    let classification = classify_condition_sets(&setting, &psi, tolerances.zero_tol.sqrt())?;
    let bound = verify_bound(&setting, &psi, tolerances.zero_tol).ok();
    let passed = hardy.success && bound.as_ref().is_some_and(|b| b.holds);

    let payload = VerifyPayload {
        target: name.clone(),
        dim: setting.dim(),
        angle,
        hardy,
        classification,
        bound,
        structure,
        passed,
    };
    emit(ReportFile::new(
        format!("verify {name}"),
        seed,
        tolerances,
        payload,
    ))?;
    Ok(if passed { 0 } else { 1 })
}

#[derive(Serialize)]
struct ScanPayload {
    family: &'static str,
    grid: GridSpec,
    argmax_param: f64,
    max_p4: f64,
    points: Vec<thardy_core::optimize::CurvePoint>,
}

#[derive(Clone, Copy, Serialize)]
struct GridSpec {
    start: f64,
    stop: f64,
    count: usize,
}

fn run_scan(
    family: FamilyArg,
    grid_spec: &str,
    out: Option<PathBuf>,
    tolerances: Tolerances,
    seed: Option<u64>,
) -> anyhow::Result<u8> {
    let spec = parse_grid(grid_spec)?;
    let grid: Vec<f64> = (0..spec.count)
        .map(|k| {
            if spec.count == 1 {
                spec.start
            } else {
                spec.start + (spec.stop - spec.start) * k as f64 / (spec.count - 1) as f64
            }
        })
        .collect();
    let family: ScanFamily = family.into();
    let curve = scan_family(family, &grid)?;

    if let Some(path) = &out {
        let mut csv = String::from("param,p1,p2,p3,p4\n");
        for p in &curve.points {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                p.param, p.p1, p.p2, p.p3, p.p4
            ));
        }
        fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let (argmax_param, max_p4) = curve.argmax();
    let payload = ScanPayload {
        family: family.name(),
        grid: spec,
        argmax_param,
        max_p4,
        points: curve.points,
    };
    emit(ReportFile::new(
        format!("scan {} {grid_spec}", family.name()),
        seed,
        tolerances,
        payload,
    ))?;
    Ok(0)
}

#[derive(Serialize)]
struct OptimizePayload {
    dim: usize,
    result: OptResult,
    passed: bool,
}

fn run_optimize(
    dim: usize,
    restarts: usize,
    tolerances: Tolerances,
    seed: Option<u64>,
) -> anyhow::Result<u8> {
    let config = SearchConfig::new(restarts, seed.unwrap_or(0));
    let result = maximize_success(dim, &config)?;
    let residual_sum: f64 = result.residuals.iter().sum();
    let passed = result.best_p4 >= 0.24 && residual_sum <= 1e-8 && result.best_p4 <= 0.25 + 1e-6;
    let payload = OptimizePayload {
        dim,
        result,
        passed,
    };
    emit(ReportFile::new(
        format!("optimize {dim} --restarts {restarts}"),
        seed,
        tolerances,
        payload,
    ))?;
    Ok(if passed { 0 } else { 1 })
}

fn run_classical(epsilon: f64, tolerances: Tolerances, seed: Option<u64>) -> anyhow::Result<u8> {
    if !(0.0..=1.0).contains(&epsilon) {
        bail!("epsilon must lie in [0, 1], got {epsilon}");
    }
    let verdict: RealismVerdict = classical_max_success_relaxed(epsilon);
    let impossible = verdict.classical_max_p4 == 0.0;
    emit(ReportFile::new(
        format!("classical --epsilon {epsilon}"),
        seed,
        tolerances,
        verdict,
    ))?;
    Ok(if impossible { 0 } else { 1 })
}

fn emit<P: Serialize>(report: ReportFile<P>) -> anyhow::Result<()> {
    println!("{}", to_canonical_json(&report)?);
    Ok(())
}

fn parse_grid(spec: &str) -> anyhow::Result<GridSpec> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        bail!("grid must be start:stop:count, got {spec:?}");
    };
    let start: f64 = start.parse().context("bad grid start")?;
    let stop: f64 = stop.parse().context("bad grid stop")?;
    let count: usize = count.parse().context("bad grid count")?;
    if count == 0 || !start.is_finite() || !stop.is_finite() || stop < start {
        bail!("grid must satisfy start <= stop and count >= 1, got {spec:?}");
    }
    Ok(GridSpec { start, stop, count })
}

fn parse_spin(text: &str) -> anyhow::Result<SpinQuantum> {
    let value = if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().context("bad spin numerator")?;
        let den: f64 = den.trim().parse().context("bad spin denominator")?;
        if den == 0.0 {
            bail!("spin denominator is zero");
        }
        num / den
    } else {
        text.trim()
            .parse()
            .context("spin must be a number like 2, 2.5 or 5/2")?
    };
    Ok(SpinQuantum::new(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.01:3.13:1000").unwrap();
        assert_eq!(g.count, 1000);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("2:1:10").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:1:10").is_err());
    }

    #[test]
    fn spin_parsing() {
        assert_eq!(parse_spin("2").unwrap(), SpinQuantum::new(2.0).unwrap());
        assert_eq!(parse_spin("5/2").unwrap(), SpinQuantum::new(2.5).unwrap());
        assert_eq!(parse_spin("2.5").unwrap(), SpinQuantum::new(2.5).unwrap());
        assert!(parse_spin("0").is_err());
        assert!(parse_spin("x/2").is_err());
        assert!(parse_spin("1/0").is_err());
    }
}
