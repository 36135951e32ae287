use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use collectibility::basis::{BlochAngles, DetectorSet};
use collectibility::collect::bound_separable;
use collectibility::experiment::{run_experiment, Scheme};
use collectibility::io::{parse_detectors, parse_state};
use collectibility::json::{format_g17, to_json};
use collectibility::optimize::{optimize_collectibility, Mode, OptimizerConfig};
use collectibility::sampling::{mc_average, mc_detect_prob, sweep_csv, sweep_fig1, McConfig};
use collectibility::scan::{bound_scan, ScanConfig};
use collectibility::{evaluate, named_state, parse_named_state, Error, StateVector, Verdict};

const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "collect", version, about = "Collectibility entanglement indicators")]
struct Cli {
    /// Write a JSON run manifest to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collectibility of a state for one detector setting.
    Compute(ComputeArgs),
    /// Maximize (or minimize) collectibility over detector settings.
    Optimize(OptimizeArgs),
    /// Two-qubit curves against the Schmidt angle, as CSV.
    Sweep(SweepArgs),
    /// GHZ, W and biseparable statistics against their reference values.
    Table1(Table1Args),
    /// Simulate a Gram-matrix measurement with shot noise.
    Simulate(SimulateArgs),
    /// Randomized check of the collectibility bounds.
    BoundScan(BoundScanArgs),
}

#[derive(Args, Serialize)]
struct ComputeArgs {
    /// File path, `-` for stdin, or a named state like `schmidt:0.5`.
    #[arg(long)]
    state: String,
    /// `theta=T,phi=P[;...]`, `comp`, or a detector JSON file.
    #[arg(long)]
    detectors: String,
}

#[derive(Args, Serialize)]
struct OptimizeArgs {
    #[arg(long)]
    state: String,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimize instead of maximize.
    #[arg(long)]
    min: bool,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[arg(long, default_value_t = 629)]
    points: usize,
}

#[derive(Args, Serialize)]
struct Table1Args {
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    state: String,
    #[arg(long)]
    scheme: String,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct BoundScanArgs {
    #[arg(long, default_value_t = 10_000)]
    num: u64,
    #[arg(long, default_value_t = 2)]
    parties: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use this state instead of random ones.
    #[arg(long)]
    state: Option<String>,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Bound { .. } | Error::Convergence { .. } | Error::Gram(_) | Error::Scale { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    arguments: serde_json::Value,
    seed: Option<u64>,
    tool_version: &'static str,
    outputs: Vec<String>,
}

fn load_state(source: &str) -> Result<StateVector, Failure> {
    if source == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Input(format!("cannot read stdin: {e}")))?;
        return Ok(parse_state(&text)?);
    }
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {source}: {e}")))?;
        return Ok(parse_state(&text)?);
    }
    Ok(parse_named_state(source)?)
}

fn parse_angle_pair(text: &str) -> Result<BlochAngles, Failure> {
    let mut theta = None;
    let mut phi = None;
    for part in text.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("expected key=value, got `{part}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("cannot parse `{value}` as a number")))?;
        match key.trim() {
            "theta" => theta = Some(value),
            "phi" => phi = Some(value),
            other => return Err(Failure::Input(format!("unknown angle `{other}`"))),
        }
    }
    let theta = theta.ok_or_else(|| Failure::Input(format!("missing theta in `{text}`")))?;
    Ok(BlochAngles::new(theta, phi.unwrap_or(0.0))?)
}

fn load_detectors(source: &str, state: &StateVector) -> Result<DetectorSet, Failure> {
    let rest: Vec<usize> = (1..state.parties()).collect();
    if source == "comp" {
        return Ok(DetectorSet::computational(state.dims(), rest, 2)?);
    }
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {source}: {e}")))?;
        return Ok(parse_detectors(&text)?);
    }
    let mut angles = source
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_angle_pair)
        .collect::<Result<Vec<_>, _>>()?;
    if angles.len() == 1 && rest.len() > 1 {
        angles = vec![angles[0]; rest.len()];
    }
    Ok(DetectorSet::from_angles(rest, &angles)?)
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Entangled => 0,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn cmd_compute(args: &ComputeArgs) -> CmdResult {
    let state = load_state(&args.state)?;
    let detectors = load_detectors(&args.detectors, &state)?;
    let report = evaluate(&state, &detectors)?;
    println!("{}", to_json(&report));
    Ok(verdict_code(report.verdict))
}

fn cmd_optimize(args: &OptimizeArgs) -> CmdResult {
    let state = load_state(&args.state)?;
    let config = OptimizerConfig {
        restarts: args.restarts,
        seed: args.seed,
        mode: if args.min { Mode::Minimize } else { Mode::Maximize },
        ..OptimizerConfig::default()
    };
    let result = optimize_collectibility(&state, &config)?;
    println!("{}", to_json(&result));
    let entangled = result.value > bound_separable(state.parties(), 2);
    Ok(if entangled { 0 } else { EXIT_INCONCLUSIVE })
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let rows = sweep_fig1(args.points)?;
    print!("{}", sweep_csv(&rows));
    Ok(0)
}

#[derive(Serialize)]
struct Table1Cell {
    row: &'static str,
    state: &'static str,
    value: f64,
    stderr: Option<f64>,
    target: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct Table1Report {
    samples: u64,
    seed: u64,
    cells: Vec<Table1Cell>,
    all_pass: bool,
}

const TABLE1_STATES: [&str; 3] = ["ghz", "w", "bs"];

fn cmd_table1(args: &Table1Args) -> CmdResult {
    let rows: [(&'static str, [f64; 3], f64); 4] = [
        ("minimal", [0.0, 0.0, 0.0], 1e-6),
        ("maximal", [0.250, 0.141, 0.063], 1e-3),
        ("average", [0.053, 0.049, 0.021], 2e-3),
        ("detection", [0.807, 0.807, 0.500], 5e-3),
    ];
    let mc = McConfig {
        samples: args.samples,
        seed: args.seed,
    };
    let mut cells = Vec::new();
    for (row, targets, tolerance) in rows {
        for (name, target) in TABLE1_STATES.into_iter().zip(targets) {
            let state = named_state(name, &[])?;
            let (value, stderr) = match row {
                "minimal" | "maximal" => {
                    let config = OptimizerConfig {
                        seed: args.seed,
                        mode: if row == "minimal" { Mode::Minimize } else { Mode::Maximize },
                        ..OptimizerConfig::default()
                    };
                    (optimize_collectibility(&state, &config)?.value, None)
                }
                "average" => {
                    let e = mc_average(&state, &mc)?;
                    (e.mean, Some(e.stderr))
                }
                _ => {
                    let e = mc_detect_prob(&state, &mc)?;
                    (e.mean, Some(e.stderr))
                }
            };
            cells.push(Table1Cell {
                row,
                state: name,
                value,
                stderr,
                target,
                tolerance,
                pass: (value - target).abs() <= tolerance,
            });
        }
    }
    eprintln!("{:<10} {:<4} {:>22} {:>8} {:>8}  result", "row", "state", "value", "target", "tol");
    for c in &cells {
        eprintln!(
            "{:<10} {:<4} {:>22} {:>8} {:>8}  {}",
            c.row,
            c.state,
            format_g17(c.value),
            c.target,
            c.tolerance,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    let all_pass = cells.iter().all(|c| c.pass);
    println!(
        "{}",
        to_json(&Table1Report {
            samples: args.samples,
            seed: args.seed,
            cells,
            all_pass,
        })
    );
    Ok(0)
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let state = load_state(&args.state)?;
    let scheme: Scheme = args.scheme.parse()?;
    let angles = BlochAngles::new(args.theta, args.phi)?;
    let report = run_experiment(&state, angles, scheme, args.shots, args.seed)?;
    println!("{}", to_json(&report));
    Ok(verdict_code(report.verdict))
}

fn cmd_bound_scan(args: &BoundScanArgs) -> CmdResult {
    let fixed = args.state.as_deref().map(load_state).transpose()?;
    let config = ScanConfig {
        num: args.num,
        parties: args.parties,
        seed: args.seed,
    };
    let summary = bound_scan(&config, fixed.as_ref())?;
    println!("{}", to_json(&summary));
    if summary.total_violations > 0 {
        return Err(Failure::Numerical(format!(
            "{} bound violations observed",
            summary.total_violations
        )));
    }
    Ok(0)
}

fn manifest_for(command: &Command) -> RunManifest {
    fn args<T: Serialize>(a: &T) -> serde_json::Value {
        serde_json::to_value(a).unwrap_or_default()
    }
    let (name, arguments, seed) = match command {
        Command::Compute(a) => ("compute", args(a), None),
        Command::Optimize(a) => ("optimize", args(a), Some(a.seed)),
        Command::Sweep(a) => ("sweep", args(a), None),
        Command::Table1(a) => ("table1", args(a), Some(a.seed)),
        Command::Simulate(a) => ("simulate", args(a), Some(a.seed)),
        Command::BoundScan(a) => ("bound-scan", args(a), Some(a.seed)),
    };
    let mut outputs = vec!["stdout".to_string()];
    if matches!(command, Command::Table1(_)) {
        outputs.push("stderr".to_string());
    }
    let arguments = match arguments {
        serde_json::Value::Object(map) => {
            let sorted: BTreeMap<_, _> = map.into_iter().collect();
            serde_json::to_value(sorted).unwrap_or_default()
        }
        other => other,
    };
    RunManifest {
        command: name,
        arguments,
        seed,
        tool_version: env!("CARGO_PKG_VERSION"),
        outputs,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compute(a) => cmd_compute(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::BoundScan(a) => cmd_bound_scan(a),
    };
    if let Some(path) = &cli.manifest {
        let text = to_json(&manifest_for(&cli.command));
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: cannot write manifest {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
