//! `qic` — command-line surface for the quantum information causality
//! toolkit: bound tables, game simulations, the entropic-inequality fuzzer,
//! and the m = 1 success-probability sweep as plot-ready CSV.
//!
//! Exit codes: 0 success, 1 property violation, 2 usage error,
//! 3 unsupported parameter, 4 I/O error.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qic_core::bounds;
use qic_core::games::{
    run_qic_v1, run_qic_v2, EvalMode, GameConfig, GameResult, GameVersion, Ic2Strategy, Strategy,
};
use qic_core::propcheck::{self, FuzzConfig, FuzzSuite, ViolationReport};
use qic_core::{DepolarizingParam64, QicError};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "qic", version, about = "Quantum information causality toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print bound values (naive, teleportation, entropic bound, nonlocal
    /// bound) as CSV on stdout.
    Bounds {
        /// Message size in qubits.
        #[arg(long)]
        m: usize,
        /// Comma-separated list of n values.
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Vec<usize>,
    },
    /// Run a game strategy and print the result as JSON.
    Simulate {
        /// Strategy: naive | teleport | channel:<lambda,lambda,...>
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Game version: 1 (singlet fidelity) or 2 (state fidelity).
        #[arg(long, default_value_t = 1)]
        version: u8,
    },
    /// Run a property-check suite and print a JSON report; exits 1 on
    /// violations.
    Fuzz {
        /// Suite: qicchain | classical | sumbound | achievability
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest subsystem dimension (2..=4).
        #[arg(long = "max-dim", default_value_t = 4)]
        max_dim: usize,
        /// Self-test hook: run with a sign-flipped entropy, which must
        /// produce violations.
        #[arg(long, hide = true, default_value_t = false)]
        corrupt_entropy: bool,
    },
    /// Write the m = 1 success-probability curves (naive, teleportation,
    /// entropic bound) for n = 2..n-max as a CSV file.
    Fig2 {
        #[arg(long = "n-max")]
        n_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Qicchain,
    Classical,
    Sumbound,
    Achievability,
}

impl SuiteArg {
    fn to_suite(self) -> FuzzSuite {
        match self {
            Self::Qicchain => FuzzSuite::QicChain,
            Self::Classical => FuzzSuite::ClassicalBound,
            Self::Sumbound => FuzzSuite::SumBound,
            Self::Achievability => FuzzSuite::Achievability,
        }
    }
}

/// Provenance block serialized with every output.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    args: BTreeMap<String, String>,
    seed: Option<u64>,
    toolkit_version: String,
    started_at: String,
    finished_at: String,
}

impl RunManifest {
    fn new(command: &str, args: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            args,
            seed,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: now(),
            finished_at: String::new(),
        }
    }

    fn finish(mut self) -> Self {
        self.finished_at = now();
        self
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn unsupported(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_UNSUPPORTED)
}

fn io_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_IO)
}

/// Fixed 10-decimal formatting used for every probability in CSV output.
fn fmt10(x: f64) -> String {
    format!("{x:.10}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Bounds { m, n_list } => cmd_bounds(m, &n_list),
        Command::Simulate {
            strategy,
            n,
            m,
            mode,
            trials,
            seed,
            version,
        } => cmd_simulate(&strategy, n, m, mode, trials, seed, version),
        Command::Fuzz {
            suite,
            trials,
            seed,
            max_dim,
            corrupt_entropy,
        } => cmd_fuzz(suite, trials, seed, max_dim, corrupt_entropy),
        Command::Fig2 { n_max, out } => cmd_fig2(n_max, &out),
    }
}

fn cmd_bounds(m: usize, n_list: &[usize]) -> ExitCode {
    if n_list.is_empty() {
        return usage_error("--n-list must contain at least one value");
    }
    let mut args = BTreeMap::new();
    args.insert("m".into(), m.to_string());
    args.insert(
        "n-list".into(),
        n_list
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    let manifest = RunManifest::new("bounds", args, None);

    let mut rows = Vec::new();
    for &n in n_list {
        let query = match bounds::BoundQuery::new(m, n) {
            Ok(q) => q,
            Err(e) => return usage_error(&e.to_string()),
        };
        let b = bounds::evaluate::<f64>(query);
        rows.push(format!(
            "{n},{m},{},{},{},{}",
            fmt10(b.p_naive),
            fmt10(b.p_teleport),
            fmt10(b.p_prime),
            fmt10(b.q_prime)
        ));
    }
    println!("n,m,p_naive,p_teleport,p_prime,q_prime");
    for row in rows {
        println!("{row}");
    }
    let manifest = manifest.finish();
    eprintln!(
        "{}",
        serde_json::to_string(&manifest).expect("manifest serializes")
    );
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct SimulateOutput {
    p_hat: f64,
    std_err: f64,
    trials: u64,
    mode: EvalMode,
    reference_run: bool,
    manifest: RunManifest,
}

fn parse_strategy(spec: &str, n: usize) -> Result<Strategy<f64>, ExitCode> {
    if spec == "naive" {
        return Ok(Strategy::naive());
    }
    if spec == "teleport" {
        let ic2 = match Ic2Strategy::<f64>::paired_earac(n) {
            Ok(s) => s,
            Err(QicError::UnsupportedEarac(bad)) => {
                return Err(unsupported(&format!(
                    "no exact random access code construction for n = {bad} (supported: 2, 3, 4)"
                )))
            }
            Err(e) => return Err(usage_error(&e.to_string())),
        };
        return Ok(Strategy::teleportation(ic2));
    }
    if let Some(list) = spec.strip_prefix("channel:") {
        let mut lambdas = Vec::new();
        for part in list.split(',') {
            let value: f64 = match part.trim().parse() {
                Ok(v) => v,
                Err(_) => {
                    return Err(usage_error(&format!(
                        "cannot parse channel parameter '{part}'"
                    )))
                }
            };
            match DepolarizingParam64::new(value) {
                Ok(lam) => lambdas.push(lam),
                Err(e) => return Err(usage_error(&e.to_string())),
            }
        }
        if lambdas.len() == 1 {
            lambdas = vec![lambdas[0]; n];
        }
        if lambdas.len() != n {
            return Err(usage_error(&format!(
                "channel strategy has {} parameters but n = {n}",
                lambdas.len()
            )));
        }
        return Ok(Strategy::channel_form(lambdas));
    }
    Err(usage_error(&format!(
        "unknown strategy '{spec}' (expected naive | teleport | channel:<list>)"
    )))
}

fn cmd_simulate(
    strategy_spec: &str,
    n: usize,
    m: usize,
    mode: ModeArg,
    trials: u64,
    seed: u64,
    version: u8,
) -> ExitCode {
    let game_version = match version {
        1 => GameVersion::V1,
        2 => GameVersion::V2,
        other => return usage_error(&format!("unknown game version {other} (expected 1 or 2)")),
    };
    let cfg = match GameConfig::new(n, m, trials, seed, game_version) {
        Ok(c) => c,
        Err(e) => return usage_error(&e.to_string()),
    };
    let strategy = match parse_strategy(strategy_spec, n) {
        Ok(s) => s,
        Err(code) => return code,
    };

    let mut args = BTreeMap::new();
    args.insert("strategy".into(), strategy_spec.to_string());
    args.insert("n".into(), n.to_string());
    args.insert("m".into(), m.to_string());
    args.insert(
        "mode".into(),
        match mode {
            ModeArg::Exact => "exact".into(),
            ModeArg::Mc => "mc".into(),
        },
    );
    args.insert("trials".into(), trials.to_string());
    args.insert("seed".into(), seed.to_string());
    args.insert("version".into(), version.to_string());
    let manifest = RunManifest::new("simulate", args, Some(seed));

    let result: Result<GameResult<f64>, QicError> = match (game_version, mode) {
        (GameVersion::V1, ModeArg::Exact) => run_qic_v1(&strategy, &cfg, EvalMode::Exact),
        (GameVersion::V1, ModeArg::Mc) => run_qic_v1(&strategy, &cfg, EvalMode::MonteCarlo),
        (GameVersion::V2, ModeArg::Mc) => run_qic_v2(&strategy, &cfg),
        (GameVersion::V2, ModeArg::Exact) => {
            return unsupported(
                "version 2 has no exact evaluator; use --mode mc, or derive it from version 1 \
                 through p = (1 + 2P)/3",
            )
        }
    };
    let result = match result {
        Ok(r) => r,
        Err(QicError::UnsupportedEarac(bad)) => {
            return unsupported(&format!("unsupported random access code size {bad}"))
        }
        Err(e) => return usage_error(&e.to_string()),
    };
    let output = SimulateOutput {
        p_hat: result.p_hat,
        std_err: result.std_err,
        trials: result.trials,
        mode: result.mode,
        reference_run: cfg.is_reference(),
        manifest: manifest.finish(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&output).expect("output serializes")
    );
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct FuzzOutput {
    suite: &'static str,
    trials: u64,
    seed: u64,
    max_dim: usize,
    tolerance: f64,
    violation_count: usize,
    violations: Vec<ViolationReport<f64>>,
    manifest: RunManifest,
}

fn cmd_fuzz(
    suite: SuiteArg,
    trials: u64,
    seed: u64,
    max_dim: usize,
    corrupt_entropy: bool,
) -> ExitCode {
    let cfg = match FuzzConfig::<f64>::new(trials, seed, max_dim, 1e-8) {
        Ok(c) => c,
        Err(e) => return usage_error(&e.to_string()),
    };
    let fuzz_suite = suite.to_suite();

    let mut args = BTreeMap::new();
    args.insert("suite".into(), fuzz_suite.name().to_string());
    args.insert("trials".into(), trials.to_string());
    args.insert("seed".into(), seed.to_string());
    args.insert("max-dim".into(), max_dim.to_string());
    if corrupt_entropy {
        args.insert("corrupt-entropy".into(), "true".into());
    }
    let manifest = RunManifest::new("fuzz", args, Some(seed));

    let violations = if corrupt_entropy {
        propcheck::run_suite_with_corrupted_entropy(fuzz_suite, &cfg)
    } else {
        propcheck::run_suite(fuzz_suite, &cfg)
    };
    let clean = violations.is_empty();
    let output = FuzzOutput {
        suite: fuzz_suite.name(),
        trials,
        seed,
        max_dim,
        tolerance: cfg.tolerance,
        violation_count: violations.len(),
        violations,
        manifest: manifest.finish(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&output).expect("output serializes")
    );
    if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    }
}

fn cmd_fig2(n_max: usize, out: &PathBuf) -> ExitCode {
    if n_max < 2 {
        return usage_error("--n-max must be at least 2");
    }
    let mut args = BTreeMap::new();
    args.insert("n-max".into(), n_max.to_string());
    args.insert("out".into(), out.display().to_string());
    let manifest = RunManifest::new("fig2", args, None);

    let mut csv = String::from("n,p_naive,p_teleport,p_prime\n");
    for n in 2..=n_max {
        let p_naive = bounds::naive_p::<f64>(1, n);
        let p_teleport = bounds::teleport_p::<f64>(n);
        let p_prime = bounds::solve_p_prime::<f64>(1, n);
        // The bound dominates both achievable strategies on every row.
        debug_assert!(p_naive <= p_prime + 1e-9);
        debug_assert!(p_teleport <= p_prime + 1e-9);
        csv.push_str(&format!(
            "{n},{},{},{}\n",
            fmt10(p_naive),
            fmt10(p_teleport),
            fmt10(p_prime)
        ));
    }
    let mut file = match std::fs::File::create(out) {
        Ok(f) => f,
        Err(e) => return io_error(&format!("cannot create {}: {e}", out.display())),
    };
    if let Err(e) = file.write_all(csv.as_bytes()) {
        return io_error(&format!("cannot write {}: {e}", out.display()));
    }
    let manifest = manifest.finish();
    let manifest_path = out.with_extension("manifest.json");
    match serde_json::to_string_pretty(&manifest) {
        Ok(body) => {
            if let Err(e) = std::fs::write(&manifest_path, body) {
                return io_error(&format!("cannot write {}: {e}", manifest_path.display()));
            }
        }
        Err(e) => return io_error(&format!("cannot serialize manifest: {e}")),
    }
    ExitCode::SUCCESS
}
