//! `gtp` — command-line front end for the teleportation-protocol simulator.
//!
//! Subcommands: `verify` (cross-check suite), `run` (one protocol run as a
//! JSON report), `sweep` (perturbation grid as CSV), `optimize` (efficiency
//! maximization as JSON). Outputs are byte-identical for identical
//! invocations, including the seed.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gtp::optimize::{optimize_multi, optimize_single};
use gtp::run::{
    execute, render_json, resolve, AcceptanceSpec, InputSpec, ParamSpec, PhaseSpec, RunConfig,
    DEFAULT_SAMPLES, DEFAULT_SEED,
};
use gtp::sweep::{render_csv, sweep_rows, GridRange, SweepSpec};
use gtp::verify::{run_all, GridKind, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "gtp",
    version,
    about = "Simulator and verification suite for teleportation over partially \
             entangled channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for all randomized operations (fallback: GTP_SEED, then 42)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte-Carlo sample count
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Use exact transfer-operator averaging instead of Monte Carlo
    #[arg(long, global = true)]
    exact: bool,

    /// Emit JSON instead of the default format where applicable
    #[arg(long, global = true)]
    json: bool,

    /// Write output to a file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Coarse,
    Fine,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and print one PASS/FAIL line per criterion
    Verify {
        /// Density of the deterministic check grids
        #[arg(long, value_enum, default_value_t = GridArg::Fine)]
        grid: GridArg,

        /// Test hook: corrupt every tolerance so tolerance checks must fail
        #[arg(long, hide = true)]
        corrupt_tolerances: bool,
    },
    /// Execute one protocol run and print a JSON report
    Run {
        /// JSON config file; flags override individual fields
        #[arg(long)]
        config: Option<PathBuf>,

        /// Channel parameters, e.g. `0.5` or `0.5,0.7` or `1.0@0.52`
        #[arg(long)]
        n: Option<String>,

        /// Measurement-basis parameters, same syntax as --n
        #[arg(long)]
        m: Option<String>,

        /// Correction phases: optimal, zero, or dephasing
        #[arg(long)]
        phases: Option<String>,

        /// Acceptance: all, pqt, or outcome labels separated by ';'
        #[arg(long)]
        acceptance: Option<String>,

        /// Input state: haar or ket:<bits>
        #[arg(long)]
        input: Option<String>,
    },
    /// Evaluate the perturbed matched-basis sweep and print CSV
    Sweep {
        /// Channel grid as start:stop:step (default 0.05:1.0:0.05)
        #[arg(long)]
        n_grid: Option<String>,

        /// Perturbation grid as start:stop:step (default -0.3:0.3:0.025)
        #[arg(long, allow_hyphen_values = true)]
        delta_grid: Option<String>,
    },
    /// Maximize the averaged efficiency over basis and correction phases
    Optimize {
        /// Channel magnitude of the first channel
        #[arg(long)]
        n: f64,

        /// Second channel (optional)
        #[arg(long)]
        n2: Option<f64>,

        /// Third channel (optional)
        #[arg(long)]
        n3: Option<f64>,
    },
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var("GTP_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| format!("GTP_SEED value `{text}` is not an unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(error) => Err(format!("cannot read GTP_SEED: {error}")),
    }
}

fn parse_grid(text: &str) -> Result<GridRange, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("grid `{text}` must have the form start:stop:step"));
    };
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("cannot parse grid number `{s}`"))
    };
    GridRange::new(number(start)?, number(stop)?, number(step)?).map_err(|e| e.to_string())
}

fn parse_acceptance(text: &str) -> AcceptanceSpec {
    match text {
        "all" | "pqt" => AcceptanceSpec::Named(text.to_string()),
        list => AcceptanceSpec::List(list.split(';').map(|s| s.trim().to_string()).collect()),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    let env_seed = env_seed()?;
    match cli.command {
        Command::Verify {
            grid,
            corrupt_tolerances,
        } => {
            let config = VerifyConfig {
                samples: cli.samples.unwrap_or(DEFAULT_SAMPLES),
                seed: cli.seed.or(env_seed).unwrap_or(DEFAULT_SEED),
                grid: match grid {
                    GridArg::Coarse => GridKind::Coarse,
                    GridArg::Fine => GridKind::Fine,
                },
                corrupt_tolerances,
            };
            let report = run_all(&config).map_err(|e| e.to_string())?;
            let text = if cli.json {
                report.render_json()
            } else {
                report.render_text()
            };
            emit(&text, cli.out.as_ref())?;
            Ok(if report.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Run {
            config,
            n,
            m,
            phases,
            acceptance,
            input,
        } => {
            let base: RunConfig = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                    serde_json::from_str(&text)
                        .map_err(|e| format!("invalid config {}: {e}", path.display()))?
                }
                None => RunConfig::default(),
            };
            let overlay = RunConfig {
                n: n.as_deref()
                    .map(ParamSpec::parse_list)
                    .transpose()
                    .map_err(|e| e.to_string())?,
                m: m.as_deref()
                    .map(ParamSpec::parse_list)
                    .transpose()
                    .map_err(|e| e.to_string())?,
                phases: phases.map(PhaseSpec::Named),
                acceptance: acceptance.as_deref().map(parse_acceptance),
                input: input.map(InputSpec::Text),
                samples: cli.samples,
                seed: cli.seed,
            };
            let merged = RunConfig::merged(base, overlay);
            let resolved = resolve(&merged, env_seed, cli.exact).map_err(|e| e.to_string())?;
            let report = execute(&resolved).map_err(|e| e.to_string())?;
            emit(&render_json(&report), cli.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { n_grid, delta_grid } => {
            let defaults = SweepSpec::default();
            let spec = SweepSpec {
                n_grid: n_grid.as_deref().map(parse_grid).transpose()?.unwrap_or(defaults.n_grid),
                delta_grid: delta_grid
                    .as_deref()
                    .map(parse_grid)
                    .transpose()?
                    .unwrap_or(defaults.delta_grid),
            };
            let output = sweep_rows(&spec).map_err(|e| e.to_string())?;
            for warning in &output.warnings {
                eprintln!("warning: {warning}");
            }
            let text = if cli.json {
                let mut json = serde_json::to_string_pretty(&output.rows)
                    .expect("rows serialize");
                json.push('\n');
                json
            } else {
                render_csv(&output.rows)
            };
            emit(&text, cli.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Optimize { n, n2, n3 } => {
            let mut n_list = vec![n];
            n_list.extend(n2);
            n_list.extend(n3);
            let text = if n_list.len() == 1 {
                let result = optimize_single(n).map_err(|e| e.to_string())?;
                let mut json =
                    serde_json::to_string_pretty(&result).expect("result serializes");
                json.push('\n');
                json
            } else {
                let result = optimize_multi(&n_list).map_err(|e| e.to_string())?;
                let mut json =
                    serde_json::to_string_pretty(&result).expect("result serializes");
                json.push('\n');
                json
            };
            emit(&text, cli.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
