//! `cpes-qsm`: power flow, security scoring and cyber-constrained OPF on
//! MATPOWER cases.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cpes_core::grid::build_ybus;
use cpes_core::opf::{snapshot, AlphaPolicy};
use cpes_core::powerflow::NewtonOptions;
use cpes_core::report::{CompareReport, DispatchReport, GateRow, ScoreReport, StateReport};
use cpes_core::{cpes_qsm, solve_acpf, solve_c_acopf, solve_t_acopf, Dispatch, OpfOptions, SystemState};

use config::{parse_alpha_policy, Overrides, Settings};
use output::{csv_rows, csv_scores, json, print, write_all, Format};

#[derive(Debug)]
pub enum CliError {
    Core(cpes_core::Error),
    Input(String),
    Output(String),
}

impl From<cpes_core::Error> for CliError {
    fn from(e: cpes_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Output(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl CliError {
    /// 1 when a solver failed to converge, 2 for everything else.
    fn exit_code(&self) -> u8 {
        fn solver(e: &cpes_core::Error) -> bool {
            use cpes_core::Error::*;
            match e {
                Diverged { .. } | OpfDiverged { .. } | Infeasible(_) | Numeric(_) => true,
                AtBus { source, .. } => solver(source),
                _ => false,
            }
        }
        match self {
            CliError::Core(e) if solver(e) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "cpes-qsm", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// MATPOWER case file.
    #[arg(long, global = true)]
    case: Option<PathBuf>,
    /// JSON file with the ordered criteria and their singleton weights.
    #[arg(long, global = true)]
    weights: Option<PathBuf>,
    /// JSON cyber scenario (CVSS vectors, devices, attack graphs).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Score threshold at or above which a bus is flagged.
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// JSON gate file with per-generator zeta and alpha rules.
    #[arg(long, global = true)]
    zeta_file: Option<PathBuf>,
    /// `minimum`, `fixed:<a>` or `<a>`.
    #[arg(long, global = true, value_parser = parse_alpha_policy)]
    alpha_policy: Option<AlphaPolicy>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write every table of the report into this directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "CPES_QSM_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Newton-Raphson power flow at the case dispatch.
    Powerflow,
    /// Per-bus factor and score table.
    Score {
        #[arg(long, value_enum, default_value_t = OperatingPoint::Opf)]
        state: OperatingPoint,
    },
    /// Optimal power flow, with or without the cyber gate.
    Opf {
        #[arg(long, value_enum, default_value_t = Mode::Traditional)]
        mode: Mode,
    },
    /// Both OPF modes side by side with flow and voltage changes.
    Compare,
    /// Check the configuration against the case without solving.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatingPoint {
    /// Traditional OPF dispatch.
    Opf,
    /// Generator set points from the case file.
    Case,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Traditional,
    Cyber,
}

#[derive(Serialize)]
struct CyberDispatchReport {
    traditional: DispatchReport,
    cyber: DispatchReport,
    cost_increase: f64,
    gate: Vec<GateRow>,
    scores_before: ScoreReport,
    scores_after: ScoreReport,
}

#[derive(Serialize)]
struct ValidationReport {
    buses: usize,
    branches: usize,
    generators: usize,
    criteria: Vec<String>,
    lambda: f64,
    rho: f64,
    gate_rules: usize,
}

struct Rendered {
    stdout: String,
    files: Vec<(&'static str, String)>,
}

fn power_flow(s: &Settings) -> Result<SystemState, CliError> {
    let state = solve_acpf(&s.net, &build_ybus(&s.net), &Dispatch::from_network(&s.net), &NewtonOptions::default())?;
    Ok(state)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = cli.common;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    let s = Settings::load(
        c.config.as_deref(),
        Overrides {
            case: c.case,
            weights: c.weights,
            scenario: c.scenario,
            zeta_file: c.zeta_file,
            rho: c.rho,
            alpha_policy: c.alpha_policy,
            output_dir: c.output_dir,
        },
    )?;
    s.validate()?;
    let opts = OpfOptions::default();
    let csv = c.format == Format::Csv;

    let out = match cli.command {
        Command::Validate => {
            let measure = s.score.measure()?;
            let report = ValidationReport {
                buses: s.net.n_buses(),
                branches: s.net.branches.len(),
                generators: s.net.generators.len(),
                criteria: s.score.names().iter().map(|c| c.name().to_string()).collect(),
                lambda: measure.lambda(),
                rho: s.gate.rho,
                gate_rules: s.gate.generators.len(),
            };
            Rendered {
                stdout: if csv { csv_rows(&[report])? } else { json(&report)? },
                files: Vec::new(),
            }
        }
        Command::Powerflow => {
            let report = StateReport::new(&s.net, &power_flow(&s)?);
            let buses = csv_rows(&report.buses)?;
            Rendered {
                stdout: if csv { buses.clone() } else { json(&report)? },
                files: vec![
                    ("state.json", json(&report)?),
                    ("buses.csv", buses),
                    ("branches.csv", csv_rows(&report.branches)?),
                    ("generators.csv", csv_rows(&report.generators)?),
                ],
            }
        }
        Command::Score { state } => {
            let state = match state {
                OperatingPoint::Opf => snapshot(&s.net, &solve_t_acopf(&s.net, &opts)?)?,
                OperatingPoint::Case => power_flow(&s)?,
            };
            let report = ScoreReport::new(&cpes_qsm(&s.net, &state, &s.scenario, &s.score)?, s.gate.rho);
            let table = csv_scores(&report)?;
            Rendered {
                stdout: if csv { table.clone() } else { json(&report)? },
                files: vec![("scores.json", json(&report)?), ("scores.csv", table)],
            }
        }
        Command::Opf { mode: Mode::Traditional } => {
            let report = DispatchReport::new(&s.net, &solve_t_acopf(&s.net, &opts)?);
            let gens = csv_rows(&report.generators)?;
            Rendered {
                stdout: if csv { gens.clone() } else { json(&report)? },
                files: vec![("dispatch.json", json(&report)?), ("generators.csv", gens)],
            }
        }
        Command::Opf { mode: Mode::Cyber } => {
            let r = solve_c_acopf(&s.net, &s.scenario, &s.score, &s.gate, &opts)?;
            let cmp = CompareReport::new(&s.net, &r, s.gate.rho);
            let gens = csv_rows(&cmp.cyber.generators)?;
            let report = CyberDispatchReport {
                traditional: cmp.traditional,
                cyber: cmp.cyber,
                cost_increase: cmp.cost_increase,
                gate: cmp.gate,
                scores_before: cmp.scores_before,
                scores_after: cmp.scores_after,
            };
            Rendered {
                stdout: if csv { gens.clone() } else { json(&report)? },
                files: vec![
                    ("dispatch.json", json(&report)?),
                    ("generators.csv", gens),
                    ("gate.csv", csv_rows(&report.gate)?),
                    ("scores_before.csv", csv_scores(&report.scores_before)?),
                    ("scores_after.csv", csv_scores(&report.scores_after)?),
                ],
            }
        }
        Command::Compare => {
            let r = solve_c_acopf(&s.net, &s.scenario, &s.score, &s.gate, &opts)?;
            let report = CompareReport::new(&s.net, &r, s.gate.rho);
            let flows = csv_rows(&report.flows)?;
            Rendered {
                stdout: if csv { flows.clone() } else { json(&report)? },
                files: vec![
                    ("compare.json", json(&report)?),
                    ("flows.csv", flows),
                    ("voltages.csv", csv_rows(&report.voltages)?),
                    ("generators_traditional.csv", csv_rows(&report.traditional.generators)?),
                    ("generators_cyber.csv", csv_rows(&report.cyber.generators)?),
                    ("scores_before.csv", csv_scores(&report.scores_before)?),
                    ("scores_after.csv", csv_scores(&report.scores_after)?),
                ],
            }
        }
    };

    if let Some(dir) = &s.output_dir {
        write_all(dir, &out.files)?;
    }
    print(&out.stdout)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
