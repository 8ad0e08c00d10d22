//! Command-line surface: argument definitions and command execution.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use lhv_core::engine::{enumerate_bound, BoundEnumeration, DEFAULT_ENUMERATION_WORK_LIMIT};
use lhv_core::qm::{
    closed_form_correlation, max_violation_search, singlet_chsh, singlet_predictions, SingletPrediction,
    ViolationSearch,
};
use lhv_core::Settings;
use serde::Serialize;

use crate::error::CliError;
use crate::report::PairTable;
use crate::runner::{run_file, RunOptions};
use crate::templates::generate_scenario;

/// Environment variable naming the directory for outputs when `--output` is absent.
pub const OUTPUT_DIR_ENV: &str = "LHV_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "lhv",
    version,
    about = "Local hidden-variable models of the EPR-Bell experiment"
)]
pub struct Cli {
    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Override the Monte Carlo seed of the scenario.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on composite points (feasibility) or on enumerated strategies (enumerate-bound).
    #[arg(long, global = true)]
    pub work_limit: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file and emit a JSON report.
    Run { scenario: PathBuf },
    /// Write a scenario file from a template.
    Generate {
        /// factorized, joint-composite, setting-dependent-witness or stochastic-equivalent
        template: String,
        /// Template parameter, repeatable.
        #[arg(short, long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
        params: Vec<(String, String)>,
    },
    /// Exhaustively maximize |S| over deterministic local strategies.
    EnumerateBound {
        /// Hidden-variable cardinalities to check, repeatable (default 1 to 4).
        #[arg(short, long)]
        cardinality: Vec<usize>,
    },
    /// Singlet-state correlation tables and the violation search.
    Qm {
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        a: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = std::f64::consts::FRAC_PI_2)]
        a_prime: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = std::f64::consts::FRAC_PI_4)]
        b: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -std::f64::consts::FRAC_PI_4)]
        b_prime: f64,
        /// Also search for the largest violation on a grid of this step (radians, at most π/4).
        #[arg(long)]
        grid_step: Option<f64>,
        #[arg(long, default_value_t = 3)]
        refine_rounds: u32,
    },
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("`{s}` is not KEY=VALUE"))
}

/// What a command produced and where it goes when no `--output` is given.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub default_name: String,
}

#[derive(Serialize)]
struct EnumerationOutput {
    work_limit: u64,
    results: Vec<BoundEnumeration>,
}

#[derive(Serialize)]
struct QmOutput {
    settings: Settings,
    predictions: PairTable<SingletPrediction>,
    /// `−cos(a − b)` per pair, for comparison.
    closed_form: PairTable<f64>,
    s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    search: Option<ViolationSearch>,
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types always serialize");
    s.push('\n');
    s
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Run { scenario } => {
            let opts = RunOptions {
                seed: cli.seed,
                work_limit: cli.work_limit,
            };
            let stem = scenario
                .file_stem()
                .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
            Ok(Output {
                text: run_file(scenario, &opts)?.to_json(),
                default_name: format!("{stem}.report.json"),
            })
        }
        Command::Generate { template, params } => {
            let params: BTreeMap<String, String> = params.iter().cloned().collect();
            Ok(Output {
                text: generate_scenario(template, &params)?.to_toml(),
                default_name: format!("{template}.scenario"),
            })
        }
        Command::EnumerateBound { cardinality } => {
            let work_limit = cli.work_limit.unwrap_or(DEFAULT_ENUMERATION_WORK_LIMIT);
            let cards = if cardinality.is_empty() {
                vec![1, 2, 3, 4]
            } else {
                cardinality.clone()
            };
            let results = cards
                .into_iter()
                .map(|n| enumerate_bound(n, work_limit).map_err(CliError::execution))
                .collect::<Result<_, _>>()?;
            Ok(Output {
                text: json(&EnumerationOutput { work_limit, results }),
                default_name: "enumerate-bound.json".into(),
            })
        }
        Command::Qm {
            a,
            a_prime,
            b,
            b_prime,
            grid_step,
            refine_rounds,
        } => {
            let settings = Settings::new(*a, *a_prime, *b, *b_prime);
            let predictions = singlet_predictions(&settings);
            let search = grid_step
                .map(|step| max_violation_search(step, *refine_rounds).map_err(CliError::execution))
                .transpose()?;
            let out = QmOutput {
                settings,
                predictions: PairTable::from(&predictions),
                closed_form: PairTable::from(&predictions.map(|_, p| closed_form_correlation(p.a.angle, p.b.angle))),
                s: singlet_chsh(&settings),
                search,
            };
            Ok(Output {
                text: json(&out),
                default_name: "qm.json".into(),
            })
        }
    }
}

/// Destination for `output`: `--output`, else the default name inside
/// `$LHV_OUTPUT_DIR`, else standard output (`None`).
pub fn destination(explicit: Option<&Path>, env_dir: Option<&Path>, output: &Output) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| env_dir.map(|d| d.join(&output.default_name)))
}

pub fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
