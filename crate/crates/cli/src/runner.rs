use std::collections::BTreeSet;
use std::path::Path;

use lhv_core::engine::{bell_check, chsh_variants, exact_report, monte_carlo_report, CorrelationReport, Estimator};
use lhv_core::locality::{check_joint_existence, family_from_scenario, FeasibilityVerdict, DEFAULT_WORK_LIMIT};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::report::{
    CertificateReport, ChshReport, ExperimentReport, FeasibilityReport, PairTable, Report, ScenarioInfo, ToolInfo,
};
use crate::scenario::{Analysis, EstimatorKind, ResolvedExperiment, Scenario};

/// Command-line overrides applied on top of the scenario's `[run]` table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Cap on composite points for feasibility checks.
    pub work_limit: Option<u64>,
}

pub fn scenario_digest(scenario: &Scenario) -> String {
    hex::encode(Sha256::digest(scenario.to_toml().as_bytes()))
}

fn estimator(scenario: &Scenario, opts: &RunOptions) -> Estimator {
    match scenario.run.estimator {
        EstimatorKind::Exact => Estimator::Exact,
        EstimatorKind::MonteCarlo => Estimator::MonteCarlo {
            samples: scenario.run.samples.unwrap_or(0),
            seed: opts.seed.or(scenario.run.seed).unwrap_or(0),
        },
    }
}

/// Validate, then run every experiment through the requested analyses in the
/// fixed order correlations → chsh → bell-check → feasibility.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Report, CliError> {
    let resolved = scenario.resolve()?;
    let analyses: BTreeSet<Analysis> = scenario.run.analyses.iter().copied().collect();
    let estimator = estimator(scenario, opts);
    let work_limit = opts.work_limit.unwrap_or(DEFAULT_WORK_LIMIT);
    let experiments = resolved
        .experiments
        .iter()
        .map(|e| run_experiment(e, resolved.settings, estimator, &analyses, work_limit))
        .collect::<Result<_, _>>()?;
    Ok(Report {
        report_version: crate::report::REPORT_VERSION,
        tool: ToolInfo::default(),
        scenario: ScenarioInfo {
            schema_version: scenario.schema_version,
            sha256: scenario_digest(scenario),
        },
        settings: resolved.settings,
        estimator,
        analyses: analyses.into_iter().collect(),
        experiments,
    })
}

pub fn run_file(path: &Path, opts: &RunOptions) -> Result<Report, CliError> {
    run_scenario(&Scenario::load(path)?, opts)
}

fn correlations(
    e: &ResolvedExperiment,
    settings: lhv_core::Settings,
    estimator: Estimator,
) -> Result<CorrelationReport, CliError> {
    match estimator {
        Estimator::Exact => exact_report(&e.model, &e.distributions, settings),
        Estimator::MonteCarlo { samples, seed } => {
            monte_carlo_report(&e.model, &e.distributions, settings, samples, seed)
        }
    }
    .map_err(CliError::execution)
}

fn run_experiment(
    e: &ResolvedExperiment,
    settings: lhv_core::Settings,
    estimator: Estimator,
    analyses: &BTreeSet<Analysis>,
    work_limit: u64,
) -> Result<ExperimentReport, CliError> {
    let wants = |a: Analysis| analyses.contains(&a);
    let mut out = ExperimentReport {
        name: e.name.clone(),
        model: e.model_name.clone(),
        model_kind: e.model.kind().name(),
        mode: e.distributions.mode().name(),
        correlations: None,
        chsh: None,
        bell_check: None,
        feasibility: None,
    };
    if wants(Analysis::Correlations) || wants(Analysis::Chsh) || wants(Analysis::BellCheck) {
        let report = correlations(e, settings, estimator)?;
        if wants(Analysis::Correlations) {
            out.correlations = Some(PairTable::from(&report.pairs));
        }
        if wants(Analysis::Chsh) {
            out.chsh = Some(ChshReport {
                s: report.s,
                std_err: report.s_std_err(),
                variants: chsh_variants(&report.correlations()),
            });
        }
        if wants(Analysis::BellCheck) {
            out.bell_check = Some(bell_check(report.s));
        }
    }
    if wants(Analysis::Feasibility) {
        let family = family_from_scenario(&e.model, &e.distributions).map_err(CliError::execution)?;
        let composite_cardinality = family.composite_cardinality();
        out.feasibility = Some(
            match check_joint_existence(&family, work_limit).map_err(CliError::execution)? {
                FeasibilityVerdict::Feasible { residual, .. } => FeasibilityReport::Feasible {
                    composite_cardinality,
                    residual,
                },
                FeasibilityVerdict::Infeasible { certificate } => FeasibilityReport::Infeasible {
                    composite_cardinality,
                    certificate: CertificateReport {
                        bound: certificate.bound,
                        value: certificate.value,
                        margin: certificate.margin(),
                        verified: certificate.verify(&family),
                        coefficients: certificate.coefficients,
                    },
                },
            },
        );
    }
    Ok(out)
}
