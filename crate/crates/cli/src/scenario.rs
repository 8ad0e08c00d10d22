//! Scenario files: TOML documents describing hidden spaces, distributions,
//! response models, experiments and what to compute.
//!
//! ```toml
//! schema_version = 1
//!
//! [settings]
//! a = 0.0
//! a_prime = 1.5707963267948966
//! b = 0.7853981633974483
//! b_prime = -0.7853981633974483
//!
//! [[spaces]]
//! label = "lambda"
//! values = ["0", "1"]
//!
//! [[distributions]]
//! name = "rho"
//! domain = ["lambda"]
//! weights = [0.5, 0.5]          # row-major, last space fastest
//!
//! [[models]]
//! kind = "deterministic-source"
//! name = "coin"
//! domain = ["lambda"]
//! outcomes = { a = [1, -1], a_prime = [1, -1], b = [1, -1], b_prime = [-1, 1] }
//!
//! [[experiments]]
//! mode = "source-only"
//! name = "shared-coin"
//! model = "coin"
//! source = "rho"
//!
//! [run]
//! estimator = "exact"
//! analyses = ["correlations", "chsh", "bell-check", "feasibility"]
//! ```
//!
//! Model kinds and their payloads:
//!
//! * `deterministic-source`: `domain`, `outcomes` keyed by setting (`a`,
//!   `a_prime`, `b`, `b_prime`), ±1 per domain point.
//! * `stochastic-source`: `domain`, `prob_plus` keyed by setting.
//! * `contextual`: `domain`, `separated`, `outcomes` keyed by `own.remote`
//!   (e.g. `"a.b_prime"`, `"b.a"`), eight tables.
//! * `apparatus-deterministic`: `lambda`, `apparatus` (space label per
//!   setting), `outcomes` keyed by setting, row-major over `(λ, λ_p)`.
//!
//! Experiment modes: `source-only` (`source`), `setting-dependent` (`pairs`
//! keyed `ab`, `ab_prime`, `a_prime_b`, `a_prime_b_prime`),
//! `factorized-apparatus` (`source`, `apparatus` keyed by setting) and
//! `joint-composite` (`joint`).

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use lhv_core::engine::check_compatibility;
use lhv_core::{
    ApparatusModel, ContextualModel, DeterministicSource, Distribution, HiddenSpace, Outcome, Pair, PerPair,
    PerSetting, ResponseModel, ScenarioDistributions, SettingName, Settings, StochasticSource,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub settings: Settings,
    pub spaces: Vec<SpaceSpec>,
    pub distributions: Vec<DistributionSpec>,
    pub models: Vec<ModelSpec>,
    pub experiments: Vec<ExperimentSpec>,
    pub run: RunSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub label: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub name: String,
    pub domain: Vec<String>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    DeterministicSource {
        name: String,
        domain: Vec<String>,
        outcomes: BTreeMap<String, Vec<i8>>,
    },
    StochasticSource {
        name: String,
        domain: Vec<String>,
        prob_plus: BTreeMap<String, Vec<f64>>,
    },
    Contextual {
        name: String,
        domain: Vec<String>,
        separated: bool,
        outcomes: BTreeMap<String, Vec<i8>>,
    },
    ApparatusDeterministic {
        name: String,
        lambda: String,
        apparatus: BTreeMap<String, String>,
        outcomes: BTreeMap<String, Vec<i8>>,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &str {
        match self {
            ModelSpec::DeterministicSource { name, .. }
            | ModelSpec::StochasticSource { name, .. }
            | ModelSpec::Contextual { name, .. }
            | ModelSpec::ApparatusDeterministic { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    SourceOnly {
        name: String,
        model: String,
        source: String,
    },
    SettingDependent {
        name: String,
        model: String,
        pairs: BTreeMap<String, String>,
    },
    FactorizedApparatus {
        name: String,
        model: String,
        source: String,
        apparatus: BTreeMap<String, String>,
    },
    JointComposite {
        name: String,
        model: String,
        joint: String,
    },
}

impl ExperimentSpec {
    pub fn name(&self) -> &str {
        match self {
            ExperimentSpec::SourceOnly { name, .. }
            | ExperimentSpec::SettingDependent { name, .. }
            | ExperimentSpec::FactorizedApparatus { name, .. }
            | ExperimentSpec::JointComposite { name, .. } => name,
        }
    }

    pub fn model(&self) -> &str {
        match self {
            ExperimentSpec::SourceOnly { model, .. }
            | ExperimentSpec::SettingDependent { model, .. }
            | ExperimentSpec::FactorizedApparatus { model, .. }
            | ExperimentSpec::JointComposite { model, .. } => model,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Correlations,
    Chsh,
    BellCheck,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub estimator: EstimatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub analyses: Vec<Analysis>,
}

fn line_of(text: &str, offset: usize) -> usize {
    1 + text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&c| c == b'\n')
        .count()
}

impl Scenario {
    /// Parse TOML text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        if scenario.schema_version != SCHEMA_VERSION {
            return Err(CliError::schema(format!(
                "UnsupportedSchema: schema_version {} (supported: {SCHEMA_VERSION})",
                scenario.schema_version
            )));
        }
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Scenario::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario types always serialize")
    }

    /// Build and validate every payload.
    pub fn resolve(&self) -> Result<ResolvedScenario, CliError> {
        Resolver::new(self)?.finish(self)
    }
}

/// A validated scenario, ready to execute.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub settings: Settings,
    pub experiments: Vec<ResolvedExperiment>,
}

#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub name: String,
    pub model_name: String,
    pub model: ResponseModel,
    pub distributions: ScenarioDistributions,
}

struct Resolver {
    spaces: HashMap<String, HiddenSpace>,
    distributions: HashMap<String, Distribution>,
    models: HashMap<String, ResponseModel>,
}

fn unique<'a>(kind: &str, names: impl Iterator<Item = &'a str>) -> Result<(), CliError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(CliError::schema(format!(
                "DuplicateName: {kind} `{n}` is declared twice"
            )));
        }
    }
    Ok(())
}

fn lookup<'a, T>(map: &'a HashMap<String, T>, kind: &str, name: &str) -> Result<&'a T, CliError> {
    map.get(name)
        .ok_or_else(|| CliError::schema(format!("UnresolvedName: {kind} `{name}` is not declared")))
}

/// Entries of `map` for all four settings, rejecting missing and extra keys.
fn per_setting<T: Clone>(what: &str, map: &BTreeMap<String, T>) -> Result<PerSetting<T>, CliError> {
    if let Some(k) = map.keys().find(|k| SettingName::from_key(k).is_none()) {
        return Err(CliError::schema(format!(
            "UnknownKey: `{k}` in {what} is not a setting"
        )));
    }
    PerSetting::from_fn(|s| s).try_map(|s, _| {
        map.get(s.key())
            .cloned()
            .ok_or_else(|| CliError::schema(format!("MissingKey: {what} has no entry for `{}`", s.key())))
    })
}

fn per_pair<T: Clone>(what: &str, map: &BTreeMap<String, T>) -> Result<PerPair<T>, CliError> {
    if let Some(k) = map.keys().find(|k| Pair::from_key(k).is_none()) {
        return Err(CliError::schema(format!(
            "UnknownKey: `{k}` in {what} is not a setting pair"
        )));
    }
    PerPair::from_fn(|p| p).try_map(|p, _| {
        map.get(p.key())
            .cloned()
            .ok_or_else(|| CliError::schema(format!("MissingKey: {what} has no entry for `{}`", p.key())))
    })
}

fn outcomes(what: &str, values: &[i8]) -> Result<Vec<Outcome>, CliError> {
    values
        .iter()
        .map(|&v| {
            Outcome::from_value(v.into())
                .ok_or_else(|| CliError::schema(format!("InvalidOutcome: {v} in {what} (expected 1 or -1)")))
        })
        .collect()
}

impl Resolver {
    fn new(s: &Scenario) -> Result<Self, CliError> {
        unique("space", s.spaces.iter().map(|x| x.label.as_str()))?;
        unique("distribution", s.distributions.iter().map(|x| x.name.as_str()))?;
        unique("model", s.models.iter().map(ModelSpec::name))?;
        unique("experiment", s.experiments.iter().map(ExperimentSpec::name))?;
        let mut r = Resolver {
            spaces: HashMap::new(),
            distributions: HashMap::new(),
            models: HashMap::new(),
        };
        for sp in &s.spaces {
            let space = HiddenSpace::new(sp.label.clone(), sp.values.clone()).map_err(CliError::validation)?;
            r.spaces.insert(sp.label.clone(), space);
        }
        for d in &s.distributions {
            let domain = r.domain(&d.domain)?;
            let dist = Distribution::new(domain, d.weights.clone()).map_err(CliError::validation)?;
            r.distributions.insert(d.name.clone(), dist);
        }
        for m in &s.models {
            let model = r.model(m)?;
            r.models.insert(m.name().to_string(), model);
        }
        Ok(r)
    }

    fn domain(&self, labels: &[String]) -> Result<Vec<HiddenSpace>, CliError> {
        labels
            .iter()
            .map(|l| lookup(&self.spaces, "space", l).cloned())
            .collect()
    }

    fn model(&self, m: &ModelSpec) -> Result<ResponseModel, CliError> {
        let what = |suffix: &str| format!("model `{}` {suffix}", m.name());
        let model: ResponseModel = match m {
            ModelSpec::DeterministicSource {
                domain, outcomes: o, ..
            } => {
                let tables = per_setting(&what("outcomes"), o)?.try_map(|s, t| outcomes(&what(s.key()), t))?;
                DeterministicSource::new(self.domain(domain)?, tables)
                    .map_err(CliError::validation)?
                    .into()
            }
            ModelSpec::StochasticSource { domain, prob_plus, .. } => {
                let tables = per_setting(&what("prob_plus"), prob_plus)?;
                StochasticSource::new(self.domain(domain)?, tables)
                    .map_err(CliError::validation)?
                    .into()
            }
            ModelSpec::Contextual {
                domain,
                separated,
                outcomes: o,
                ..
            } => {
                let keys: std::collections::BTreeSet<String> = SettingName::ALL
                    .iter()
                    .flat_map(|&own| remote_options(own).map(move |r| format!("{}.{}", own.key(), r.key())))
                    .collect();
                if let Some(k) = o.keys().find(|k| !keys.contains(*k)) {
                    return Err(CliError::schema(format!(
                        "UnknownKey: `{k}` in {} (expected own.remote)",
                        what("outcomes")
                    )));
                }
                let tables = PerSetting::from_fn(|s| s).try_map(|own, _| {
                    let [r0, r1] = remote_options(own);
                    let get = |r: SettingName| {
                        let key = format!("{}.{}", own.key(), r.key());
                        let t = o.get(&key).ok_or_else(|| {
                            CliError::schema(format!("MissingKey: {} has no entry for `{key}`", what("outcomes")))
                        })?;
                        outcomes(&what(&key), t)
                    };
                    Ok::<_, CliError>([get(r0)?, get(r1)?])
                })?;
                ContextualModel::new(self.domain(domain)?, *separated, tables)
                    .map_err(CliError::validation)?
                    .into()
            }
            ModelSpec::ApparatusDeterministic {
                lambda,
                apparatus,
                outcomes: o,
                ..
            } => {
                let lambda = lookup(&self.spaces, "space", lambda)?.clone();
                let apparatus = per_setting(&what("apparatus"), apparatus)?
                    .try_map(|_, l| lookup(&self.spaces, "space", l).cloned())?;
                let tables = per_setting(&what("outcomes"), o)?.try_map(|s, t| outcomes(&what(s.key()), t))?;
                ApparatusModel::new(lambda, apparatus, tables)
                    .map_err(CliError::validation)?
                    .into()
            }
        };
        Ok(model)
    }

    fn dist(&self, name: &str) -> Result<Distribution, CliError> {
        lookup(&self.distributions, "distribution", name).cloned()
    }

    fn finish(self, s: &Scenario) -> Result<ResolvedScenario, CliError> {
        let experiments = s
            .experiments
            .iter()
            .map(|e| {
                let what = format!("experiment `{}`", e.name());
                let distributions = match e {
                    ExperimentSpec::SourceOnly { source, .. } => ScenarioDistributions::SourceOnly(self.dist(source)?),
                    ExperimentSpec::SettingDependent { pairs, .. } => {
                        ScenarioDistributions::SettingDependent(per_pair(&what, pairs)?.try_map(|_, n| self.dist(n))?)
                    }
                    ExperimentSpec::FactorizedApparatus { source, apparatus, .. } => {
                        ScenarioDistributions::FactorizedApparatus {
                            source: self.dist(source)?,
                            apparatus: per_setting(&what, apparatus)?.try_map(|_, n| self.dist(n))?,
                        }
                    }
                    ExperimentSpec::JointComposite { joint, .. } => {
                        ScenarioDistributions::JointComposite(self.dist(joint)?)
                    }
                };
                let model = lookup(&self.models, "model", e.model())?.clone();
                check_compatibility(&model, &distributions).map_err(CliError::validation)?;
                Ok(ResolvedExperiment {
                    name: e.name().to_string(),
                    model_name: e.model().to_string(),
                    model,
                    distributions,
                })
            })
            .collect::<Result<_, CliError>>()?;
        if s.run.estimator == EstimatorKind::MonteCarlo && s.run.samples.is_none() {
            return Err(CliError::schema(
                "MissingKey: run.samples is required for the monte-carlo estimator",
            ));
        }
        Ok(ResolvedScenario {
            settings: s.settings,
            experiments,
        })
    }
}

/// The two settings of the other station, in local order.
fn remote_options(own: SettingName) -> [SettingName; 2] {
    match own.side() {
        lhv_core::Side::A => [SettingName::B, SettingName::BPrime],
        lhv_core::Side::B => [SettingName::A, SettingName::APrime],
    }
}
