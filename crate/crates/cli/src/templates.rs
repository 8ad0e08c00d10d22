//! Scenario templates.
//!
//! | template                    | parameters (default)                                                              |
//! |-----------------------------|-----------------------------------------------------------------------------------|
//! | `factorized`                | `lambda_cardinality` 1–6 (2), `apparatus_cardinality` 1–4 (2), `distribution` uniform/random (uniform), `seed` (1) |
//! | `joint-composite`           | as `factorized`                                                                   |
//! | `setting-dependent-witness` | angles `a`, `a_prime`, `b`, `b_prime` in radians (0, π/2, π/4, −π/4)             |
//! | `stochastic-equivalent`     | `lambda_cardinality`, `apparatus_cardinality`, `seed` as above                    |
//!
//! Every template also accepts the angles, `estimator` (exact/monte-carlo,
//! default exact), `samples` 1–10⁹ (10⁵) and `run_seed` (the Monte Carlo
//! seed, default 1). Response tables and random distributions are drawn from
//! `seed`, so a template plus its parameters always yields the same file.

use std::collections::{BTreeMap, BTreeSet};

use lhv_core::locality::construct_nonlocal_witness;
use lhv_core::random::random_distribution;
use lhv_core::rng::SimRng;
use lhv_core::{
    labels, ApparatusModel, Distribution, FeasibilityError, HiddenSpace, Outcome, Pair, PerSetting, ResponseModel,
    SettingName, Settings, StochasticSource,
};

use crate::error::CliError;
use crate::scenario::{
    Analysis, DistributionSpec, EstimatorKind, ExperimentSpec, ModelSpec, RunSpec, Scenario, SpaceSpec, SCHEMA_VERSION,
};

pub const TEMPLATES: [&str; 4] = [
    "factorized",
    "joint-composite",
    "setting-dependent-witness",
    "stochastic-equivalent",
];

/// A bundled scenario file and the template invocation that produces it.
#[derive(Debug, Clone, Copy)]
pub struct Bundled {
    pub file: &'static str,
    pub template: &'static str,
    pub params: &'static [(&'static str, &'static str)],
}

pub const BUNDLED: [Bundled; 5] = [
    Bundled {
        file: "factorized.scenario",
        template: "factorized",
        params: &[
            ("lambda_cardinality", "3"),
            ("apparatus_cardinality", "2"),
            ("distribution", "random"),
            ("seed", "7"),
        ],
    },
    Bundled {
        file: "joint-composite.scenario",
        template: "joint-composite",
        params: &[
            ("lambda_cardinality", "2"),
            ("apparatus_cardinality", "2"),
            ("distribution", "random"),
            ("seed", "11"),
        ],
    },
    Bundled {
        file: "singlet-witness.scenario",
        template: "setting-dependent-witness",
        params: &[],
    },
    Bundled {
        file: "singlet-witness-monte-carlo.scenario",
        template: "setting-dependent-witness",
        params: &[
            ("estimator", "monte-carlo"),
            ("samples", "1000000"),
            ("run_seed", "2024"),
        ],
    },
    Bundled {
        file: "stochastic-equivalent.scenario",
        template: "stochastic-equivalent",
        params: &[
            ("lambda_cardinality", "3"),
            ("apparatus_cardinality", "3"),
            ("seed", "5"),
        ],
    },
];

struct Params {
    values: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Params {
    fn get<T: std::str::FromStr>(
        &mut self,
        name: &str,
        default: T,
        ok: impl Fn(&T) -> bool,
        range: &str,
    ) -> Result<T, CliError> {
        self.used.insert(name.to_string());
        let Some(raw) = self.values.get(name) else {
            return Ok(default);
        };
        let out_of_range = || CliError::ParameterOutOfRange {
            name: name.to_string(),
            detail: format!("`{raw}` is not {range}"),
        };
        let v: T = raw.trim().parse().map_err(|_| out_of_range())?;
        if ok(&v) {
            Ok(v)
        } else {
            Err(out_of_range())
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.values.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(CliError::ParameterOutOfRange {
                name: k.clone(),
                detail: "not a parameter of this template".into(),
            }),
            None => Ok(()),
        }
    }

    fn settings(&mut self) -> Result<Settings, CliError> {
        let d = Settings::tsirelson();
        let finite = |v: &f64| v.is_finite();
        Ok(Settings::new(
            self.get("a", d.a, finite, "a finite angle")?,
            self.get("a_prime", d.a_prime, finite, "a finite angle")?,
            self.get("b", d.b, finite, "a finite angle")?,
            self.get("b_prime", d.b_prime, finite, "a finite angle")?,
        ))
    }

    fn run(&mut self) -> Result<RunSpec, CliError> {
        let estimator = match self
            .get(
                "estimator",
                "exact".to_string(),
                |s| s == "exact" || s == "monte-carlo",
                "exact or monte-carlo",
            )?
            .as_str()
        {
            "exact" => EstimatorKind::Exact,
            _ => EstimatorKind::MonteCarlo,
        };
        let samples = self.get(
            "samples",
            100_000u64,
            |&n| (1..=1_000_000_000).contains(&n),
            "an integer in 1..=1000000000",
        )?;
        let seed = self.get("run_seed", 1u64, |_| true, "a 64-bit unsigned integer")?;
        let mc = estimator == EstimatorKind::MonteCarlo;
        Ok(RunSpec {
            estimator,
            samples: mc.then_some(samples),
            seed: mc.then_some(seed),
            analyses: vec![
                Analysis::Correlations,
                Analysis::Chsh,
                Analysis::BellCheck,
                Analysis::Feasibility,
            ],
        })
    }

    fn cardinalities(&mut self) -> Result<(usize, usize), CliError> {
        Ok((
            self.get(
                "lambda_cardinality",
                2usize,
                |n| (1..=6).contains(n),
                "an integer in 1..=6",
            )?,
            self.get(
                "apparatus_cardinality",
                2usize,
                |n| (1..=4).contains(n),
                "an integer in 1..=4",
            )?,
        ))
    }

    fn seed(&mut self) -> Result<u64, CliError> {
        self.get("seed", 1u64, |_| true, "a 64-bit unsigned integer")
    }

    fn random_distributions(&mut self) -> Result<bool, CliError> {
        let d = self.get(
            "distribution",
            "uniform".to_string(),
            |s| s == "uniform" || s == "random",
            "uniform or random",
        )?;
        Ok(d == "random")
    }
}

/// Build the scenario for `template` with `key=value` parameters.
pub fn generate_scenario(template: &str, params: &BTreeMap<String, String>) -> Result<Scenario, CliError> {
    let mut p = Params {
        values: params.clone(),
        used: BTreeSet::new(),
    };
    let settings = p.settings()?;
    let run = p.run()?;
    let body = match template {
        "factorized" => factorized(&mut p, false)?,
        "joint-composite" => factorized(&mut p, true)?,
        "setting-dependent-witness" => witness(settings)?,
        "stochastic-equivalent" => stochastic_equivalent(&mut p)?,
        other => return Err(CliError::UnknownTemplate(other.to_string())),
    };
    p.finish()?;
    Ok(Scenario {
        schema_version: SCHEMA_VERSION,
        settings,
        spaces: body.spaces,
        distributions: body.distributions,
        models: body.models,
        experiments: body.experiments,
        run,
    })
}

#[derive(Default)]
struct Body {
    spaces: Vec<SpaceSpec>,
    distributions: Vec<DistributionSpec>,
    models: Vec<ModelSpec>,
    experiments: Vec<ExperimentSpec>,
}

impl Body {
    fn space(&mut self, s: &HiddenSpace) {
        self.spaces.push(SpaceSpec {
            label: s.label().to_string(),
            values: s.values().to_vec(),
        });
    }

    fn distribution(&mut self, name: &str, d: &Distribution) -> String {
        self.distributions.push(DistributionSpec {
            name: name.to_string(),
            domain: d.labels().into_iter().map(str::to_string).collect(),
            weights: d.weights().to_vec(),
        });
        name.to_string()
    }

    fn apparatus_model(&mut self, name: &str, m: &ApparatusModel) {
        self.space(m.lambda());
        for s in SettingName::ALL {
            self.space(m.apparatus(s));
        }
        self.models.push(ModelSpec::ApparatusDeterministic {
            name: name.to_string(),
            lambda: m.lambda().label().to_string(),
            apparatus: SettingName::ALL
                .iter()
                .map(|&s| (s.key().to_string(), m.apparatus(s).label().to_string()))
                .collect(),
            outcomes: SettingName::ALL
                .iter()
                .map(|&s| (s.key().to_string(), outcome_values(m.table(s))))
                .collect(),
        });
    }

    fn stochastic_model(&mut self, name: &str, m: &StochasticSource) {
        self.models.push(ModelSpec::StochasticSource {
            name: name.to_string(),
            domain: m.domain().iter().map(|s| s.label().to_string()).collect(),
            prob_plus: SettingName::ALL
                .iter()
                .map(|&s| (s.key().to_string(), m.prob_plus(s).to_vec()))
                .collect(),
        });
    }

    /// `ρ(λ)` and one `ρ_p(λ_p)` per setting, uniform unless `rng` is given.
    fn factorized_distributions(&mut self, m: &ApparatusModel, mut rng: Option<&mut SimRng>) -> Factorized {
        let mut draw = |domain: Vec<HiddenSpace>| match rng.as_deref_mut() {
            Some(r) => random_distribution(r, domain),
            None => Distribution::uniform(domain).expect("nonempty domain"),
        };
        let source = draw(vec![m.lambda().clone()]);
        let apparatus = PerSetting::from_fn(|s| draw(vec![m.apparatus(s).clone()]));
        Factorized {
            source_name: self.distribution("rho", &source),
            apparatus_names: apparatus
                .iter()
                .map(|(s, d)| (s.key().to_string(), self.distribution(&format!("rho_{}", s.key()), d)))
                .collect(),
            apparatus,
        }
    }
}

struct Factorized {
    source_name: String,
    apparatus_names: BTreeMap<String, String>,
    apparatus: PerSetting<Distribution>,
}

fn outcome_values(t: &[Outcome]) -> Vec<i8> {
    t.iter().map(|o| o.value()).collect()
}

fn factorized(p: &mut Params, joint: bool) -> Result<Body, CliError> {
    let (nl, na) = p.cardinalities()?;
    let seed = p.seed()?;
    let random = p.random_distributions()?;
    let mut rng = SimRng::new(seed);
    let model = apparatus_model_with(&mut rng, nl, na);
    let mut body = Body::default();
    body.apparatus_model("apparatus", &model);
    if joint {
        let domain = model.composite_spaces().to_vec();
        let d = if random {
            random_distribution(&mut rng, domain)
        } else {
            Distribution::uniform(domain).expect("nonempty domain")
        };
        let joint = body.distribution("rho_joint", &d);
        body.experiments.push(ExperimentSpec::JointComposite {
            name: "joint-composite".into(),
            model: "apparatus".into(),
            joint,
        });
    } else {
        let f = body.factorized_distributions(&model, random.then_some(&mut rng));
        body.experiments.push(ExperimentSpec::FactorizedApparatus {
            name: "factorized".into(),
            model: "apparatus".into(),
            source: f.source_name,
            apparatus: f.apparatus_names,
        });
    }
    Ok(body)
}

/// Random ±1 tables on spaces of exactly the requested cardinalities.
fn apparatus_model_with(rng: &mut SimRng, nl: usize, na: usize) -> ApparatusModel {
    let lambda = HiddenSpace::indexed(labels::LAMBDA, nl).expect("cardinality in range");
    let apparatus = PerSetting::from_fn(|s: SettingName| {
        HiddenSpace::indexed(s.apparatus_label(), na).expect("cardinality in range")
    });
    ApparatusModel::from_fn(lambda, apparatus, |_, _, _| {
        if rng.bernoulli(0.5) {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    })
    .expect("labels are distinct")
}

fn witness(settings: Settings) -> Result<Body, CliError> {
    let w = construct_nonlocal_witness(&settings).map_err(|e| match e {
        FeasibilityError::NonViolatingAngles { s } => CliError::ParameterOutOfRange {
            name: "a, a_prime, b, b_prime".into(),
            detail: format!("the singlet CHSH value at these angles is {s}, which does not exceed the local bound"),
        },
        other => CliError::execution(other),
    })?;
    let ResponseModel::Apparatus(model) = &w.model else {
        unreachable!("the witness is an apparatus model")
    };
    let mut body = Body::default();
    body.apparatus_model("witness", model);
    let pairs = Pair::ALL
        .iter()
        .map(|&pair| {
            (
                pair.key().to_string(),
                body.distribution(&format!("rho_{}", pair.key()), w.family.marginal(pair)),
            )
        })
        .collect();
    body.experiments.push(ExperimentSpec::SettingDependent {
        name: "singlet-witness".into(),
        model: "witness".into(),
        pairs,
    });
    Ok(body)
}

fn stochastic_equivalent(p: &mut Params) -> Result<Body, CliError> {
    let (nl, na) = p.cardinalities()?;
    let seed = p.seed()?;
    let mut rng = SimRng::new(seed);
    let model = apparatus_model_with(&mut rng, nl, na);
    let mut body = Body::default();
    body.apparatus_model("apparatus", &model);
    let f = body.factorized_distributions(&model, Some(&mut rng));
    let stochastic = model.to_stochastic(&f.apparatus).map_err(CliError::execution)?;
    body.stochastic_model("stochastic", &stochastic);
    body.experiments.push(ExperimentSpec::FactorizedApparatus {
        name: "apparatus".into(),
        model: "apparatus".into(),
        source: f.source_name.clone(),
        apparatus: f.apparatus_names,
    });
    body.experiments.push(ExperimentSpec::SourceOnly {
        name: "stochastic".into(),
        model: "stochastic".into(),
        source: f.source_name,
    });
    Ok(body)
}
