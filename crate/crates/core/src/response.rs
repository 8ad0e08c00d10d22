//! Outcome rules for the two stations.
//!
//! Four families are supported:
//!
//! * [`DeterministicSource`]: `f(p, λ)`, `g(q, λ)` with outcomes in `{+1, −1}`;
//! * [`StochasticSource`]: `p(+1 | p, λ)`, outcomes drawn independently per side;
//! * [`ContextualModel`]: `f(p, q, λ)`, `g(p, q, λ)`, allowed to read the remote
//!   setting unless the stations are flagged as space-like separated;
//! * [`ApparatusModel`]: `f(p, λ, λ_p)`, where `λ_p` lives in the analyzer
//!   used for setting `p`.
//!
//! Hidden points of the source-level families are multi-indices over an ordered
//! domain of [`HiddenSpace`]s; tables are stored row-major over that domain.
//! Apparatus tables are row-major over `(λ, λ_p)`.

use std::collections::HashSet;

use crate::error::ModelError;
use crate::hv::{ravel, unravel, Distribution, HiddenSpace};
use crate::setting::{PerSetting, SettingName, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn sign(self) -> f64 {
        f64::from(self.value())
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    pub fn is_plus(self) -> bool {
        self == Outcome::Plus
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    DeterministicSource,
    StochasticSource,
    Contextual,
    ApparatusDeterministic,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DeterministicSource => "deterministic-source",
            ModelKind::StochasticSource => "stochastic-source",
            ModelKind::Contextual => "contextual",
            ModelKind::ApparatusDeterministic => "apparatus-deterministic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            ModelKind::DeterministicSource,
            ModelKind::StochasticSource,
            ModelKind::Contextual,
            ModelKind::ApparatusDeterministic,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }
}

fn domain_size(domain: &[HiddenSpace]) -> usize {
    domain.iter().map(HiddenSpace::cardinality).product()
}

fn check_domain(domain: &[HiddenSpace]) -> Result<(), ModelError> {
    if domain.is_empty() {
        return Err(ModelError::DomainMismatch("model domain has no spaces".into()));
    }
    let mut seen = HashSet::new();
    for s in domain {
        if !seen.insert(s.label()) {
            return Err(ModelError::DomainMismatch(format!(
                "space `{}` listed twice",
                s.label()
            )));
        }
    }
    Ok(())
}

fn check_len(what: impl FnOnce() -> String, expected: usize, actual: usize) -> Result<(), ModelError> {
    if expected == actual {
        Ok(())
    } else {
        Err(ModelError::TableShape {
            setting: what(),
            expected,
            actual,
        })
    }
}

/// Flat index of `point` over `domain`, checking dimension and range.
fn flat_point(domain: &[HiddenSpace], point: &[usize]) -> Result<usize, ModelError> {
    if point.len() != domain.len() {
        return Err(ModelError::PointDimensionMismatch {
            expected: domain.len(),
            actual: point.len(),
        });
    }
    let cards: Vec<usize> = domain.iter().map(HiddenSpace::cardinality).collect();
    for (axis, (&index, &cardinality)) in point.iter().zip(&cards).enumerate() {
        if index >= cardinality {
            return Err(ModelError::PointOutOfRange {
                axis,
                index,
                cardinality,
            });
        }
    }
    Ok(ravel(point, &cards))
}

/// `f(p, λ)` and `g(q, λ)` on a source-only hidden variable.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicSource {
    domain: Vec<HiddenSpace>,
    tables: PerSetting<Vec<Outcome>>,
}

impl DeterministicSource {
    pub fn new(domain: Vec<HiddenSpace>, tables: PerSetting<Vec<Outcome>>) -> Result<Self, ModelError> {
        check_domain(&domain)?;
        let n = domain_size(&domain);
        for (s, t) in tables.iter() {
            check_len(|| s.to_string(), n, t.len())?;
        }
        Ok(DeterministicSource { domain, tables })
    }

    /// Tabulate a closed-form rule on the domain.
    pub fn from_fn(
        domain: Vec<HiddenSpace>,
        mut f: impl FnMut(SettingName, &[usize]) -> Outcome,
    ) -> Result<Self, ModelError> {
        check_domain(&domain)?;
        let cards: Vec<usize> = domain.iter().map(HiddenSpace::cardinality).collect();
        let n = domain_size(&domain);
        let tables = PerSetting::from_fn(|s| (0..n).map(|i| f(s, &unravel(i, &cards))).collect());
        Ok(DeterministicSource { domain, tables })
    }

    pub fn domain(&self) -> &[HiddenSpace] {
        &self.domain
    }

    pub fn table(&self, setting: SettingName) -> &[Outcome] {
        &self.tables[setting]
    }

    pub fn outcome_flat(&self, setting: SettingName, flat: usize) -> Outcome {
        self.tables[setting][flat]
    }
}

/// `p(+1 | p, λ)` per setting and source point.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticSource {
    domain: Vec<HiddenSpace>,
    prob_plus: PerSetting<Vec<f64>>,
}

impl StochasticSource {
    pub fn new(domain: Vec<HiddenSpace>, prob_plus: PerSetting<Vec<f64>>) -> Result<Self, ModelError> {
        check_domain(&domain)?;
        let n = domain_size(&domain);
        for (s, t) in prob_plus.iter() {
            check_len(|| s.to_string(), n, t.len())?;
            if let Some((index, &value)) = t.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
                return Err(ModelError::InvalidProbability {
                    setting: s,
                    index,
                    value,
                });
            }
        }
        Ok(StochasticSource { domain, prob_plus })
    }

    pub fn domain(&self) -> &[HiddenSpace] {
        &self.domain
    }

    pub fn prob_plus(&self, setting: SettingName) -> &[f64] {
        &self.prob_plus[setting]
    }

    /// `Σ_m m·p(m | setting, λ) = 2·p(+1) − 1`.
    pub fn effective_response_flat(&self, setting: SettingName, flat: usize) -> f64 {
        2.0 * self.prob_plus[setting][flat] - 1.0
    }
}

/// Outcome rules that may read the remote setting.
///
/// `tables[own][r]` holds the rule for `own` when the other station uses its
/// setting with local index `r` (0 unprimed, 1 primed).
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualModel {
    domain: Vec<HiddenSpace>,
    separated: bool,
    tables: PerSetting<[Vec<Outcome>; 2]>,
}

impl ContextualModel {
    /// With `separated = true` every table must ignore the remote setting.
    pub fn new(
        domain: Vec<HiddenSpace>,
        separated: bool,
        tables: PerSetting<[Vec<Outcome>; 2]>,
    ) -> Result<Self, ModelError> {
        check_domain(&domain)?;
        let n = domain_size(&domain);
        for (s, [t0, t1]) in tables.iter() {
            for (r, t) in [t0, t1].into_iter().enumerate() {
                let remote = remote_of(s, r);
                check_len(|| format!("{s} given {remote}"), n, t.len())?;
            }
            if separated {
                if let Some(index) = t0.iter().zip(t1).position(|(x, y)| x != y) {
                    return Err(ModelError::RemoteDependenceForbidden { setting: s, index });
                }
            }
        }
        Ok(ContextualModel {
            domain,
            separated,
            tables,
        })
    }

    /// Embed a local model as a contextual one that ignores the remote setting.
    pub fn from_local(model: &DeterministicSource, separated: bool) -> Self {
        ContextualModel {
            domain: model.domain.clone(),
            separated,
            tables: model.tables.map(|_, t| [t.clone(), t.clone()]),
        }
    }

    pub fn domain(&self) -> &[HiddenSpace] {
        &self.domain
    }

    pub fn separated(&self) -> bool {
        self.separated
    }

    pub fn table(&self, own: SettingName, remote: SettingName) -> &[Outcome] {
        &self.tables[own][remote.local_index()]
    }

    pub fn outcome_flat(&self, own: SettingName, remote: SettingName, flat: usize) -> Outcome {
        self.tables[own][remote.local_index()][flat]
    }

    pub fn is_remote_independent(&self) -> bool {
        self.tables.0.iter().all(|[t0, t1]| t0 == t1)
    }

    /// The local model this reduces to when no table reads the remote setting.
    pub fn reduce_to_local(&self) -> Option<DeterministicSource> {
        self.is_remote_independent().then(|| DeterministicSource {
            domain: self.domain.clone(),
            tables: self.tables.map(|_, [t0, _]| t0.clone()),
        })
    }
}

fn remote_of(own: SettingName, local: usize) -> SettingName {
    match own.side() {
        Side::A => SettingName::bob(local),
        Side::B => SettingName::alice(local),
    }
}

/// `f(p, λ, λ_p)`: outcomes depend on the source variable and on the state of
/// the analyzer used for setting `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApparatusModel {
    lambda: HiddenSpace,
    apparatus: PerSetting<HiddenSpace>,
    tables: PerSetting<Vec<Outcome>>,
}

impl ApparatusModel {
    pub fn new(
        lambda: HiddenSpace,
        apparatus: PerSetting<HiddenSpace>,
        tables: PerSetting<Vec<Outcome>>,
    ) -> Result<Self, ModelError> {
        let mut all = vec![lambda.clone()];
        all.extend(apparatus.0.iter().cloned());
        check_domain(&all)?;
        for (s, t) in tables.iter() {
            check_len(
                || s.to_string(),
                lambda.cardinality() * apparatus[s].cardinality(),
                t.len(),
            )?;
        }
        Ok(ApparatusModel {
            lambda,
            apparatus,
            tables,
        })
    }

    pub fn from_fn(
        lambda: HiddenSpace,
        apparatus: PerSetting<HiddenSpace>,
        mut f: impl FnMut(SettingName, usize, usize) -> Outcome,
    ) -> Result<Self, ModelError> {
        let tables = PerSetting::from_fn(|s| {
            let m = apparatus[s].cardinality();
            (0..lambda.cardinality() * m).map(|i| f(s, i / m, i % m)).collect()
        });
        ApparatusModel::new(lambda, apparatus, tables)
    }

    pub fn lambda(&self) -> &HiddenSpace {
        &self.lambda
    }

    pub fn apparatus(&self, setting: SettingName) -> &HiddenSpace {
        &self.apparatus[setting]
    }

    pub fn apparatus_spaces(&self) -> &PerSetting<HiddenSpace> {
        &self.apparatus
    }

    pub fn table(&self, setting: SettingName) -> &[Outcome] {
        &self.tables[setting]
    }

    /// The five spaces `(λ, λ_a, λ_a′, λ_b, λ_b′)` of the composite variable.
    pub fn composite_spaces(&self) -> [HiddenSpace; 5] {
        let [a, ap, b, bp] = self.apparatus.0.clone();
        [self.lambda.clone(), a, ap, b, bp]
    }

    pub fn outcome_at(&self, setting: SettingName, lambda: usize, apparatus: usize) -> Outcome {
        self.tables[setting][lambda * self.apparatus[setting].cardinality() + apparatus]
    }

    /// `F̄(p, λ) = Σ_{λ_p} f(p, λ, λ_p) ρ_p(λ_p)`.
    pub fn effective_response(
        &self,
        setting: SettingName,
        lambda: usize,
        apparatus_dist: &Distribution,
    ) -> Result<f64, ModelError> {
        self.check_apparatus_dist(setting, apparatus_dist)?;
        if lambda >= self.lambda.cardinality() {
            return Err(ModelError::PointOutOfRange {
                axis: 0,
                index: lambda,
                cardinality: self.lambda.cardinality(),
            });
        }
        Ok(apparatus_dist
            .weights()
            .iter()
            .enumerate()
            .map(|(k, w)| self.outcome_at(setting, lambda, k).sign() * w)
            .sum())
    }

    /// Probability that the analyzer for `setting` reports +1 given `λ`.
    pub(crate) fn plus_probability(&self, setting: SettingName, lambda: usize, apparatus_dist: &Distribution) -> f64 {
        apparatus_dist
            .weights()
            .iter()
            .enumerate()
            .filter(|&(k, _)| self.outcome_at(setting, lambda, k).is_plus())
            .map(|(_, w)| w)
            .sum::<f64>()
            // weights sum to 1 only up to rounding
            .clamp(0.0, 1.0)
    }

    pub(crate) fn check_apparatus_dist(&self, setting: SettingName, d: &Distribution) -> Result<(), ModelError> {
        if d.domain() != std::slice::from_ref(&self.apparatus[setting]) {
            return Err(ModelError::DomainMismatch(format!(
                "distribution for {setting} must be over `{}` alone, got {:?}",
                self.apparatus[setting].label(),
                d.labels()
            )));
        }
        Ok(())
    }

    /// Reinterpret as a deterministic model on `λ̃ = λ ⊗ λ_a ⊗ λ_a′ ⊗ λ_b ⊗ λ_b′`.
    pub fn lift(&self, spaces: &[HiddenSpace; 5]) -> Result<DeterministicSource, ModelError> {
        let own = self.composite_spaces();
        if let Some(i) = (0..5).find(|&i| own[i] != spaces[i]) {
            return Err(ModelError::DomainMismatch(format!(
                "composite space {i} is `{}` but the model uses `{}`",
                spaces[i].label(),
                own[i].label()
            )));
        }
        DeterministicSource::from_fn(spaces.to_vec(), |s, idx| self.outcome_at(s, idx[0], idx[1 + s.index()]))
    }

    /// Stochastic model with `p(+1 | p, λ) = Σ_{λ_p : f = +1} ρ_p(λ_p)`.
    pub fn to_stochastic(&self, apparatus_dists: &PerSetting<Distribution>) -> Result<StochasticSource, ModelError> {
        for (s, d) in apparatus_dists.iter() {
            self.check_apparatus_dist(s, d)?;
        }
        let prob_plus = PerSetting::from_fn(|s| {
            (0..self.lambda.cardinality())
                .map(|l| self.plus_probability(s, l, &apparatus_dists[s]))
                .collect()
        });
        StochasticSource::new(vec![self.lambda.clone()], prob_plus)
    }
}

/// Any supported outcome rule.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseModel {
    DeterministicSource(DeterministicSource),
    StochasticSource(StochasticSource),
    Contextual(ContextualModel),
    Apparatus(ApparatusModel),
}

impl From<DeterministicSource> for ResponseModel {
    fn from(m: DeterministicSource) -> Self {
        ResponseModel::DeterministicSource(m)
    }
}

impl From<StochasticSource> for ResponseModel {
    fn from(m: StochasticSource) -> Self {
        ResponseModel::StochasticSource(m)
    }
}

impl From<ContextualModel> for ResponseModel {
    fn from(m: ContextualModel) -> Self {
        ResponseModel::Contextual(m)
    }
}

impl From<ApparatusModel> for ResponseModel {
    fn from(m: ApparatusModel) -> Self {
        ResponseModel::Apparatus(m)
    }
}

impl ResponseModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            ResponseModel::DeterministicSource(_) => ModelKind::DeterministicSource,
            ResponseModel::StochasticSource(_) => ModelKind::StochasticSource,
            ResponseModel::Contextual(_) => ModelKind::Contextual,
            ResponseModel::Apparatus(_) => ModelKind::ApparatusDeterministic,
        }
    }

    /// Source-level domain; `None` for apparatus models.
    pub fn source_domain(&self) -> Option<&[HiddenSpace]> {
        match self {
            ResponseModel::DeterministicSource(m) => Some(m.domain()),
            ResponseModel::StochasticSource(m) => Some(m.domain()),
            ResponseModel::Contextual(m) => Some(m.domain()),
            ResponseModel::Apparatus(_) => None,
        }
    }

    fn mismatch(&self, expected: &'static str) -> ModelError {
        ModelError::KindMismatch {
            expected,
            found: self.kind().name(),
        }
    }

    /// Deterministic outcome at a hidden point.
    ///
    /// For apparatus models `point` is `[λ, λ_setting]`; otherwise it is a
    /// multi-index over the model's domain. `remote` must be given exactly
    /// when the model is contextual, and must belong to the other station.
    pub fn outcome(
        &self,
        setting: SettingName,
        point: &[usize],
        remote: Option<SettingName>,
    ) -> Result<Outcome, ModelError> {
        match (self, remote) {
            (ResponseModel::StochasticSource(_), _) => Err(self.mismatch("deterministic")),
            (ResponseModel::Contextual(_), None) => Err(ModelError::MissingRemoteSetting),
            (ResponseModel::Contextual(m), Some(r)) => {
                if r.side() == setting.side() {
                    return Err(ModelError::WrongSide {
                        setting: r,
                        role: "remote setting",
                    });
                }
                Ok(m.outcome_flat(setting, r, flat_point(&m.domain, point)?))
            }
            (_, Some(_)) => Err(ModelError::UnexpectedRemoteSetting),
            (ResponseModel::DeterministicSource(m), None) => Ok(m.outcome_flat(setting, flat_point(&m.domain, point)?)),
            (ResponseModel::Apparatus(m), None) => {
                let spaces = [m.lambda.clone(), m.apparatus[setting].clone()];
                flat_point(&spaces, point)?;
                Ok(m.outcome_at(setting, point[0], point[1]))
            }
        }
    }

    /// `f̄(p, λ) = Σ_m m·p(m | p, λ)`.
    pub fn effective_response_stochastic(&self, setting: SettingName, point: &[usize]) -> Result<f64, ModelError> {
        match self {
            ResponseModel::StochasticSource(m) => Ok(m.effective_response_flat(setting, flat_point(&m.domain, point)?)),
            _ => Err(self.mismatch(ModelKind::StochasticSource.name())),
        }
    }

    /// `F̄(p, λ) = Σ_{λ_p} f(p, λ, λ_p) ρ_p(λ_p)`.
    pub fn effective_response_apparatus(
        &self,
        setting: SettingName,
        lambda: usize,
        apparatus_dist: &Distribution,
    ) -> Result<f64, ModelError> {
        match self {
            ResponseModel::Apparatus(m) => m.effective_response(setting, lambda, apparatus_dist),
            _ => Err(self.mismatch(ModelKind::ApparatusDeterministic.name())),
        }
    }

    pub fn lift_to_composite(&self, spaces: &[HiddenSpace; 5]) -> Result<ResponseModel, ModelError> {
        match self {
            ResponseModel::Apparatus(m) => Ok(m.lift(spaces)?.into()),
            _ => Err(self.mismatch(ModelKind::ApparatusDeterministic.name())),
        }
    }

    pub fn stochastic_from_apparatus(
        &self,
        apparatus_dists: &PerSetting<Distribution>,
    ) -> Result<ResponseModel, ModelError> {
        match self {
            ResponseModel::Apparatus(m) => Ok(m.to_stochastic(apparatus_dists)?.into()),
            _ => Err(self.mismatch(ModelKind::ApparatusDeterministic.name())),
        }
    }
}
