//! Seeded generators for randomized scenarios, shared by property tests, the
//! acceptance suite and the scenario templates.

use crate::engine::{OutcomeProbabilities, ScenarioDistributions};
use crate::hv::{labels, Distribution, HiddenSpace};
use crate::response::{ApparatusModel, Outcome};
use crate::rng::SimRng;
use crate::setting::{Pair, PerPair, PerSetting, SettingName};

fn cardinality(rng: &mut SimRng, max: usize) -> usize {
    1 + rng.below(max.max(1) as u64) as usize
}

pub fn random_space(rng: &mut SimRng, label: &str, max_cardinality: usize) -> HiddenSpace {
    HiddenSpace::indexed(label, cardinality(rng, max_cardinality)).expect("cardinality is positive")
}

/// Distribution drawn uniformly from the probability simplex over `domain`.
pub fn random_distribution(rng: &mut SimRng, domain: Vec<HiddenSpace>) -> Distribution {
    let n = domain.iter().map(HiddenSpace::cardinality).product();
    Distribution::renormalized(domain, rng.simplex_point(n)).expect("simplex point is a valid weight vector")
}

/// Apparatus model with every space of cardinality `1..=max_cardinality` and
/// uniformly random ±1 tables.
pub fn random_apparatus_model(rng: &mut SimRng, max_cardinality: usize) -> ApparatusModel {
    let lambda = random_space(rng, labels::LAMBDA, max_cardinality);
    let apparatus = PerSetting::from_fn(|s: SettingName| random_space(rng, s.apparatus_label(), max_cardinality));
    ApparatusModel::from_fn(lambda, apparatus, |_, _, _| {
        if rng.bernoulli(0.5) {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    })
    .expect("labels are distinct")
}

/// `ρ(λ)` and `ρ_p(λ_p)` for `model`.
pub fn random_factorized(rng: &mut SimRng, model: &ApparatusModel) -> ScenarioDistributions {
    let source = random_distribution(rng, vec![model.lambda().clone()]);
    let apparatus = PerSetting::from_fn(|s| random_distribution(rng, vec![model.apparatus(s).clone()]));
    ScenarioDistributions::FactorizedApparatus { source, apparatus }
}

/// An arbitrary (generally correlated) `ρ(λ̃)` for `model`.
pub fn random_joint(rng: &mut SimRng, model: &ApparatusModel) -> ScenarioDistributions {
    ScenarioDistributions::JointComposite(random_distribution(rng, model.composite_spaces().to_vec()))
}

/// Random no-signalling outcome tables for the four setting pairs.
///
/// With `nonlocal_candidate` the tables have uniform marginals and
/// correlations `v·σ_pq` with an odd number of negative signs `σ_pq` and
/// `v ∈ [0.3, 1]`, which straddles the local region (`v ≤ 1/2`). Otherwise
/// single-station marginals are random and each `p_{++}` is uniform over the
/// range compatible with them.
pub fn random_no_signalling_tables(rng: &mut SimRng, nonlocal_candidate: bool) -> PerPair<OutcomeProbabilities> {
    if nonlocal_candidate {
        let v = rng.uniform_in(0.3, 1.0);
        let negatives: Vec<Pair> = if rng.bernoulli(0.5) {
            vec![Pair::ALL[rng.below(4) as usize]]
        } else {
            let keep = Pair::ALL[rng.below(4) as usize];
            Pair::ALL.into_iter().filter(|&p| p != keep).collect()
        };
        PerPair::from_fn(|p| {
            let e = if negatives.contains(&p) { -v } else { v };
            OutcomeProbabilities::new((1.0 + e) / 4.0, (1.0 - e) / 4.0, (1.0 - e) / 4.0, (1.0 + e) / 4.0)
        })
    } else {
        let plus = PerSetting::from_fn(|_| rng.uniform());
        PerPair::from_fn(|p| {
            let (pa, pb) = (plus[p.alice()], plus[p.bob()]);
            let pp = rng.uniform_in((pa + pb - 1.0).max(0.0), pa.min(pb));
            let (pm, mp) = ((pa - pp).max(0.0), (pb - pp).max(0.0));
            OutcomeProbabilities::new(pp, pm, mp, (1.0 - pa - pb + pp).max(0.0))
        })
    }
}
