use super::{CorrelationReport, Estimator, OutcomeProbabilities, PairEstimate, ScenarioDistributions};
use crate::error::EngineError;
use crate::hv::{step, Distribution, HiddenSpace};
use crate::response::{ApparatusModel, ResponseModel};
use crate::setting::{Pair, PerPair, SettingName, Settings};

fn incompatible(model: &ResponseModel, dists: &ScenarioDistributions) -> EngineError {
    EngineError::IncompatibleModeModel {
        mode: dists.mode().name(),
        kind: model.kind().name(),
    }
}

fn expect_domain(what: &str, d: &Distribution, expected: &[HiddenSpace]) -> Result<(), EngineError> {
    if d.domain() == expected {
        Ok(())
    } else {
        Err(EngineError::DomainMismatch(format!(
            "{what} is over {:?}, expected {:?}",
            d.labels(),
            expected.iter().map(HiddenSpace::label).collect::<Vec<_>>()
        )))
    }
}

fn pair_spaces(m: &ApparatusModel, pair: Pair) -> [HiddenSpace; 3] {
    [
        m.lambda().clone(),
        m.apparatus(pair.alice()).clone(),
        m.apparatus(pair.bob()).clone(),
    ]
}

/// Verify that `model` can be evaluated under `dists` and that every
/// distribution lives on the spaces the model reads.
pub fn check_compatibility(model: &ResponseModel, dists: &ScenarioDistributions) -> Result<(), EngineError> {
    use ScenarioDistributions as D;
    match (dists, model) {
        (D::SourceOnly(rho), m) if m.source_domain().is_some() => {
            expect_domain("source distribution", rho, m.source_domain().unwrap_or_default())
        }
        (D::SettingDependent(rhos), ResponseModel::Apparatus(m)) => rhos
            .iter()
            .try_for_each(|(p, d)| expect_domain(&format!("ρ for {p}"), d, &pair_spaces(m, p))),
        (D::SettingDependent(rhos), m) if m.source_domain().is_some() => rhos
            .iter()
            .try_for_each(|(p, d)| expect_domain(&format!("ρ for {p}"), d, m.source_domain().unwrap_or_default())),
        (D::FactorizedApparatus { source, apparatus }, ResponseModel::Apparatus(m)) => {
            expect_domain("source distribution", source, std::slice::from_ref(m.lambda()))?;
            apparatus.iter().try_for_each(|(s, d)| {
                expect_domain(
                    &format!("apparatus distribution for {s}"),
                    d,
                    std::slice::from_ref(m.apparatus(s)),
                )
            })
        }
        (D::JointComposite(joint), ResponseModel::Apparatus(m)) => {
            expect_domain("joint distribution", joint, &m.composite_spaces())
        }
        _ => Err(incompatible(model, dists)),
    }
}

/// A hidden-point cell with its weight and the conditional probability that
/// each station reports +1 there. Outcomes are independent given the cell.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Atom {
    pub weight: f64,
    pub alice_plus: f64,
    pub bob_plus: f64,
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn source_plus(model: &ResponseModel, own: SettingName, remote: SettingName, flat: usize) -> f64 {
    match model {
        ResponseModel::DeterministicSource(m) => indicator(m.outcome_flat(own, flat).is_plus()),
        ResponseModel::StochasticSource(m) => m.prob_plus(own)[flat],
        ResponseModel::Contextual(m) => indicator(m.outcome_flat(own, remote, flat).is_plus()),
        ResponseModel::Apparatus(_) => unreachable!("apparatus models have no source table"),
    }
}

/// Expand one setting pair into atoms over the hidden points it samples.
pub(crate) fn pair_atoms(
    model: &ResponseModel,
    dists: &ScenarioDistributions,
    pair: Pair,
) -> Result<Vec<Atom>, EngineError> {
    use ScenarioDistributions as D;
    check_compatibility(model, dists)?;
    let (p, q) = (pair.alice(), pair.bob());
    let source_atoms = |rho: &Distribution| {
        rho.weights()
            .iter()
            .enumerate()
            .map(|(i, &weight)| Atom {
                weight,
                alice_plus: source_plus(model, p, q, i),
                bob_plus: source_plus(model, q, p, i),
            })
            .collect::<Vec<_>>()
    };
    let atoms = match (dists, model) {
        (D::SourceOnly(rho), _) => source_atoms(rho),
        (D::SettingDependent(rhos), ResponseModel::Apparatus(m)) => {
            triple_atoms(m, pair, |l, i, j| rhos[pair].weight_at(&[l, i, j]))
        }
        (D::SettingDependent(rhos), _) => source_atoms(&rhos[pair]),
        (D::FactorizedApparatus { source, apparatus }, ResponseModel::Apparatus(m)) => {
            triple_atoms(m, pair, |l, i, j| {
                source.weights()[l] * apparatus[p].weights()[i] * apparatus[q].weights()[j]
            })
        }
        (D::JointComposite(joint), ResponseModel::Apparatus(m)) => {
            let cards = joint.cardinalities();
            let mut idx = vec![0; 5];
            joint
                .weights()
                .iter()
                .map(|&weight| {
                    let atom = Atom {
                        weight,
                        alice_plus: indicator(m.outcome_at(p, idx[0], idx[1 + p.index()]).is_plus()),
                        bob_plus: indicator(m.outcome_at(q, idx[0], idx[1 + q.index()]).is_plus()),
                    };
                    step(&mut idx, &cards);
                    atom
                })
                .collect()
        }
        _ => return Err(incompatible(model, dists)),
    };
    Ok(atoms)
}

fn triple_atoms(m: &ApparatusModel, pair: Pair, weight: impl Fn(usize, usize, usize) -> f64) -> Vec<Atom> {
    let (p, q) = (pair.alice(), pair.bob());
    let (nl, np, nq) = (
        m.lambda().cardinality(),
        m.apparatus(p).cardinality(),
        m.apparatus(q).cardinality(),
    );
    let mut out = Vec::with_capacity(nl * np * nq);
    for l in 0..nl {
        for i in 0..np {
            for j in 0..nq {
                out.push(Atom {
                    weight: weight(l, i, j),
                    alice_plus: indicator(m.outcome_at(p, l, i).is_plus()),
                    bob_plus: indicator(m.outcome_at(q, l, j).is_plus()),
                });
            }
        }
    }
    out
}

/// Exact `p_{±±}` for one setting pair.
pub fn exact_probabilities(
    model: &ResponseModel,
    dists: &ScenarioDistributions,
    pair: Pair,
) -> Result<OutcomeProbabilities, EngineError> {
    let mut out = OutcomeProbabilities::default();
    for a in pair_atoms(model, dists, pair)? {
        let (ap, am) = (a.alice_plus, 1.0 - a.alice_plus);
        let (bp, bm) = (a.bob_plus, 1.0 - a.bob_plus);
        out.pp += a.weight * ap * bp;
        out.pm += a.weight * ap * bm;
        out.mp += a.weight * am * bp;
        out.mm += a.weight * am * bm;
    }
    Ok(out)
}

/// Exact `E(p, q)` by direct summation of the product of (effective) responses:
/// `Σ f g ρ` for deterministic and contextual models, `Σ f̄ ḡ ρ` for stochastic
/// ones, `Σ F̄ Ḡ ρ` for factorized apparatus distributions and `Σ f g ρ(λ̃)`
/// over the full composite variable for a joint distribution.
pub fn exact_correlation(model: &ResponseModel, dists: &ScenarioDistributions, pair: Pair) -> Result<f64, EngineError> {
    use ScenarioDistributions as D;
    check_compatibility(model, dists)?;
    let (p, q) = (pair.alice(), pair.bob());
    let source_sum = |rho: &Distribution| -> f64 {
        rho.weights()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let fg = match model {
                    ResponseModel::DeterministicSource(m) => m.outcome_flat(p, i).sign() * m.outcome_flat(q, i).sign(),
                    ResponseModel::StochasticSource(m) => {
                        m.effective_response_flat(p, i) * m.effective_response_flat(q, i)
                    }
                    ResponseModel::Contextual(m) => m.outcome_flat(p, q, i).sign() * m.outcome_flat(q, p, i).sign(),
                    ResponseModel::Apparatus(_) => unreachable!(),
                };
                fg * w
            })
            .sum()
    };
    let e = match (dists, model) {
        (D::SourceOnly(rho), _) => source_sum(rho),
        (D::SettingDependent(rhos), ResponseModel::Apparatus(m)) => {
            let rho = &rhos[pair];
            let cards = rho.cardinalities();
            let mut idx = vec![0; 3];
            let mut acc = 0.0;
            for &w in rho.weights() {
                acc += m.outcome_at(p, idx[0], idx[1]).sign() * m.outcome_at(q, idx[0], idx[2]).sign() * w;
                step(&mut idx, &cards);
            }
            acc
        }
        (D::SettingDependent(rhos), _) => source_sum(&rhos[pair]),
        (D::FactorizedApparatus { source, apparatus }, ResponseModel::Apparatus(m)) => {
            let mut acc = 0.0;
            for (l, w) in source.weights().iter().enumerate() {
                let f_bar = m.effective_response(p, l, &apparatus[p])?;
                let g_bar = m.effective_response(q, l, &apparatus[q])?;
                acc += f_bar * g_bar * w;
            }
            acc
        }
        (D::JointComposite(joint), ResponseModel::Apparatus(m)) => {
            let cards = joint.cardinalities();
            let mut idx = vec![0; 5];
            let mut acc = 0.0;
            for &w in joint.weights() {
                acc += m.outcome_at(p, idx[0], idx[1 + p.index()]).sign()
                    * m.outcome_at(q, idx[0], idx[1 + q.index()]).sign()
                    * w;
                step(&mut idx, &cards);
            }
            acc
        }
        _ => return Err(incompatible(model, dists)),
    };
    Ok(e)
}

/// Exact report over all four setting pairs. Correlations are derived from the
/// exact outcome probabilities.
pub fn exact_report(
    model: &ResponseModel,
    dists: &ScenarioDistributions,
    settings: Settings,
) -> Result<CorrelationReport, EngineError> {
    let pairs = PerPair::from_fn(|pair| pair).try_map(|pair, _| {
        let probabilities = exact_probabilities(model, dists, pair)?;
        Ok::<_, EngineError>(PairEstimate {
            probabilities,
            correlation: probabilities.correlation().clamp(-1.0, 1.0),
            std_err: None,
        })
    })?;
    CorrelationReport::assemble(settings, pairs, Estimator::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Mode;
    use crate::hv::labels;
    use crate::response::{ContextualModel, DeterministicSource, Outcome, StochasticSource};
    use crate::setting::PerSetting;

    fn lambda(n: usize) -> HiddenSpace {
        HiddenSpace::indexed(labels::LAMBDA, n).unwrap()
    }

    #[test]
    fn constant_responders_anticorrelate() {
        let m: ResponseModel = DeterministicSource::from_fn(vec![lambda(3)], |s, _| match s.side() {
            crate::setting::Side::A => Outcome::Plus,
            crate::setting::Side::B => Outcome::Minus,
        })
        .unwrap()
        .into();
        let rho = Distribution::new(vec![lambda(3)], vec![0.2, 0.3, 0.5]).unwrap();
        let d = ScenarioDistributions::SourceOnly(rho);
        for p in Pair::ALL {
            assert_eq!(exact_correlation(&m, &d, p), Ok(-1.0));
        }
    }

    #[test]
    fn shared_coin_is_perfectly_correlated() {
        let m: ResponseModel = DeterministicSource::from_fn(vec![HiddenSpace::binary(labels::LAMBDA)], |_, i| {
            if i[0] == 0 {
                Outcome::Plus
            } else {
                Outcome::Minus
            }
        })
        .unwrap()
        .into();
        let d = ScenarioDistributions::SourceOnly(
            Distribution::uniform(vec![HiddenSpace::binary(labels::LAMBDA)]).unwrap(),
        );
        assert_eq!(exact_correlation(&m, &d, Pair::APrimeB), Ok(1.0));
        let r = exact_report(&m, &d, Settings::tsirelson()).unwrap();
        assert_eq!(r.s, 2.0);
        assert!(r.bound_satisfied);
        assert_eq!(
            r.pairs[Pair::AB].probabilities,
            OutcomeProbabilities::new(0.5, 0.0, 0.0, 0.5)
        );
    }

    #[test]
    fn incompatible_modes_are_rejected() {
        let stoch: ResponseModel = StochasticSource::new(vec![lambda(1)], PerSetting::from_fn(|_| vec![0.5]))
            .unwrap()
            .into();
        let joint = ScenarioDistributions::JointComposite(Distribution::uniform(vec![lambda(1)]).unwrap());
        assert_eq!(
            exact_correlation(&stoch, &joint, Pair::AB),
            Err(EngineError::IncompatibleModeModel {
                mode: Mode::JointComposite.name(),
                kind: "stochastic-source"
            })
        );
        let other = ScenarioDistributions::SourceOnly(Distribution::uniform(vec![lambda(2)]).unwrap());
        assert!(matches!(
            exact_correlation(&stoch, &other, Pair::AB),
            Err(EngineError::DomainMismatch(_))
        ));
    }

    #[test]
    fn setting_dependent_source_distributions_can_exceed_the_bound() {
        // With ρ_pq chosen per pair, the rule f = g = λ gives E = ±1 at will.
        let l = HiddenSpace::binary(labels::LAMBDA);
        let m: ResponseModel =
            DeterministicSource::from_fn(
                vec![l.clone()],
                |_, i| if i[0] == 0 { Outcome::Plus } else { Outcome::Minus },
            )
            .unwrap()
            .into();
        let rhos = PerPair::from_fn(|p| {
            let w = if p == Pair::APrimeBPrime {
                vec![0.0, 1.0]
            } else {
                vec![1.0, 0.0]
            };
            Distribution::new(vec![l.clone()], w).unwrap()
        });
        // f·g = +1 everywhere, so S = 1 + 1 + 1 − 1 = 2; flip g at λ = 1 to reach 4.
        let r = exact_report(
            &m,
            &ScenarioDistributions::SettingDependent(rhos.clone()),
            Settings::tsirelson(),
        )
        .unwrap();
        assert_eq!(r.s, 2.0);
        let flipped: ResponseModel = DeterministicSource::from_fn(vec![l], |s, i| match (s.side(), i[0]) {
            (_, 0) => Outcome::Plus,
            (crate::setting::Side::A, _) => Outcome::Minus,
            (crate::setting::Side::B, _) => Outcome::Plus,
        })
        .unwrap()
        .into();
        let r = exact_report(
            &flipped,
            &ScenarioDistributions::SettingDependent(rhos),
            Settings::tsirelson(),
        )
        .unwrap();
        assert_eq!(r.s, 4.0);
        assert!(!r.bound_satisfied);
    }

    #[test]
    fn remote_independent_contextual_model_matches_local_model() {
        let l = lambda(3);
        let local = DeterministicSource::from_fn(vec![l.clone()], |s, i| {
            if (s.index() + i[0]) % 3 == 0 {
                Outcome::Plus
            } else {
                Outcome::Minus
            }
        })
        .unwrap();
        let ctx: ResponseModel = ContextualModel::from_local(&local, true).into();
        let local: ResponseModel = local.into();
        let d = ScenarioDistributions::SourceOnly(Distribution::new(vec![l], vec![0.1, 0.6, 0.3]).unwrap());
        for p in Pair::ALL {
            let a = exact_correlation(&ctx, &d, p).unwrap();
            let b = exact_correlation(&local, &d, p).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }
}
