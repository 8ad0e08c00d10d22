use rayon::prelude::*;

use super::exact::{pair_atoms, Atom};
use super::{CorrelationReport, Estimator, OutcomeProbabilities, PairEstimate, ScenarioDistributions};
use crate::error::EngineError;
use crate::response::ResponseModel;
use crate::rng::{DiscreteSampler, SimRng};
use crate::setting::{Pair, PerPair, Settings};

/// Trials per shard. Shard `j` of pair `k` draws from stream `(k << 32) | j`
/// of the seed, so tallies do not depend on how shards are scheduled.
pub const SHARD_SIZE: u64 = 1 << 16;

fn shard_tally(atoms: &[Atom], sampler: &DiscreteSampler, rng: &mut SimRng, trials: u64) -> [u64; 4] {
    let mut counts = [0u64; 4];
    for _ in 0..trials {
        let atom = &atoms[sampler.sample(rng)];
        let alice_plus = rng.bernoulli(atom.alice_plus);
        let bob_plus = rng.bernoulli(atom.bob_plus);
        // (++, +−, −+, −−)
        counts[usize::from(!alice_plus) * 2 + usize::from(!bob_plus)] += 1;
    }
    counts
}

fn estimate(counts: [u64; 4], samples: u64) -> PairEstimate {
    let n = samples as f64;
    let [pp, pm, mp, mm] = counts;
    let probabilities = OutcomeProbabilities::new(pp as f64 / n, pm as f64 / n, mp as f64 / n, mm as f64 / n);
    let correlation = ((pp + mm) as f64 - (pm + mp) as f64) / n;
    PairEstimate {
        probabilities,
        correlation,
        std_err: Some(((1.0 - correlation * correlation).max(0.0) / n).sqrt()),
    }
}

/// Sample `samples` trials per setting pair: draw a hidden point from the
/// distribution that pair sees, then each station's outcome from its response.
///
/// Identical arguments give bit-identical reports.
pub fn monte_carlo_report(
    model: &ResponseModel,
    dists: &ScenarioDistributions,
    settings: Settings,
    samples: u64,
    seed: u64,
) -> Result<CorrelationReport, EngineError> {
    if samples == 0 {
        return Err(EngineError::ZeroSamples);
    }
    let shards = samples.div_ceil(SHARD_SIZE);
    let pairs = PerPair::from_fn(|p| p).try_map(|pair: Pair, _| {
        let atoms = pair_atoms(model, dists, pair)?;
        let weights: Vec<f64> = atoms.iter().map(|a| a.weight).collect();
        let sampler = DiscreteSampler::new(&weights);
        let counts = (0..shards)
            .into_par_iter()
            .map(|j| {
                let trials = SHARD_SIZE.min(samples - j * SHARD_SIZE);
                let mut rng = SimRng::for_stream(seed, ((pair.index() as u64) << 32) | j);
                shard_tally(&atoms, &sampler, &mut rng, trials)
            })
            .reduce(|| [0; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
        Ok::<_, EngineError>(estimate(counts, samples))
    })?;
    CorrelationReport::assemble(settings, pairs, Estimator::MonteCarlo { samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::exact_correlation;
    use crate::hv::{labels, Distribution, HiddenSpace};
    use crate::response::{DeterministicSource, Outcome};

    fn coin() -> (ResponseModel, ScenarioDistributions) {
        let l = HiddenSpace::binary(labels::LAMBDA);
        let m = DeterministicSource::from_fn(
            vec![l.clone()],
            |_, i| if i[0] == 0 { Outcome::Plus } else { Outcome::Minus },
        )
        .unwrap()
        .into();
        (
            m,
            ScenarioDistributions::SourceOnly(Distribution::uniform(vec![l]).unwrap()),
        )
    }

    #[test]
    fn constant_model_has_exact_estimate_and_zero_error() {
        let l = HiddenSpace::indexed(labels::LAMBDA, 3).unwrap();
        let m: ResponseModel = DeterministicSource::from_fn(vec![l.clone()], |_, _| Outcome::Plus)
            .unwrap()
            .into();
        let d = ScenarioDistributions::SourceOnly(Distribution::uniform(vec![l]).unwrap());
        for seed in [0, 1, 99] {
            let r = monte_carlo_report(&m, &d, Settings::tsirelson(), 1000, seed).unwrap();
            for (_, p) in r.pairs.iter() {
                assert_eq!(p.correlation, 1.0);
                assert_eq!(p.std_err, Some(0.0));
            }
        }
    }

    #[test]
    fn shared_coin_converges_to_exact_value() {
        let (m, d) = coin();
        let r = monte_carlo_report(&m, &d, Settings::tsirelson(), 100_000, 5).unwrap();
        for (pair, p) in r.pairs.iter() {
            let exact = exact_correlation(&m, &d, pair).unwrap();
            // perfectly correlated outcomes: the estimate is exact too
            assert!((p.correlation - exact).abs() <= 4.0 * p.std_err.unwrap() + 1e-15);
            assert!((p.probabilities.pp - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn reports_are_reproducible_and_seed_sensitive() {
        let (m, _) = coin();
        let l = HiddenSpace::binary(labels::LAMBDA);
        let d = ScenarioDistributions::SourceOnly(Distribution::new(vec![l], vec![0.3, 0.7]).unwrap());
        let a = monte_carlo_report(&m, &d, Settings::tsirelson(), 200_000, 11).unwrap();
        let b = monte_carlo_report(&m, &d, Settings::tsirelson(), 200_000, 11).unwrap();
        let c = monte_carlo_report(&m, &d, Settings::tsirelson(), 200_000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_samples_is_an_error() {
        let (m, d) = coin();
        assert_eq!(
            monte_carlo_report(&m, &d, Settings::tsirelson(), 0, 1),
            Err(EngineError::ZeroSamples)
        );
    }
}
