//! Correlation functions, the CHSH combination and the Bell check.

mod enumerate;
mod exact;
mod monte_carlo;

pub use enumerate::{enumerate_bound, BoundEnumeration, DEFAULT_ENUMERATION_WORK_LIMIT, MAX_ENUMERATION_CARDINALITY};
pub use exact::{check_compatibility, exact_correlation, exact_probabilities, exact_report};
pub use monte_carlo::{monte_carlo_report, SHARD_SIZE};

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::hv::Distribution;
use crate::response::Outcome;
use crate::setting::{Pair, PerPair, PerSetting, Settings};

/// Slack on `|S| ≤ 2` separating rounding from a genuine violation.
pub const BELL_TOL: f64 = 1e-9;

/// Slack on probability vectors handed to the engine.
pub const PROBABILITY_TOL: f64 = 1e-9;

/// How the hidden variables are distributed in an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioDistributions {
    /// One `ρ(λ)` shared by all four setting pairs.
    SourceOnly(Distribution),
    /// A separate distribution per setting pair: `ρ_pq(λ)` for source-level
    /// models, `ρ_pq(λ, λ_p, λ_q)` for apparatus models.
    SettingDependent(PerPair<Distribution>),
    /// `ρ(λ) ρ_p(λ_p) ρ_q(λ_q)`.
    FactorizedApparatus {
        source: Distribution,
        apparatus: PerSetting<Distribution>,
    },
    /// One `ρ(λ̃)` over `(λ, λ_a, λ_a′, λ_b, λ_b′)`.
    JointComposite(Distribution),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SourceOnly,
    SettingDependent,
    FactorizedApparatus,
    JointComposite,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::SourceOnly => "source-only",
            Mode::SettingDependent => "setting-dependent",
            Mode::FactorizedApparatus => "factorized-apparatus",
            Mode::JointComposite => "joint-composite",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Mode::SourceOnly,
            Mode::SettingDependent,
            Mode::FactorizedApparatus,
            Mode::JointComposite,
        ]
        .into_iter()
        .find(|m| m.name() == name)
    }
}

impl ScenarioDistributions {
    pub fn mode(&self) -> Mode {
        match self {
            ScenarioDistributions::SourceOnly(_) => Mode::SourceOnly,
            ScenarioDistributions::SettingDependent(_) => Mode::SettingDependent,
            ScenarioDistributions::FactorizedApparatus { .. } => Mode::FactorizedApparatus,
            ScenarioDistributions::JointComposite(_) => Mode::JointComposite,
        }
    }
}

/// Joint outcome probabilities `p_{++}, p_{+−}, p_{−+}, p_{−−}` for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl OutcomeProbabilities {
    pub fn new(pp: f64, pm: f64, mp: f64, mm: f64) -> Self {
        OutcomeProbabilities { pp, pm, mp, mm }
    }

    pub fn get(&self, alice: Outcome, bob: Outcome) -> f64 {
        match (alice, bob) {
            (Outcome::Plus, Outcome::Plus) => self.pp,
            (Outcome::Plus, Outcome::Minus) => self.pm,
            (Outcome::Minus, Outcome::Plus) => self.mp,
            (Outcome::Minus, Outcome::Minus) => self.mm,
        }
    }

    /// Entries in `(++, +−, −+, −−)` order, which is also the row-major order
    /// over two binary variables listing `+1` first.
    pub fn to_array(self) -> [f64; 4] {
        [self.pp, self.pm, self.mp, self.mm]
    }

    pub fn total(&self) -> f64 {
        self.pp + self.pm + self.mp + self.mm
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|&p| p >= 0.0) && (self.total() - 1.0).abs() <= PROBABILITY_TOL
    }

    /// `E = p_{++} + p_{−−} − p_{+−} − p_{−+}`.
    pub fn correlation(&self) -> f64 {
        self.pp + self.mm - self.pm - self.mp
    }
}

/// Correlation function from the four joint outcome probabilities.
pub fn correlation_from_probabilities(pp: f64, pm: f64, mp: f64, mm: f64) -> Result<f64, EngineError> {
    let p = OutcomeProbabilities::new(pp, pm, mp, mm);
    if !p.is_valid() {
        return Err(EngineError::NotAProbabilityVector(pp, pm, mp, mm));
    }
    Ok(p.correlation().clamp(-1.0, 1.0))
}

fn check_correlation(e: f64) -> Result<f64, EngineError> {
    if e.is_nan() || e.abs() > 1.0 + 1e-12 {
        Err(EngineError::OutOfRangeCorrelation(e))
    } else {
        Ok(e)
    }
}

/// `S = E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)`.
pub fn chsh(e_ab: f64, e_ab_prime: f64, e_a_prime_b: f64, e_a_prime_b_prime: f64) -> Result<f64, EngineError> {
    Ok(
        check_correlation(e_ab)? + check_correlation(e_ab_prime)? + check_correlation(e_a_prime_b)?
            - check_correlation(e_a_prime_b_prime)?,
    )
}

pub fn chsh_of(e: &PerPair<f64>) -> Result<f64, EngineError> {
    chsh(e[Pair::AB], e[Pair::ABPrime], e[Pair::APrimeB], e[Pair::APrimeBPrime])
}

/// The four CHSH expressions obtained by relabeling `a ↔ a′` and/or `b ↔ b′`:
/// entry `k` carries the minus sign on pair `Pair::ALL[k]`. The last entry is `S`.
pub fn chsh_variants(e: &PerPair<f64>) -> [f64; 4] {
    // summed in pair order so the last entry is bit-identical to `chsh_of`
    Pair::ALL.map(|neg| {
        Pair::ALL
            .iter()
            .fold(0.0, |acc, &p| if p == neg { acc - e[p] } else { acc + e[p] })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum BellVerdict {
    Satisfied,
    Violated { excess: f64 },
}

impl BellVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, BellVerdict::Satisfied)
    }
}

/// `Satisfied` iff `|s| ≤ 2 + BELL_TOL`; otherwise reports `|s| − 2`.
pub fn bell_check(s: f64) -> BellVerdict {
    if s.abs() <= 2.0 + BELL_TOL {
        BellVerdict::Satisfied
    } else {
        BellVerdict::Violated { excess: s.abs() - 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Estimator {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub probabilities: OutcomeProbabilities,
    pub correlation: f64,
    /// Plug-in binomial standard error; `None` for exact summation.
    pub std_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub settings: Settings,
    pub pairs: PerPair<PairEstimate>,
    pub s: f64,
    pub bound_satisfied: bool,
    pub estimator: Estimator,
}

impl CorrelationReport {
    pub(crate) fn assemble(
        settings: Settings,
        pairs: PerPair<PairEstimate>,
        estimator: Estimator,
    ) -> Result<Self, EngineError> {
        let s = chsh_of(&pairs.map(|_, p| p.correlation))?;
        Ok(CorrelationReport {
            settings,
            pairs,
            s,
            bound_satisfied: bell_check(s).is_satisfied(),
            estimator,
        })
    }

    pub fn correlations(&self) -> PerPair<f64> {
        self.pairs.map(|_, p| p.correlation)
    }

    pub fn verdict(&self) -> BellVerdict {
        bell_check(self.s)
    }

    /// Standard error of `S`, treating the four pair estimates as independent.
    pub fn s_std_err(&self) -> Option<f64> {
        self.pairs
            .0
            .iter()
            .map(|p| p.std_err.map(|e| e * e))
            .sum::<Option<f64>>()
            .map(f64::sqrt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn correlation_examples() {
        assert_eq!(correlation_from_probabilities(0.5, 0.0, 0.0, 0.5), Ok(1.0));
        assert_eq!(correlation_from_probabilities(0.0, 0.5, 0.5, 0.0), Ok(-1.0));
        assert_eq!(correlation_from_probabilities(0.25, 0.25, 0.25, 0.25), Ok(0.0));
        assert!(matches!(
            correlation_from_probabilities(0.5, 0.5, 0.5, 0.0),
            Err(EngineError::NotAProbabilityVector(..))
        ));
        assert!(correlation_from_probabilities(1.1, -0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn chsh_examples() {
        assert_eq!(chsh(1.0, 1.0, 1.0, 1.0), Ok(2.0));
        assert_eq!(chsh(0.0, 0.0, 0.0, 0.0), Ok(0.0));
        let h = SQRT_2 / 2.0;
        let s = chsh(-h, -h, -h, h).unwrap();
        assert!((s + 2.0 * SQRT_2).abs() < 1e-15);
        assert_eq!(chsh(1.5, 0.0, 0.0, 0.0), Err(EngineError::OutOfRangeCorrelation(1.5)));
    }

    #[test]
    fn bell_check_examples() {
        assert_eq!(bell_check(2.0), BellVerdict::Satisfied);
        assert_eq!(bell_check(-1.5), BellVerdict::Satisfied);
        assert_eq!(bell_check(2.0 + 0.5e-9), BellVerdict::Satisfied);
        match bell_check(2.8284) {
            BellVerdict::Violated { excess } => assert!((excess - 0.8284).abs() < 1e-12),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn last_variant_is_s() {
        let e = PerPair([0.1, -0.4, 0.7, 0.2]);
        assert_eq!(chsh_variants(&e)[3], chsh_of(&e).unwrap());
        assert!((chsh_variants(&e)[0] - (-0.1 - 0.4 + 0.7 + 0.2)).abs() < 1e-15);
    }
}
