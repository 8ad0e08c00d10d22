use super::family::SettingPairMarginalFamily;
use crate::engine::{OutcomeProbabilities, BELL_TOL};
use crate::error::FeasibilityError;
use crate::hv::{labels, Distribution, HiddenSpace};
use crate::qm::{singlet_chsh, singlet_predictions};
use crate::response::{ApparatusModel, Outcome, ResponseModel};
use crate::setting::{PerPair, PerSetting, SettingName, Settings};

/// Setting-dependent apparatus scenario reproducing arbitrary outcome tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub family: SettingPairMarginalFamily,
    /// `f(p, λ, λ_p) = λ_p` on binary apparatus spaces.
    pub model: ResponseModel,
}

/// Each analyzer state is the outcome itself, and `ρ_pq(λ_p, λ_q)` is the
/// requested table, so the scenario reproduces `tables` exactly.
pub fn witness_family(tables: &PerPair<OutcomeProbabilities>) -> Result<Witness, FeasibilityError> {
    let lambda = HiddenSpace::singleton(labels::LAMBDA);
    let apparatus = PerSetting::from_fn(|s: SettingName| HiddenSpace::binary(s.apparatus_label()));
    let model = ApparatusModel::from_fn(lambda.clone(), apparatus.clone(), |_, _, k| {
        if k == 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    })?;
    let marginals = tables.try_map(|pair, t| {
        if !t.is_valid() {
            return Err(FeasibilityError::InvalidInput(format!(
                "outcome table for {pair} is not a probability vector"
            )));
        }
        let domain = vec![
            lambda.clone(),
            apparatus[pair.alice()].clone(),
            apparatus[pair.bob()].clone(),
        ];
        Ok(Distribution::renormalized(domain, t.to_array().to_vec())?)
    })?;
    let family = SettingPairMarginalFamily::new(model.composite_spaces(), marginals)?;
    Ok(Witness {
        family,
        model: model.into(),
    })
}

/// Witness scenario for the singlet predictions at `settings`; refuses angles
/// whose singlet CHSH value does not exceed the local bound.
pub fn construct_nonlocal_witness(settings: &Settings) -> Result<Witness, FeasibilityError> {
    let s = singlet_chsh(settings);
    if s.abs() <= 2.0 + BELL_TOL {
        return Err(FeasibilityError::NonViolatingAngles { s });
    }
    witness_family(&singlet_predictions(settings).map(|_, p| p.probabilities))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{exact_report, ScenarioDistributions};
    use crate::locality::{check_joint_existence, FeasibilityVerdict, DEFAULT_WORK_LIMIT};
    use crate::setting::Pair;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn singlet_witness_reproduces_predictions_and_is_infeasible() {
        let settings = Settings::tsirelson();
        let w = construct_nonlocal_witness(&settings).unwrap();
        let dists = ScenarioDistributions::SettingDependent(w.family.marginals().clone());
        let report = exact_report(&w.model, &dists, settings).unwrap();
        let qm = singlet_predictions(&settings);
        for pair in Pair::ALL {
            assert!((report.pairs[pair].correlation - qm[pair].correlation).abs() < 1e-12);
        }
        assert!((report.s + 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
        match check_joint_existence(&w.family, DEFAULT_WORK_LIMIT).unwrap() {
            FeasibilityVerdict::Infeasible { certificate } => assert!(certificate.verify(&w.family)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn non_violating_angles_are_refused() {
        let r = construct_nonlocal_witness(&Settings::new(0.0, FRAC_PI_2, 0.0, FRAC_PI_2));
        assert!(matches!(r, Err(FeasibilityError::NonViolatingAngles { .. })));
    }

    #[test]
    fn invalid_tables_are_rejected() {
        let t = PerPair::from_fn(|_| OutcomeProbabilities::new(0.5, 0.5, 0.5, 0.0));
        assert!(matches!(witness_family(&t), Err(FeasibilityError::InvalidInput(_))));
    }
}
