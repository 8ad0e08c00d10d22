use std::f64::consts::{PI, SQRT_2};

use lhv_core::engine::{exact_correlation, exact_probabilities, exact_report, monte_carlo_report, BELL_TOL};
use lhv_core::locality::{
    check_joint_existence, classify, construct_factorized_family, witness_family, FeasibilityVerdict, Locality,
    DEFAULT_WORK_LIMIT,
};
use lhv_core::qm::{closed_form_correlation, singlet_chsh, singlet_probabilities};
use lhv_core::random::{random_apparatus_model, random_factorized, random_joint, random_no_signalling_tables};
use lhv_core::rng::SimRng;
use lhv_core::{bell_check, chsh_variants, Pair, ResponseModel, ScenarioDistributions, Setting, SettingName, Settings};
use proptest::prelude::*;

fn settings(rng: &mut SimRng) -> Settings {
    let mut a = || rng.uniform_in(0.0, 2.0 * PI);
    Settings::new(a(), a(), a(), a())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factorized_scenarios_respect_the_bound(seed in any::<u64>()) {
        let mut rng = SimRng::new(seed);
        let model = random_apparatus_model(&mut rng, 3);
        let dists = random_factorized(&mut rng, &model);
        let report = exact_report(&model.clone().into(), &dists, settings(&mut rng)).unwrap();
        prop_assert!(report.s.abs() <= 2.0 + BELL_TOL, "S = {}", report.s);
    }

    #[test]
    fn joint_composite_matches_its_lift(seed in any::<u64>()) {
        let mut rng = SimRng::new(seed);
        let model = random_apparatus_model(&mut rng, 3);
        let dists = random_joint(&mut rng, &model);
        let ScenarioDistributions::JointComposite(joint) = &dists else { unreachable!() };
        let apparatus: ResponseModel = model.clone().into();
        let lifted = apparatus.lift_to_composite(&model.composite_spaces()).unwrap();
        let lifted_dists = ScenarioDistributions::SourceOnly(joint.clone());
        for pair in Pair::ALL {
            let direct = exact_correlation(&apparatus, &dists, pair).unwrap();
            let via_lift = exact_correlation(&lifted, &lifted_dists, pair).unwrap();
            prop_assert!((direct - via_lift).abs() <= 1e-12);
        }
        let s = exact_report(&apparatus, &dists, Settings::tsirelson()).unwrap().s;
        prop_assert!(s.abs() <= 2.0 + BELL_TOL);
    }

    #[test]
    fn stochastic_emulation_is_exact(seed in any::<u64>()) {
        let mut rng = SimRng::new(seed);
        let model = random_apparatus_model(&mut rng, 3);
        let dists = random_factorized(&mut rng, &model);
        let ScenarioDistributions::FactorizedApparatus { source, apparatus } = &dists else { unreachable!() };
        let app: ResponseModel = model.clone().into();
        let sto = app.stochastic_from_apparatus(apparatus).unwrap();
        for s in SettingName::ALL {
            for l in 0..model.lambda().cardinality() {
                let lhs = app.effective_response_apparatus(s, l, &apparatus[s]).unwrap();
                let rhs = sto.effective_response_stochastic(s, &[l]).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12);
            }
        }
        let sto_dists = ScenarioDistributions::SourceOnly(source.clone());
        for pair in Pair::ALL {
            let lhs = exact_correlation(&app, &dists, pair).unwrap();
            let rhs = exact_correlation(&sto, &sto_dists, pair).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn exact_routes_agree(seed in any::<u64>(), joint in any::<bool>()) {
        let mut rng = SimRng::new(seed);
        let model = random_apparatus_model(&mut rng, 3);
        let dists = if joint { random_joint(&mut rng, &model) } else { random_factorized(&mut rng, &model) };
        let m: ResponseModel = model.into();
        for pair in Pair::ALL {
            let p = exact_probabilities(&m, &dists, pair).unwrap();
            prop_assert!(p.is_valid());
            prop_assert!((p.correlation() - exact_correlation(&m, &dists, pair).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn factorized_families_are_contained(seed in any::<u64>()) {
        let mut rng = SimRng::new(seed);
        let model = random_apparatus_model(&mut rng, 3);
        let ScenarioDistributions::FactorizedApparatus { source, apparatus } = random_factorized(&mut rng, &model) else { unreachable!() };
        let family = construct_factorized_family(&source, &apparatus).unwrap();
        match check_joint_existence(&family, DEFAULT_WORK_LIMIT).unwrap() {
            FeasibilityVerdict::Feasible { joint, residual } => {
                prop_assert!(residual <= 1e-9);
                prop_assert!(family.residual(&joint).unwrap() <= 1e-9);
            }
            v => prop_assert!(false, "{:?}", v),
        }
    }

    #[test]
    fn joint_existence_matches_chsh(seed in any::<u64>(), nonlocal_candidate in any::<bool>()) {
        let mut rng = SimRng::new(seed);
        let tables = random_no_signalling_tables(&mut rng, nonlocal_candidate);
        let witness = witness_family(&tables).unwrap();
        let e = tables.map(|_, t| t.correlation());
        let worst = chsh_variants(&e).into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let local = classify(&witness.family, DEFAULT_WORK_LIMIT).unwrap() == Locality::Local;
        prop_assert_eq!(local, bell_check(worst).is_satisfied(), "max |S_k| = {}", worst);
    }

    #[test]
    fn singlet_matches_closed_form_and_tsirelson(a in 0.0..2.0 * PI, b in -2.0 * PI..4.0 * PI, seed in any::<u64>()) {
        let p = singlet_probabilities(&Setting::new(SettingName::A, a), &Setting::new(SettingName::B, b)).unwrap();
        prop_assert!((p.correlation - closed_form_correlation(a, b)).abs() <= 1e-12);
        prop_assert!((p.probabilities.pp - p.probabilities.mm).abs() <= 1e-15);
        prop_assert!((p.probabilities.pm - p.probabilities.mp).abs() <= 1e-15);
        prop_assert!((p.probabilities.total() - 1.0).abs() <= 1e-12);
        let mut rng = SimRng::new(seed);
        prop_assert!(singlet_chsh(&settings(&mut rng)).abs() <= 2.0 * SQRT_2 + 1e-9);
    }
}

#[test]
fn monte_carlo_estimates_fall_within_five_standard_errors() {
    let mut rng = SimRng::new(2024);
    let mut inside = 0;
    let mut total = 0;
    for trial in 0..250u64 {
        let model = random_apparatus_model(&mut rng, 3);
        let dists = if trial % 2 == 0 {
            random_factorized(&mut rng, &model)
        } else {
            random_joint(&mut rng, &model)
        };
        let m: ResponseModel = model.into();
        let report = monte_carlo_report(&m, &dists, Settings::tsirelson(), 4000, trial).unwrap();
        for pair in Pair::ALL {
            let exact = exact_correlation(&m, &dists, pair).unwrap();
            let est = &report.pairs[pair];
            total += 1;
            if (est.correlation - exact).abs() <= 5.0 * est.std_err.unwrap() + 1e-12 {
                inside += 1;
            }
        }
    }
    assert_eq!(total, 1000);
    assert!(inside >= 990, "{inside}/{total} within 5σ");
}
