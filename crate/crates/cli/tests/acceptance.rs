//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use lhv_cli::report::FeasibilityReport;
use lhv_cli::{run_file, run_scenario, RunOptions, Scenario, BUNDLED};
use lhv_core::engine::{
    bell_check, chsh_variants, enumerate_bound, exact_correlation, exact_report, BELL_TOL,
    DEFAULT_ENUMERATION_WORK_LIMIT,
};
use lhv_core::locality::{
    check_joint_existence, classify, construct_factorized_family, witness_family, FeasibilityVerdict, Locality,
    DEFAULT_WORK_LIMIT,
};
use lhv_core::qm::{max_violation_search, singlet_probabilities};
use lhv_core::random::{random_apparatus_model, random_factorized, random_joint, random_no_signalling_tables};
use lhv_core::rng::SimRng;
use lhv_core::{Pair, ResponseModel, ScenarioDistributions, Setting, SettingName, Settings};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn random_settings(rng: &mut SimRng) -> Settings {
    let mut angle = || rng.uniform_in(0.0, 2.0 * PI);
    Settings::new(angle(), angle(), angle(), angle())
}

fn bound_by_enumeration() -> Outcome {
    let start = Instant::now();
    for n in 1..=4 {
        let r = enumerate_bound(n, DEFAULT_ENUMERATION_WORK_LIMIT).map_err(|e| e.to_string())?;
        if r.max_abs_s != 2.0 {
            return Err(format!("cardinality {n}: max |S| = {}", r.max_abs_s));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 5.0 {
        return Err(format!("took {secs:.2} s"));
    }
    Ok(format!("max |S| = 2 for cardinalities 1-4 in {secs:.3} s"))
}

fn factorized_recovery() -> Outcome {
    let mut rng = SimRng::new(0xFAC7);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let model = random_apparatus_model(&mut rng, 3);
        let dists = random_factorized(&mut rng, &model);
        let s = exact_report(&model.into(), &dists, random_settings(&mut rng))
            .map_err(|e| e.to_string())?
            .s;
        worst = worst.max(s.abs());
        if s.abs() > 2.0 + BELL_TOL {
            return Err(format!("scenario {i}: S = {s}"));
        }
    }
    Ok(format!("500 scenarios, max |S| = {worst:.6}"))
}

fn joint_recovery() -> Outcome {
    let mut rng = SimRng::new(0x7017);
    let (mut worst_gap, mut worst_s): (f64, f64) = (0.0, 0.0);
    for i in 0..500 {
        let model = random_apparatus_model(&mut rng, 3);
        let dists = random_joint(&mut rng, &model);
        let ScenarioDistributions::JointComposite(joint) = &dists else {
            unreachable!()
        };
        let apparatus: ResponseModel = model.clone().into();
        let lifted = apparatus
            .lift_to_composite(&model.composite_spaces())
            .map_err(|e| e.to_string())?;
        let lifted_dists = ScenarioDistributions::SourceOnly(joint.clone());
        let mut e = [0.0; 4];
        for pair in Pair::ALL {
            let direct = exact_correlation(&apparatus, &dists, pair).map_err(|e| e.to_string())?;
            let via_lift = exact_correlation(&lifted, &lifted_dists, pair).map_err(|e| e.to_string())?;
            worst_gap = worst_gap.max((direct - via_lift).abs());
            e[pair.index()] = direct;
        }
        let s = e[0] + e[1] + e[2] - e[3];
        worst_s = worst_s.max(s.abs());
        if worst_gap > 1e-12 || s.abs() > 2.0 + BELL_TOL {
            return Err(format!("scenario {i}: |direct − lift| = {worst_gap:e}, S = {s}"));
        }
    }
    Ok(format!(
        "500 joints, max |direct − lift| = {worst_gap:.1e}, max |S| = {worst_s:.6}"
    ))
}

fn containment() -> Outcome {
    let mut rng = SimRng::new(0xC0A7);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let model = random_apparatus_model(&mut rng, 3);
        let ScenarioDistributions::FactorizedApparatus { source, apparatus } = random_factorized(&mut rng, &model)
        else {
            unreachable!()
        };
        let family = construct_factorized_family(&source, &apparatus).map_err(|e| e.to_string())?;
        match check_joint_existence(&family, DEFAULT_WORK_LIMIT).map_err(|e| e.to_string())? {
            FeasibilityVerdict::Feasible { joint, .. } => {
                let r = family.residual(&joint).map_err(|e| e.to_string())?;
                worst = worst.max(r);
                if r > 1e-9 {
                    return Err(format!("family {i}: residual {r:e}"));
                }
            }
            FeasibilityVerdict::Infeasible { .. } => return Err(format!("family {i}: reported infeasible")),
        }
    }
    Ok(format!("200 families feasible, max marginal residual = {worst:.1e}"))
}

fn nonlocal_witness() -> Outcome {
    let exact = run_file(
        &scenarios_dir().join("singlet-witness.scenario"),
        &RunOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let e = &exact.experiments[0];
    let s = e.chsh.as_ref().ok_or("no chsh section")?.s;
    if (s + 2.0 * SQRT_2).abs() > 1e-9 {
        return Err(format!("exact S = {s}"));
    }
    let margin = match &e.feasibility {
        Some(FeasibilityReport::Infeasible { certificate, .. }) if certificate.verified => certificate.margin,
        other => return Err(format!("feasibility: {other:?}")),
    };
    let mc = run_file(
        &scenarios_dir().join("singlet-witness-monte-carlo.scenario"),
        &RunOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let chsh = mc.experiments[0].chsh.as_ref().ok_or("no chsh section")?;
    let se = chsh.std_err.ok_or("no standard error")?;
    let z = (chsh.s - s).abs() / se;
    match mc.estimator {
        lhv_core::Estimator::MonteCarlo { samples: 1_000_000, .. } => {}
        other => return Err(format!("Monte Carlo scenario uses {other:?}")),
    }
    if z > 4.0 {
        return Err(format!("Monte Carlo S = {} is {z:.2} standard errors from {s}", chsh.s));
    }
    Ok(format!(
        "exact S = {s:.12}, Monte Carlo S = {:.6} ± {se:.6} ({z:.2} σ), infeasible with certificate margin {margin:.4}",
        chsh.s
    ))
}

fn locality_matches_chsh() -> Outcome {
    let mut rng = SimRng::new(0xF1E);
    let (mut local, mut nonlocal) = (0, 0);
    for i in 0..200 {
        let tables = random_no_signalling_tables(&mut rng, i % 2 == 1);
        let witness = witness_family(&tables).map_err(|e| e.to_string())?;
        let e = tables.map(|_, t| t.correlation());
        let worst = chsh_variants(&e).into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let verdict = classify(&witness.family, DEFAULT_WORK_LIMIT).map_err(|e| e.to_string())?;
        if (verdict == Locality::Local) != bell_check(worst).is_satisfied() {
            return Err(format!(
                "family {i}: {verdict:?} but max |S| over relabelings = {worst}"
            ));
        }
        match verdict {
            Locality::Local => local += 1,
            Locality::Nonlocal => nonlocal += 1,
        }
    }
    if local == 0 || nonlocal == 0 {
        return Err(format!("degenerate sample: {local} local, {nonlocal} nonlocal"));
    }
    Ok(format!("200 families agree ({local} local, {nonlocal} nonlocal)"))
}

fn stochastic_emulation() -> Outcome {
    let mut rng = SimRng::new(0xE4);
    let (mut worst_f, mut worst_e): (f64, f64) = (0.0, 0.0);
    for i in 0..200 {
        let model = random_apparatus_model(&mut rng, 3);
        let dists = random_factorized(&mut rng, &model);
        let ScenarioDistributions::FactorizedApparatus { source, apparatus } = &dists else {
            unreachable!()
        };
        let app: ResponseModel = model.clone().into();
        let sto = app.stochastic_from_apparatus(apparatus).map_err(|e| e.to_string())?;
        for s in SettingName::ALL {
            for l in 0..model.lambda().cardinality() {
                let lhs = app
                    .effective_response_apparatus(s, l, &apparatus[s])
                    .map_err(|e| e.to_string())?;
                let rhs = sto.effective_response_stochastic(s, &[l]).map_err(|e| e.to_string())?;
                worst_f = worst_f.max((lhs - rhs).abs());
            }
        }
        let sto_dists = ScenarioDistributions::SourceOnly(source.clone());
        for pair in Pair::ALL {
            let lhs = exact_correlation(&app, &dists, pair).map_err(|e| e.to_string())?;
            let rhs = exact_correlation(&sto, &sto_dists, pair).map_err(|e| e.to_string())?;
            worst_e = worst_e.max((lhs - rhs).abs());
        }
        if worst_f > 1e-12 || worst_e > 1e-12 {
            return Err(format!(
                "model {i}: response gap {worst_f:e}, correlation gap {worst_e:e}"
            ));
        }
    }
    Ok(format!(
        "200 models, max response gap {worst_f:.1e}, max correlation gap {worst_e:.1e}"
    ))
}

fn qm_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for da in 0..360 {
        for db in 0..360 {
            let (a, b) = (f64::from(da).to_radians(), f64::from(db).to_radians());
            let p = singlet_probabilities(&Setting::new(SettingName::A, a), &Setting::new(SettingName::B, b))
                .map_err(|e| e.to_string())?;
            worst = worst.max((p.correlation + (a - b).cos()).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("max |E + cos(a − b)| = {worst:e}"));
    }
    let search = max_violation_search(PI / 8.0, 3).map_err(|e| e.to_string())?;
    if search.abs_s < 2.8274 {
        return Err(format!("violation search reached |S| = {}", search.abs_s));
    }
    Ok(format!(
        "max |E + cos(a − b)| = {worst:.1e} on the 1° grid, search |S| = {:.10}",
        search.abs_s
    ))
}

fn reproducibility() -> Outcome {
    for file in BUNDLED.map(|b| b.file) {
        let scenario = Scenario::load(&scenarios_dir().join(file)).map_err(|e| e.to_string())?;
        let first = run_scenario(&scenario, &RunOptions::default())
            .map_err(|e| e.to_string())?
            .to_json();
        let second = run_scenario(
            &Scenario::load(&scenarios_dir().join(file)).map_err(|e| e.to_string())?,
            &RunOptions::default(),
        )
        .map_err(|e| e.to_string())?
        .to_json();
        if first != second {
            return Err(format!("{file}: reports differ"));
        }
    }
    Ok(format!("{} bundled scenarios, byte-identical reports", BUNDLED.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("Bell bound by exhaustive enumeration", bound_by_enumeration),
        ("recovery under factorization", factorized_recovery),
        ("recovery under joint composite", joint_recovery),
        ("containment of factorized families", containment),
        ("nonlocal witness", nonlocal_witness),
        ("joint existence agrees with CHSH", locality_matches_chsh),
        ("stochastic/apparatus emulation", stochastic_emulation),
        ("singlet oracle self-consistency", qm_oracle),
        ("reproducibility of bundled scenarios", reproducibility),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {}: {name} — {detail} [{secs:.2} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} — {detail} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.2} s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
