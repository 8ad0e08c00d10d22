//! Quantum predictions for the spin singlet `(|z+⟩|z−⟩ − |z−⟩|z+⟩)/√2`.
//!
//! Analyzer directions lie in the x–z plane. For an analyzer at angle `θ` from
//! `z` the eigenvectors, in the `(|z+⟩, |z−⟩)` basis, are
//!
//! ```text
//! |+θ⟩ = ( cos θ/2,  sin θ/2)
//! |−θ⟩ = (−sin θ/2,  cos θ/2)
//! ```
//!
//! and `p_{mn}(a, b) = |⟨m_a| ⊗ ⟨n_b| ψ⟩|²`. Expanding with `a = 0`, `b = θ`
//! gives `p_{++} = p_{−−} = sin²(θ/2)/2`, `p_{+−} = p_{−+} = cos²(θ/2)/2`, hence
//! the closed form `E(a, b) = −cos(a − b)`, which [`closed_form_correlation`]
//! exposes as a cross-check.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::OutcomeProbabilities;
use crate::error::QmError;
use crate::setting::{Pair, PerPair, Setting, Settings, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingletPrediction {
    pub a: Setting,
    pub b: Setting,
    /// `|a − b|` reduced to `[0, π]`.
    pub relative_angle: f64,
    pub probabilities: OutcomeProbabilities,
    pub correlation: f64,
}

/// Angle reduced to `[0, 2π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Angle between two analyzer directions, in `[0, π]`.
pub fn relative_angle(a: f64, b: f64) -> f64 {
    let d = reduce_angle(reduce_angle(b) - reduce_angle(a));
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// Eigenvector of the spin component along `theta` for outcome `+1` or `−1`.
fn eigenvector(theta: f64, plus: bool) -> [f64; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    if plus {
        [c, s]
    } else {
        [-s, c]
    }
}

/// Singlet amplitudes over `|z±⟩|z±⟩` in the order `++, +−, −+, −−`.
const SINGLET: [f64; 4] = [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0];

fn joint_probability(theta_a: f64, theta_b: f64, plus_a: bool, plus_b: bool) -> f64 {
    let u = eigenvector(theta_a, plus_a);
    let v = eigenvector(theta_b, plus_b);
    let amp: f64 = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| u[i] * v[j] * SINGLET[2 * i + j])
        .sum();
    amp * amp
}

/// Outcome probabilities for analyzers `a` (station A) and `b` (station B).
pub fn singlet_probabilities(a: &Setting, b: &Setting) -> Result<SingletPrediction, QmError> {
    if a.side() != Side::A {
        return Err(QmError::SideMismatch {
            setting: a.name,
            expected: "A",
        });
    }
    if b.side() != Side::B {
        return Err(QmError::SideMismatch {
            setting: b.name,
            expected: "B",
        });
    }
    let theta = relative_angle(a.angle, b.angle);
    let probabilities = OutcomeProbabilities::new(
        joint_probability(0.0, theta, true, true),
        joint_probability(0.0, theta, true, false),
        joint_probability(0.0, theta, false, true),
        joint_probability(0.0, theta, false, false),
    );
    Ok(SingletPrediction {
        a: *a,
        b: *b,
        relative_angle: theta,
        probabilities,
        correlation: probabilities.correlation(),
    })
}

/// `E(a, b) = −cos(a − b)`.
pub fn closed_form_correlation(a: f64, b: f64) -> f64 {
    -(a - b).cos()
}

pub fn singlet_predictions(settings: &Settings) -> PerPair<SingletPrediction> {
    PerPair::from_fn(|pair| {
        let (a, b) = settings.pair(pair);
        singlet_probabilities(&a, &b).expect("pair settings are on the right sides")
    })
}

/// CHSH combination of the four singlet correlations.
pub fn singlet_chsh(settings: &Settings) -> f64 {
    let p = singlet_predictions(settings);
    p[Pair::AB].correlation + p[Pair::ABPrime].correlation + p[Pair::APrimeB].correlation
        - p[Pair::APrimeBPrime].correlation
}

/// CHSH from four explicit settings, checking that each is on the expected side.
pub fn singlet_chsh_of(a: &Setting, a_prime: &Setting, b: &Setting, b_prime: &Setting) -> Result<f64, QmError> {
    for (s, side, label) in [
        (a, Side::A, "A"),
        (a_prime, Side::A, "A"),
        (b, Side::B, "B"),
        (b_prime, Side::B, "B"),
    ] {
        if s.side() != side {
            return Err(QmError::SideMismatch {
                setting: s.name,
                expected: label,
            });
        }
    }
    Ok(singlet_chsh(&Settings::new(
        a.angle,
        a_prime.angle,
        b.angle,
        b_prime.angle,
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationSearch {
    pub settings: Settings,
    pub s: f64,
    pub abs_s: f64,
    /// Best `|S|` after the coarse grid and after each refinement round.
    pub history: Vec<f64>,
}

fn better(x: (f64, [f64; 3]), y: (f64, [f64; 3])) -> (f64, [f64; 3]) {
    // larger |S| wins; ties go to the lexicographically smaller angle triple
    match x.0.partial_cmp(&y.0) {
        Some(std::cmp::Ordering::Greater) => x,
        Some(std::cmp::Ordering::Less) => y,
        _ => {
            if y.1 < x.1 {
                y
            } else {
                x
            }
        }
    }
}

fn abs_chsh(angles: [f64; 3]) -> f64 {
    singlet_chsh(&Settings::new(0.0, angles[0], angles[1], angles[2])).abs()
}

/// Grid search for the largest singlet `|S|` with `a = 0` (only relative
/// angles matter), followed by `refine_rounds` rounds of local search on a
/// 3×3×3 stencil whose spacing halves every round.
pub fn max_violation_search(grid_step: f64, refine_rounds: u32) -> Result<ViolationSearch, QmError> {
    if !(grid_step > 0.0 && grid_step <= FRAC_PI_4 + 1e-15) {
        return Err(QmError::InvalidStep(grid_step));
    }
    let n = (TAU / grid_step - 1e-9).ceil() as usize;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * grid_step).collect();
    let mut best = grid
        .par_iter()
        .map(|&ap| {
            let mut local = (f64::NEG_INFINITY, [f64::INFINITY; 3]);
            for &b in &grid {
                for &bp in &grid {
                    let t = [ap, b, bp];
                    local = better(local, (abs_chsh(t), t));
                }
            }
            local
        })
        .reduce(|| (f64::NEG_INFINITY, [f64::INFINITY; 3]), better);
    let mut history = vec![best.0];
    let mut step = grid_step;
    for _ in 0..refine_rounds {
        step /= 2.0;
        let centre = best.1;
        for da in [-1.0, 0.0, 1.0] {
            for db in [-1.0, 0.0, 1.0] {
                for dbp in [-1.0, 0.0, 1.0] {
                    let t = [
                        reduce_angle(centre[0] + da * step),
                        reduce_angle(centre[1] + db * step),
                        reduce_angle(centre[2] + dbp * step),
                    ];
                    let v = abs_chsh(t);
                    if v > best.0 {
                        best = (v, t);
                    }
                }
            }
        }
        history.push(best.0);
    }
    let settings = Settings::new(0.0, best.1[0], best.1[1], best.1[2]);
    Ok(ViolationSearch {
        settings,
        s: singlet_chsh(&settings),
        abs_s: best.0,
        history,
    })
}
