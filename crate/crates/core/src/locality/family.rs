use std::collections::HashSet;

use serde::Serialize;

use super::simplex::{phase_one, DenseMatrix};
use crate::engine::{check_compatibility, ScenarioDistributions};
use crate::error::FeasibilityError;
use crate::hv::{labels, ravel, step, Distribution, HiddenSpace};
use crate::response::ResponseModel;
use crate::setting::{Pair, PerPair, PerSetting, SettingName};

/// Default cap on the number of composite points (LP variables).
pub const DEFAULT_WORK_LIMIT: u64 = 65_536;

/// Threshold on the phase-1 objective and on certificate margins.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// The four setting-pair distributions `ρ_pq(λ, λ_p, λ_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingPairMarginalFamily {
    spaces: [HiddenSpace; 5],
    marginals: PerPair<Distribution>,
}

fn pair_domain(spaces: &[HiddenSpace; 5], pair: Pair) -> [HiddenSpace; 3] {
    [
        spaces[0].clone(),
        spaces[1 + pair.alice().index()].clone(),
        spaces[1 + pair.bob().index()].clone(),
    ]
}

impl SettingPairMarginalFamily {
    /// `spaces` is `(λ, λ_a, λ_a′, λ_b, λ_b′)`; the marginal for `(p, q)` must
    /// be over `(λ, λ_p, λ_q)` in that order.
    pub fn new(spaces: [HiddenSpace; 5], marginals: PerPair<Distribution>) -> Result<Self, FeasibilityError> {
        let mut seen = HashSet::new();
        for s in &spaces {
            if !seen.insert(s.label()) {
                return Err(FeasibilityError::InvalidFamily(format!(
                    "space `{}` used twice",
                    s.label()
                )));
            }
        }
        for (pair, d) in marginals.iter() {
            let expected = pair_domain(&spaces, pair);
            if d.domain() != expected {
                return Err(FeasibilityError::InvalidFamily(format!(
                    "marginal for {pair} is over {:?}, expected {:?}",
                    d.labels(),
                    expected.iter().map(HiddenSpace::label).collect::<Vec<_>>()
                )));
            }
        }
        Ok(SettingPairMarginalFamily { spaces, marginals })
    }

    /// Marginals of a joint distribution over `(λ, λ_a, λ_a′, λ_b, λ_b′)`.
    pub fn from_joint(joint: &Distribution) -> Result<Self, FeasibilityError> {
        let spaces: [HiddenSpace; 5] = joint
            .domain()
            .to_vec()
            .try_into()
            .map_err(|_| FeasibilityError::InvalidInput("joint must be over exactly five spaces".into()))?;
        let marginals = PerPair::from_fn(|p| p).try_map(|pair, _| {
            let keep = pair_domain(&spaces, pair);
            joint.marginalize(&[keep[0].label(), keep[1].label(), keep[2].label()])
        })?;
        SettingPairMarginalFamily::new(spaces, marginals)
    }

    pub fn spaces(&self) -> &[HiddenSpace; 5] {
        &self.spaces
    }

    pub fn marginal(&self, pair: Pair) -> &Distribution {
        &self.marginals[pair]
    }

    pub fn marginals(&self) -> &PerPair<Distribution> {
        &self.marginals
    }

    /// Number of points of the composite variable.
    pub fn composite_cardinality(&self) -> u64 {
        self.spaces.iter().map(|s| s.cardinality() as u64).product()
    }

    fn composite_cards(&self) -> Vec<usize> {
        self.spaces.iter().map(HiddenSpace::cardinality).collect()
    }

    /// Row offset of each pair's block in the constraint system.
    fn row_offsets(&self) -> PerPair<usize> {
        let mut acc = 0;
        PerPair::from_fn(|p| {
            let off = acc;
            acc += self.marginals[p].len();
            off
        })
    }

    /// Constraint matrix and right-hand side. Rows are ordered pair-major
    /// (`ab`, `ab′`, `a′b`, `a′b′`), then row-major over `(λ, λ_p, λ_q)`;
    /// columns are the composite points in row-major order.
    pub fn constraint_system(&self) -> (DenseMatrix, Vec<f64>) {
        let offsets = self.row_offsets();
        let rows = offsets[Pair::APrimeBPrime] + self.marginals[Pair::APrimeBPrime].len();
        let cards = self.composite_cards();
        let n = self.composite_cardinality() as usize;
        let mut a = DenseMatrix::zeros(rows, n);
        let mut idx = vec![0; 5];
        for col in 0..n {
            for pair in Pair::ALL {
                a.set(offsets[pair] + self.cell_of(&idx, &cards, pair), col, 1.0);
            }
            step(&mut idx, &cards);
        }
        let b = Pair::ALL
            .iter()
            .flat_map(|&p| self.marginals[p].weights().iter().copied())
            .collect();
        (a, b)
    }

    fn cell_of(&self, idx: &[usize], cards: &[usize], pair: Pair) -> usize {
        let (p, q) = (1 + pair.alice().index(), 1 + pair.bob().index());
        ravel(&[idx[0], idx[p], idx[q]], &[cards[0], cards[p], cards[q]])
    }

    /// Largest elementwise gap between the marginals of `joint` and the family.
    pub fn residual(&self, joint: &Distribution) -> Result<f64, FeasibilityError> {
        let other = SettingPairMarginalFamily::from_joint(joint)?;
        let mut worst: f64 = 0.0;
        for pair in Pair::ALL {
            let gap = self.marginals[pair]
                .max_abs_diff(&other.marginals[pair])
                .ok_or_else(|| FeasibilityError::InvalidInput("joint is over different spaces".into()))?;
            worst = worst.max(gap);
        }
        Ok(worst)
    }
}

/// Linear functional over the constraint rows proving that no joint exists:
/// every joint distribution satisfies `Σ coefficients·marginals ≤ bound`, while
/// the family evaluates to `value > bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub coefficients: Vec<f64>,
    pub bound: f64,
    pub value: f64,
}

impl Certificate {
    pub fn margin(&self) -> f64 {
        self.value - self.bound
    }

    /// Recompute bound and value from the family; true when the family
    /// exceeds the bound by more than [`FEASIBILITY_TOL`].
    pub fn verify(&self, family: &SettingPairMarginalFamily) -> bool {
        let (a, b) = family.constraint_system();
        if self.coefficients.len() != b.len() {
            return false;
        }
        let bound = a
            .transpose_mul_vec(&self.coefficients)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let value: f64 = b.iter().zip(&self.coefficients).map(|(x, y)| x * y).sum();
        value - bound > FEASIBILITY_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityVerdict {
    Feasible { joint: Distribution, residual: f64 },
    Infeasible { certificate: Certificate },
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Locality {
    Local,
    Nonlocal,
}

/// Decide whether one distribution over `(λ, λ_a, λ_a′, λ_b, λ_b′)` has all
/// four members of `family` as marginals.
pub fn check_joint_existence(
    family: &SettingPairMarginalFamily,
    work_limit: u64,
) -> Result<FeasibilityVerdict, FeasibilityError> {
    let required = family.composite_cardinality();
    if required > work_limit {
        return Err(FeasibilityError::WorkLimitExceeded {
            required,
            limit: work_limit,
        });
    }
    let (a, b) = family.constraint_system();
    let max_pivots = 50 * (a.rows() + a.cols()) + 1000;
    let solution = phase_one(&a, &b, max_pivots).map_err(|e| FeasibilityError::SolverIterationLimit(e.0))?;

    if solution.objective <= FEASIBILITY_TOL {
        let joint = Distribution::renormalized(family.spaces.to_vec(), solution.x)?;
        let residual = family.residual(&joint)?;
        Ok(FeasibilityVerdict::Feasible { joint, residual })
    } else {
        let aty = a.transpose_mul_vec(&solution.duals);
        let bound = aty.into_iter().fold(f64::NEG_INFINITY, f64::max);
        let value = b.iter().zip(&solution.duals).map(|(x, y)| x * y).sum();
        Ok(FeasibilityVerdict::Infeasible {
            certificate: Certificate {
                coefficients: solution.duals,
                bound,
                value,
            },
        })
    }
}

pub fn classify(family: &SettingPairMarginalFamily, work_limit: u64) -> Result<Locality, FeasibilityError> {
    Ok(if check_joint_existence(family, work_limit)?.is_feasible() {
        Locality::Local
    } else {
        Locality::Nonlocal
    })
}

fn single_space(what: &str, d: &Distribution) -> Result<HiddenSpace, FeasibilityError> {
    match d.domain() {
        [s] => Ok(s.clone()),
        _ => Err(FeasibilityError::InvalidInput(format!(
            "{what} must be over a single space"
        ))),
    }
}

/// `ρ_pq = ρ(λ) ρ_p(λ_p) ρ_q(λ_q)` for every pair.
pub fn construct_factorized_family(
    rho: &Distribution,
    apparatus: &PerSetting<Distribution>,
) -> Result<SettingPairMarginalFamily, FeasibilityError> {
    let lambda = single_space("source distribution", rho)?;
    let app = apparatus.try_map(|s, d| single_space(&format!("apparatus distribution for {s}"), d))?;
    let [a, ap, b, bp] = app.0;
    let spaces = [lambda, a, ap, b, bp];
    let marginals = PerPair::from_fn(|p| p).try_map(|pair, _| {
        Distribution::product(&[
            rho.clone(),
            apparatus[pair.alice()].clone(),
            apparatus[pair.bob()].clone(),
        ])
    })?;
    SettingPairMarginalFamily::new(spaces, marginals)
}

/// The marginal family an experiment induces.
///
/// Apparatus models give the family directly. Source-level models are embedded
/// with one-point apparatus spaces (the source domain flattened into a single
/// `lambda` space), so a joint exists iff the four `ρ_pq(λ)` coincide.
pub fn family_from_scenario(
    model: &ResponseModel,
    dists: &ScenarioDistributions,
) -> Result<SettingPairMarginalFamily, FeasibilityError> {
    use ScenarioDistributions as D;
    check_compatibility(model, dists).map_err(|e| FeasibilityError::InvalidInput(e.to_string()))?;
    match (model, dists) {
        (ResponseModel::Apparatus(_), D::FactorizedApparatus { source, apparatus }) => {
            construct_factorized_family(source, apparatus)
        }
        (ResponseModel::Apparatus(_), D::JointComposite(joint)) => SettingPairMarginalFamily::from_joint(joint),
        (ResponseModel::Apparatus(m), D::SettingDependent(rhos)) => {
            SettingPairMarginalFamily::new(m.composite_spaces(), rhos.clone())
        }
        (_, D::SourceOnly(rho)) => source_level_family(PerPair::from_fn(|_| rho)),
        (_, D::SettingDependent(rhos)) => source_level_family(PerPair::from_fn(|p| &rhos[p])),
        _ => Err(FeasibilityError::InvalidInput(format!(
            "no marginal family for a {} model under {} distributions",
            model.kind().name(),
            dists.mode().name()
        ))),
    }
}

fn source_level_family(rhos: PerPair<&Distribution>) -> Result<SettingPairMarginalFamily, FeasibilityError> {
    let lambda = HiddenSpace::flatten(labels::LAMBDA, rhos[Pair::AB].domain())?;
    let app = PerSetting::from_fn(|s: SettingName| HiddenSpace::singleton(s.apparatus_label()));
    let [a, ap, b, bp] = app.0.clone();
    let spaces = [lambda.clone(), a, ap, b, bp];
    let marginals = rhos.try_map(|pair, d| {
        Distribution::new(
            vec![lambda.clone(), app[pair.alice()].clone(), app[pair.bob()].clone()],
            d.weights().to_vec(),
        )
    })?;
    SettingPairMarginalFamily::new(spaces, marginals)
}
