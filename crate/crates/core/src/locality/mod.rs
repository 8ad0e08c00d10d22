//! Joint-existence tests for setting-pair distribution families.

mod family;
mod simplex;
mod witness;

pub use family::{
    check_joint_existence, classify, construct_factorized_family, family_from_scenario, Certificate,
    FeasibilityVerdict, Locality, SettingPairMarginalFamily, DEFAULT_WORK_LIMIT, FEASIBILITY_TOL,
};
pub use simplex::{phase_one, DenseMatrix, IterationLimit, Phase1Solution};
pub use witness::{construct_nonlocal_witness, witness_family, Witness};
