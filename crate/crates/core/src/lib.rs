//! Local hidden-variable models of a two-station spin-correlation experiment.
//!
//! * [`hv`] — discrete hidden-variable spaces and distributions over them.
//! * [`response`] — outcome functions: deterministic, stochastic, contextual,
//!   and apparatus-dependent.
//! * [`engine`] — exact and Monte Carlo correlations, CHSH, the Bell check and
//!   an exhaustive bound enumeration.
//! * [`locality`] — whether four setting-pair distributions are marginals of
//!   one joint distribution, with certificates when they are not.
//! * [`qm`] — singlet-state predictions used as the quantum reference.

pub mod engine;
pub mod error;
pub mod hv;
pub mod locality;
pub mod qm;
pub mod random;
pub mod response;
pub mod rng;
pub mod setting;

pub use engine::{
    bell_check, chsh, chsh_of, chsh_variants, correlation_from_probabilities, enumerate_bound, exact_report,
    monte_carlo_report, BellVerdict, CorrelationReport, Estimator, Mode, OutcomeProbabilities, PairEstimate,
    ScenarioDistributions,
};
pub use error::{DistributionError, EngineError, Error, FeasibilityError, ModelError, QmError};
pub use hv::{labels, Distribution, HiddenSpace};
pub use locality::{check_joint_existence, classify, FeasibilityVerdict, Locality, SettingPairMarginalFamily};
pub use response::{
    ApparatusModel, ContextualModel, DeterministicSource, ModelKind, Outcome, ResponseModel, StochasticSource,
};
pub use setting::{Pair, PerPair, PerSetting, Setting, SettingName, Settings, Side};
