use std::fmt;

use thiserror::Error;

use crate::setting::SettingName;

/// Failures raised while building hidden spaces and distributions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("NegativeWeight: weight at index {index} is {value}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("NotNormalized: weights sum to {sum}")]
    NotNormalized { sum: f64 },
    #[error("ShapeMismatch: domain has {expected} points but {actual} weights were given")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("OverlappingDomains: space `{0}` appears in more than one part")]
    OverlappingDomains(String),
    #[error("EmptyKeepSet: marginalization must keep at least one space")]
    EmptyKeepSet,
    #[error("UnknownSpace: `{0}` is not part of the domain")]
    UnknownSpace(String),
    #[error("InvalidSpace: {0}")]
    InvalidSpace(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("KindMismatch: operation needs a {expected} model, got {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("MissingRemoteSetting: contextual models need the remote setting")]
    MissingRemoteSetting,
    #[error("UnexpectedRemoteSetting: only contextual models take a remote setting")]
    UnexpectedRemoteSetting,
    #[error("PointDimensionMismatch: expected {expected} coordinates, got {actual}")]
    PointDimensionMismatch { expected: usize, actual: usize },
    #[error("PointOutOfRange: coordinate {axis} is {index} but the space has {cardinality} values")]
    PointOutOfRange {
        axis: usize,
        index: usize,
        cardinality: usize,
    },
    #[error("WrongSide: setting {setting} cannot be used as {role}")]
    WrongSide { setting: SettingName, role: &'static str },
    #[error("DomainMismatch: {0}")]
    DomainMismatch(String),
    #[error("TableShape: table for {setting} has {actual} entries, expected {expected}")]
    TableShape {
        setting: String,
        expected: usize,
        actual: usize,
    },
    #[error("InvalidProbability: p(+1) = {value} for {setting} at index {index}")]
    InvalidProbability {
        setting: SettingName,
        index: usize,
        value: f64,
    },
    #[error(
        "RemoteDependenceForbidden: {setting} depends on the remote setting at index {index} but the stations are space-like separated"
    )]
    RemoteDependenceForbidden { setting: SettingName, index: usize },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("IncompatibleModeModel: a {kind} model cannot be evaluated under {mode} distributions")]
    IncompatibleModeModel { mode: &'static str, kind: &'static str },
    #[error("DomainMismatch: {0}")]
    DomainMismatch(String),
    #[error("NotAProbabilityVector: ({0}, {1}, {2}, {3})")]
    NotAProbabilityVector(f64, f64, f64, f64),
    #[error("OutOfRangeCorrelation: {0} is outside [-1, 1]")]
    OutOfRangeCorrelation(f64),
    #[error("ZeroSamples: Monte Carlo estimation needs at least one sample")]
    ZeroSamples,
    #[error("InvalidCardinality: {0}")]
    InvalidCardinality(usize),
    #[error("WorkLimitExceeded: {required} units of work requested, limit is {limit}")]
    WorkLimitExceeded { required: u64, limit: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeasibilityError {
    #[error("WorkLimitExceeded: composite space has {required} points, limit is {limit}")]
    WorkLimitExceeded { required: u64, limit: u64 },
    #[error("InvalidFamily: {0}")]
    InvalidFamily(String),
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
    #[error("NonViolatingAngles: singlet S = {s} satisfies |S| <= 2 at these settings")]
    NonViolatingAngles { s: f64 },
    #[error("SolverIterationLimit: simplex stopped after {0} pivots")]
    SolverIterationLimit(usize),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmError {
    #[error("SideMismatch: {setting} is not a side {expected} setting")]
    SideMismatch {
        setting: SettingName,
        expected: &'static str,
    },
    #[error("InvalidStep: grid step {0} must lie in (0, pi/4]")]
    InvalidStep(f64),
}

/// Crate-level error. Its display form is `<module>/<Variant>: detail`, where
/// `<module>` names the component whose validation rejected the input.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    HvCore(DistributionError),
    Model(ModelError),
    Engine(EngineError),
    Feasibility(FeasibilityError),
    Qm(QmError),
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::HvCore(_)
            | Error::Model(ModelError::Distribution(_))
            | Error::Engine(EngineError::Model(ModelError::Distribution(_)))
            | Error::Feasibility(FeasibilityError::Distribution(_))
            | Error::Feasibility(FeasibilityError::Model(ModelError::Distribution(_))) => "hv-core",
            Error::Model(_) | Error::Engine(EngineError::Model(_)) | Error::Feasibility(FeasibilityError::Model(_)) => {
                "response-models"
            }
            Error::Engine(_) => "correlation-engine",
            Error::Feasibility(_) => "locality-feasibility",
            Error::Qm(_) => "qm-reference",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let detail: &dyn fmt::Display = match self {
            Error::HvCore(e) => e,
            Error::Model(e) => e,
            Error::Engine(e) => e,
            Error::Feasibility(e) => e,
            Error::Qm(e) => e,
        };
        write!(f, "{}/{}", self.module(), detail)
    }
}

impl std::error::Error for Error {}

macro_rules! impl_from {
    ($($src:ty => $variant:ident),* $(,)?) => {
        $(impl From<$src> for Error {
            fn from(e: $src) -> Self {
                Error::$variant(e)
            }
        })*
    };
}

impl_from! {
    DistributionError => HvCore,
    ModelError => Model,
    EngineError => Engine,
    FeasibilityError => Feasibility,
    QmError => Qm,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_names_originating_module() {
        let e: Error = EngineError::Model(ModelError::Distribution(DistributionError::NegativeWeight {
            index: 1,
            value: -0.2,
        }))
        .into();
        assert!(e.to_string().starts_with("hv-core/NegativeWeight"));
        let e: Error = EngineError::ZeroSamples.into();
        assert_eq!(e.module(), "correlation-engine");
    }
}
