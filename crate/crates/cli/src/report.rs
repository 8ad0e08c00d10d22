//! JSON report document. Every field is a function of the scenario and the
//! command-line flags, so repeated runs produce byte-identical output.

use lhv_core::engine::{BellVerdict, Estimator, PairEstimate};
use lhv_core::{Pair, PerPair, Settings};
use serde::Serialize;

use crate::scenario::Analysis;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub tool: ToolInfo,
    pub scenario: ScenarioInfo,
    pub settings: Settings,
    pub estimator: Estimator,
    pub analyses: Vec<Analysis>,
    pub experiments: Vec<ExperimentReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: "lhv",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub schema_version: u32,
    /// SHA-256 of the canonical (re-serialized) scenario.
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub model: String,
    pub model_kind: &'static str,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlations: Option<PairTable<PairEstimate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chsh: Option<ChshReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bell_check: Option<BellVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilityReport>,
}

/// Per-pair values keyed by pair name, in the order `ab, ab′, a′b, a′b′`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTable<T> {
    pub ab: T,
    pub ab_prime: T,
    pub a_prime_b: T,
    pub a_prime_b_prime: T,
}

impl<T: Clone> From<&PerPair<T>> for PairTable<T> {
    fn from(p: &PerPair<T>) -> Self {
        PairTable {
            ab: p[Pair::AB].clone(),
            ab_prime: p[Pair::ABPrime].clone(),
            a_prime_b: p[Pair::APrimeB].clone(),
            a_prime_b_prime: p[Pair::APrimeBPrime].clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshReport {
    pub s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err: Option<f64>,
    /// The four relabelings of `S`, minus sign on `ab, ab′, a′b, a′b′` in
    /// turn; the last equals `s`.
    pub variants: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum FeasibilityReport {
    Feasible {
        composite_cardinality: u64,
        /// Largest deviation between the recovered joint's marginals and the family.
        residual: f64,
    },
    Infeasible {
        composite_cardinality: u64,
        certificate: CertificateReport,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub bound: f64,
    pub value: f64,
    pub margin: f64,
    pub verified: bool,
    /// One coefficient per marginal cell: pair-major, then row-major over `(λ, λ_p, λ_q)`.
    pub coefficients: Vec<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report types always serialize");
        s.push('\n');
        s
    }
}
