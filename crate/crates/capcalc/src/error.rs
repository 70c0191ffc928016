//! Crate-wide error type and the coarse categories the CLI maps to exit codes.

use thiserror::Error;

use crate::scenario::Violation;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the CLI: load failures, unresolved names,
/// and everything else (domain preconditions).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Load,
    UnknownName,
    Domain,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unknown capability `{0}`")]
    UnknownCapability(String),

    #[error("unknown procedure `{0}`")]
    UnknownProcedure(String),

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),

    #[error("unknown aggregator `{0}` (expected utilitarian-sum, maximin or prioritarian)")]
    UnknownAggregator(String),

    #[error("unknown policy `{0}` (expected rights-first or pareto-first)")]
    UnknownPolicy(String),

    #[error("procedure `{procedure}` does not list `{agent}` among its beneficiaries")]
    NotBeneficiary { procedure: String, agent: String },

    #[error("capability `{capability}` is not owned by `{agent}`")]
    NotOwner { capability: String, agent: String },

    #[error("scenario has no factor spec; states are not declared as coordinate tuples")]
    MissingFactorSpec,

    #[error("factor spec arity {arity} does not match the {agents} declared agents")]
    FactorArityMismatch { arity: usize, agents: usize },

    #[error("state `{0}` does not parse as a coordinate tuple")]
    UnparsableStateId(String),

    #[error(
        "target ({row}, {col}) is not an equilibrium of the game with the deterred row removed"
    )]
    TargetNotEquilibrium { row: String, col: String },

    #[error("exact tie arithmetic supports k <= {max} (got k = {k}); use the log-space probability instead")]
    UnsupportedExactK { k: u64, max: u64 },

    #[error("electorate must be a positive even count of other voters (got {0})")]
    OddElectorate(u64),

    #[error("{0}")]
    Domain(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse(_) | Error::Validation(_) => ErrorCategory::Load,
            Error::UnknownAgent(_)
            | Error::UnknownState(_)
            | Error::UnknownCapability(_)
            | Error::UnknownProcedure(_)
            | Error::UnknownStrategy(_)
            | Error::UnknownOutcome(_)
            | Error::UnknownAggregator(_)
            | Error::UnknownPolicy(_) => ErrorCategory::UnknownName,
            _ => ErrorCategory::Domain,
        }
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
