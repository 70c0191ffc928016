//! Capability calculus over finite world models.
//!
//! A scenario lists agents, world states, a per-agent value for every state,
//! capabilities (state-transition maps owned by one agent) and socially
//! provided procedures. On top of that the crate computes:
//!
//! - reachability closures, capability values and the gain a procedure
//!   delivers to each agent ([`engine`]);
//! - externalities and the independence / product-world factorization
//!   conditions ([`externality`]);
//! - pure-strategy equilibria, dominance and deterrence penalties for
//!   two-player normal-form games ([`game`]);
//! - rights-based social rankings and the liberal-paradox diagnosis
//!   ([`paradox`]);
//! - pivotal-vote tie probabilities, exact and in log space ([`pivot`]).
//!
//! Everything is a pure function over immutable inputs; all tie-breaking is
//! lexicographic so repeated runs produce identical output.

pub mod aggregate;
pub mod engine;
pub mod error;
pub mod externality;
pub mod game;
pub mod paradox;
pub mod pivot;
pub mod report;
pub mod scenario;

pub use aggregate::Aggregator;
pub use error::{Error, ErrorCategory, Result};
pub use scenario::{load_scenario, validate, AgentId, Scenario, StateId};
