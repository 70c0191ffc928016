//! Cross-agent effects of capability use.
//!
//! The independence condition asks that applying one agent's capability
//! leaves every other agent's local value unchanged. Product-world
//! factorization is the stronger structural condition that each agent's
//! value and moves live entirely on her own coordinate; it implies
//! independence but is not required for it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::aggregate::Aggregator;
use crate::error::{Error, Result};
use crate::scenario::{AgentId, Scenario, StateId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    None,
}

impl Sign {
    pub fn of(delta: f64) -> Sign {
        if delta > 0.0 {
            Sign::Positive
        } else if delta < 0.0 {
            Sign::Negative
        } else {
            Sign::None
        }
    }
}

/// One nonzero cross-agent value change: `actor` applying `capability` at
/// `state` moves `affected`'s local value by `delta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExternalityRecord {
    pub actor: AgentId,
    pub capability: String,
    pub state: StateId,
    pub affected: AgentId,
    pub delta: f64,
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceVerdict {
    pub holds: bool,
    pub violations: Vec<ExternalityRecord>,
}

/// All nonzero cross-agent deltas, sorted by (actor, capability, state,
/// affected). Only explicit transition domains are scanned; identity
/// completions cannot change any value.
pub fn externality_report(s: &Scenario) -> Vec<ExternalityRecord> {
    let mut records = Vec::new();
    for cap in &s.capabilities {
        for (from, to) in &cap.transitions {
            for affected in &s.agents {
                if *affected == cap.owner {
                    continue;
                }
                let (Some(before), Some(after)) =
                    (s.values.get(affected, from), s.values.get(affected, to))
                else {
                    continue;
                };
                let delta = after - before;
                if delta != 0.0 {
                    records.push(ExternalityRecord {
                        actor: cap.owner.clone(),
                        capability: cap.name.clone(),
                        state: from.clone(),
                        affected: affected.clone(),
                        delta,
                        sign: Sign::of(delta),
                    });
                }
            }
        }
    }
    records.sort_by(|a, b| {
        (&a.actor, &a.capability, &a.state, &a.affected).cmp(&(
            &b.actor,
            &b.capability,
            &b.state,
            &b.affected,
        ))
    });
    records
}

/// Exact check of the independence condition: for every capability of every
/// agent and every state it explicitly moves, no other agent's value changes.
pub fn check_independence(s: &Scenario) -> IndependenceVerdict {
    let violations = externality_report(s);
    IndependenceVerdict {
        holds: violations.is_empty(),
        violations,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FactorizationViolation {
    /// The agent's value differs between two states that agree on her own
    /// coordinate.
    ValueCoupled {
        agent: AgentId,
        state_a: StateId,
        state_b: StateId,
        value_a: f64,
        value_b: f64,
    },
    /// A capability moves a coordinate that belongs to another agent.
    ForeignCoordinateMove {
        capability: String,
        owner: AgentId,
        from: StateId,
        to: StateId,
        coordinate_of: AgentId,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationVerdict {
    pub holds: bool,
    pub violations: Vec<FactorizationViolation>,
}

/// Verifies product-world structure under the scenario's factor spec:
/// (a) each agent's value depends only on her own coordinate, and
/// (b) each capability changes only its owner's coordinate.
/// Coordinate k belongs to the k-th agent in declaration order.
pub fn check_factorization(s: &Scenario) -> Result<FactorizationVerdict> {
    let spec = s.factor_spec.as_ref().ok_or(Error::MissingFactorSpec)?;
    if spec.arity != s.agents.len() {
        return Err(Error::FactorArityMismatch {
            arity: spec.arity,
            agents: s.agents.len(),
        });
    }

    let mut coords: BTreeMap<&StateId, Vec<&str>> = BTreeMap::new();
    for state in s.state_ids() {
        coords.insert(state, spec.parse(state)?);
    }

    let mut violations = Vec::new();

    // (a) group states by the agent's own coordinate; values must agree
    // within each group.
    for (index, agent) in s.agents.iter().enumerate() {
        let mut groups: BTreeMap<&str, Vec<&StateId>> = BTreeMap::new();
        for (state, parts) in &coords {
            groups.entry(parts[index]).or_default().push(state);
        }
        for group in groups.values() {
            let representative = group[0];
            let base = s.value(agent, representative)?;
            for state in &group[1..] {
                let v = s.value(agent, state)?;
                if v != base {
                    violations.push(FactorizationViolation::ValueCoupled {
                        agent: agent.clone(),
                        state_a: representative.clone(),
                        state_b: (*state).clone(),
                        value_a: base,
                        value_b: v,
                    });
                }
            }
        }
    }

    // (b) every explicit transition must leave foreign coordinates fixed.
    for cap in &s.capabilities {
        let owner_index = s
            .agents
            .iter()
            .position(|a| *a == cap.owner)
            .ok_or_else(|| Error::UnknownAgent(cap.owner.to_string()))?;
        for (from, to) in &cap.transitions {
            let from_parts = coords
                .get(from)
                .ok_or_else(|| Error::UnknownState(from.to_string()))?;
            let to_parts = coords
                .get(to)
                .ok_or_else(|| Error::UnknownState(to.to_string()))?;
            for (index, agent) in s.agents.iter().enumerate() {
                if index != owner_index && from_parts[index] != to_parts[index] {
                    violations.push(FactorizationViolation::ForeignCoordinateMove {
                        capability: cap.name.clone(),
                        owner: cap.owner.clone(),
                        from: from.clone(),
                        to: to.clone(),
                        coordinate_of: agent.clone(),
                    });
                }
            }
        }
    }

    Ok(FactorizationVerdict {
        holds: violations.is_empty(),
        violations,
    })
}

/// Welfare effect of one capability application on every agent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    pub capability: String,
    pub actor: AgentId,
    pub from: StateId,
    pub to: StateId,
    pub deltas: Vec<(AgentId, f64)>,
    pub aggregator: Aggregator,
    pub aggregate_change: f64,
    /// Someone loses, yet the aggregate rises.
    pub improving_despite_loser: bool,
}

/// Applies `capability` once at `state` and reports every agent's value
/// change plus the aggregate change under the chosen aggregator.
pub fn transfer_analysis(
    s: &Scenario,
    capability: &str,
    state: &StateId,
    aggregator: Aggregator,
) -> Result<TransferReport> {
    let cap = s
        .capability(capability)
        .ok_or_else(|| Error::UnknownCapability(capability.to_string()))?;
    if !s.has_state(state) {
        return Err(Error::UnknownState(state.to_string()));
    }
    let to = cap.apply(state);

    let mut before = Vec::new();
    let mut after = Vec::new();
    let mut deltas = Vec::new();
    for agent in &s.agents {
        let b = s.value(agent, state)?;
        let a = s.value(agent, &to)?;
        before.push(b);
        after.push(a);
        deltas.push((agent.clone(), a - b));
    }

    let aggregate_change = aggregator.change_score(&before, &before, &after);
    let improving_despite_loser = deltas.iter().any(|(_, d)| *d < 0.0) && aggregate_change > 0.0;

    Ok(TransferReport {
        capability: capability.to_string(),
        actor: cap.owner.clone(),
        from: state.clone(),
        to,
        deltas,
        aggregator,
        aggregate_change,
        improving_despite_loser,
    })
}
