//! Capability analysis over a scenario.
//!
//! An agent's effective capability set is the closure of her basic
//! capabilities under composition. Applied from a fixed origin state that
//! closure is exactly the set of states reachable through her transition
//! maps, so the engine works on reachable sets (at most one per world state)
//! instead of materializing composite functions.
//!
//! `capability_value` is the best local value on the reachable set; staying
//! put is always allowed (the empty composition), so it never falls below
//! the local value. `gain` measures how much a socially provided procedure
//! raises that maximum.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::aggregate::Aggregator;
use crate::error::{Error, Result};
use crate::scenario::{AgentId, Scenario, StateId};

/// States reachable by one agent from an origin, with a witness composition
/// for each: the shortest capability sequence, ties broken by lexicographic
/// name order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachableSet {
    pub agent: AgentId,
    pub origin: StateId,
    pub states: BTreeSet<StateId>,
    pub witness: BTreeMap<StateId, Vec<String>>,
}

/// Best achievable local value and the state realizing it (lexicographically
/// least among maximizers).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapabilityValue {
    pub value: f64,
    pub argmax: StateId,
}

/// Before/after capability values around the addition of one procedure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainReport {
    pub agent: AgentId,
    pub origin: StateId,
    pub procedure: String,
    pub value_before: f64,
    pub value_after: f64,
    pub gain: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryEnd {
    /// No capability strictly improves the agent's local value.
    Fixpoint,
    /// The step budget ran out while an improving capability remained.
    StepLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryStep {
    pub capability: String,
    pub state: StateId,
    pub value: f64,
}

/// Path taken by an agent who always applies the best strictly improving
/// basic capability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub agent: AgentId,
    pub origin: StateId,
    pub steps: Vec<TrajectoryStep>,
    pub end: TrajectoryEnd,
}

/// Per-procedure half of a comparison report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcedureOutcome {
    pub procedure: String,
    pub gains: Vec<GainReport>,
    pub score: f64,
    pub beneficiaries: BTreeSet<AgentId>,
}

/// Side-by-side evaluation of two procedures under one aggregator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub aggregator: Aggregator,
    pub first: ProcedureOutcome,
    pub second: ProcedureOutcome,
    /// Name of the better-scoring procedure; `None` on a tie.
    pub winner: Option<String>,
}

fn ensure_agent(s: &Scenario, agent: &AgentId) -> Result<()> {
    if s.has_agent(agent) {
        Ok(())
    } else {
        Err(Error::UnknownAgent(agent.to_string()))
    }
}

fn ensure_state(s: &Scenario, state: &StateId) -> Result<()> {
    if s.has_state(state) {
        Ok(())
    } else {
        Err(Error::UnknownState(state.to_string()))
    }
}

/// The agent's local value v(agent, state).
pub fn local_value(s: &Scenario, agent: &AgentId, state: &StateId) -> Result<f64> {
    s.value(agent, state)
}

/// Transition maps the agent may use: her own capabilities plus the named
/// procedures, sorted by name for deterministic tie-breaking.
fn usable_moves<'a>(
    s: &'a Scenario,
    agent: &AgentId,
    extra_procedures: &BTreeSet<String>,
) -> Result<Vec<(&'a str, &'a BTreeMap<StateId, StateId>)>> {
    let mut moves: Vec<(&str, &BTreeMap<StateId, StateId>)> = s
        .capabilities_of(agent)
        .map(|c| (c.name.as_str(), &c.transitions))
        .collect();
    for name in extra_procedures {
        let p = s
            .procedure(name)
            .ok_or_else(|| Error::UnknownProcedure(name.clone()))?;
        if !p.benefits(agent) {
            return Err(Error::NotBeneficiary {
                procedure: name.clone(),
                agent: agent.to_string(),
            });
        }
        moves.push((p.name.as_str(), &p.transitions));
    }
    moves.sort_by(|a, b| a.0.cmp(b.0));
    Ok(moves)
}

/// Breadth-first closure of `{origin}` under the agent's capabilities plus
/// the named procedures. First discovery in BFS order with lexicographic
/// move order yields, for every state, the shortest witness path with the
/// lexicographically least name sequence among shortest paths.
pub fn reachable(
    s: &Scenario,
    agent: &AgentId,
    origin: &StateId,
    extra_procedures: &BTreeSet<String>,
) -> Result<ReachableSet> {
    ensure_agent(s, agent)?;
    ensure_state(s, origin)?;
    let moves = usable_moves(s, agent, extra_procedures)?;

    let mut witness: BTreeMap<StateId, Vec<String>> = BTreeMap::new();
    witness.insert(origin.clone(), Vec::new());
    let mut queue = VecDeque::new();
    queue.push_back(origin.clone());

    while let Some(current) = queue.pop_front() {
        let path = witness[&current].clone();
        for (name, transitions) in &moves {
            if let Some(next) = transitions.get(&current) {
                if !witness.contains_key(next) {
                    let mut next_path = path.clone();
                    next_path.push((*name).to_string());
                    witness.insert(next.clone(), next_path);
                    queue.push_back(next.clone());
                }
            }
        }
    }

    Ok(ReachableSet {
        agent: agent.clone(),
        origin: origin.clone(),
        states: witness.keys().cloned().collect(),
        witness,
    })
}

/// Maximum local value the agent can reach from `origin`, with the argmax
/// state (lexicographically least among maximizers). Never below the local
/// value at the origin.
pub fn capability_value(
    s: &Scenario,
    agent: &AgentId,
    origin: &StateId,
    extra_procedures: &BTreeSet<String>,
) -> Result<CapabilityValue> {
    let reach = reachable(s, agent, origin, extra_procedures)?;
    let mut best: Option<(f64, &StateId)> = None;
    for state in &reach.states {
        let v = s.value(agent, state)?;
        match best {
            Some((bv, _)) if v <= bv => {}
            _ => best = Some((v, state)),
        }
    }
    let (value, argmax) = best.expect("reachable set contains the origin");
    Ok(CapabilityValue {
        value,
        argmax: argmax.clone(),
    })
}

/// Gain from granting the agent one procedure: the capability value with the
/// procedure minus the capability value without it. Agents the procedure
/// does not benefit keep their capability set unchanged, so their gain is 0.
pub fn gain(
    s: &Scenario,
    agent: &AgentId,
    origin: &StateId,
    procedure: &str,
) -> Result<GainReport> {
    let p = s
        .procedure(procedure)
        .ok_or_else(|| Error::UnknownProcedure(procedure.to_string()))?;
    let no_extras = BTreeSet::new();
    let before = capability_value(s, agent, origin, &no_extras)?;
    let after = if p.benefits(agent) {
        let extras = BTreeSet::from([procedure.to_string()]);
        capability_value(s, agent, origin, &extras)?
    } else {
        before.clone()
    };
    Ok(GainReport {
        agent: agent.clone(),
        origin: origin.clone(),
        procedure: procedure.to_string(),
        value_before: before.value,
        value_after: after.value,
        gain: after.value - before.value,
    })
}

/// A copy of the scenario with the named capabilities of `agent` removed,
/// as when a regulation bans them.
pub fn restrict(s: &Scenario, agent: &AgentId, banned: &BTreeSet<String>) -> Result<Scenario> {
    ensure_agent(s, agent)?;
    for name in banned {
        match s.capability(name) {
            None => return Err(Error::UnknownCapability(name.clone())),
            Some(c) if c.owner != *agent => {
                return Err(Error::NotOwner {
                    capability: name.clone(),
                    agent: agent.to_string(),
                })
            }
            Some(_) => {}
        }
    }
    let mut out = s.clone();
    out.capabilities.retain(|c| !banned.contains(&c.name));
    Ok(out)
}

/// Repeatedly applies the basic capability with the largest strict increase
/// in the agent's local value (ties by lexicographic name), stopping at a
/// fixpoint or after `max_steps`.
pub fn greedy_trajectory(
    s: &Scenario,
    agent: &AgentId,
    origin: &StateId,
    max_steps: usize,
) -> Result<Trajectory> {
    ensure_agent(s, agent)?;
    ensure_state(s, origin)?;
    let mut caps: Vec<_> = s.capabilities_of(agent).collect();
    caps.sort_by(|a, b| a.name.cmp(&b.name));

    let mut current = origin.clone();
    let mut current_value = s.value(agent, &current)?;
    let mut steps = Vec::new();

    let end = loop {
        let mut best: Option<(f64, String, StateId)> = None;
        for c in &caps {
            let next = c.apply(&current);
            let next_value = s.value(agent, &next)?;
            let improves = next_value > current_value;
            let beats_best = best.as_ref().is_none_or(|(bv, _, _)| next_value > *bv);
            if improves && beats_best {
                best = Some((next_value, c.name.clone(), next));
            }
        }
        match best {
            None => break TrajectoryEnd::Fixpoint,
            Some(_) if steps.len() >= max_steps => break TrajectoryEnd::StepLimit,
            Some((value, capability, state)) => {
                steps.push(TrajectoryStep {
                    capability,
                    state: state.clone(),
                    value,
                });
                current = state;
                current_value = value;
            }
        }
    };

    Ok(Trajectory {
        agent: agent.clone(),
        origin: origin.clone(),
        steps,
        end,
    })
}

fn origin_of<'a>(
    s: &Scenario,
    origins: &'a BTreeMap<AgentId, StateId>,
    agent: &AgentId,
) -> Result<&'a StateId> {
    let origin = origins
        .get(agent)
        .ok_or_else(|| Error::Domain(format!("no origin state given for agent `{}`", agent)))?;
    ensure_state(s, origin)?;
    Ok(origin)
}

fn check_origin_agents(s: &Scenario, origins: &BTreeMap<AgentId, StateId>) -> Result<()> {
    for agent in origins.keys() {
        ensure_agent(s, agent)?;
    }
    Ok(())
}

/// Evaluates two procedures for every agent and ranks them under an
/// aggregator. `origins` maps each agent to her current state.
pub fn compare_procedures(
    s: &Scenario,
    origins: &BTreeMap<AgentId, StateId>,
    first: &str,
    second: &str,
    aggregator: Aggregator,
) -> Result<ComparisonReport> {
    check_origin_agents(s, origins)?;

    let mut locals = Vec::new();
    let mut before = Vec::new();
    let mut outcomes = Vec::new();
    for name in [first, second] {
        if s.procedure(name).is_none() {
            return Err(Error::UnknownProcedure(name.to_string()));
        }
        outcomes.push((name, Vec::new(), Vec::new()));
    }
    for agent in &s.agents {
        let origin = origin_of(s, origins, agent)?;
        locals.push(s.value(agent, origin)?);
        let no_extras = BTreeSet::new();
        before.push(capability_value(s, agent, origin, &no_extras)?.value);
        for (name, gains, after) in &mut outcomes {
            let report = gain(s, agent, origin, name)?;
            after.push(report.value_after);
            gains.push(report);
        }
    }

    let mut halves = outcomes.into_iter().map(|(name, gains, after)| {
        let score = aggregator.change_score(&locals, &before, &after);
        let beneficiaries = gains
            .iter()
            .filter(|g| g.gain > 0.0)
            .map(|g| g.agent.clone())
            .collect();
        ProcedureOutcome {
            procedure: name.to_string(),
            gains,
            score,
            beneficiaries,
        }
    });
    let first_half = halves.next().expect("two procedures evaluated");
    let second_half = halves.next().expect("two procedures evaluated");

    let winner = if first_half.score > second_half.score {
        Some(first_half.procedure.clone())
    } else if second_half.score > first_half.score {
        Some(second_half.procedure.clone())
    } else {
        None
    };

    Ok(ComparisonReport {
        aggregator,
        first: first_half,
        second: second_half,
        winner,
    })
}

/// Arithmetic mean of the gain from `procedure` over all agents.
pub fn per_capita_gain(
    s: &Scenario,
    origins: &BTreeMap<AgentId, StateId>,
    procedure: &str,
) -> Result<f64> {
    check_origin_agents(s, origins)?;
    if s.procedure(procedure).is_none() {
        return Err(Error::UnknownProcedure(procedure.to_string()));
    }
    let mut total = 0.0;
    for agent in &s.agents {
        let origin = origin_of(s, origins, agent)?;
        total += gain(s, agent, origin, procedure)?.gain;
    }
    Ok(total / s.agents.len() as f64)
}
