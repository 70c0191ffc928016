//! Scenario model: agents, world states, the value table, capabilities and
//! socially provided procedures, plus loading and validation of the JSON
//! scenario format.
//!
//! A scenario is immutable once loaded; every analysis in this crate is a
//! pure function over it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of an agent; a case-sensitive token (`[A-Za-z0-9_-]+`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

/// Identifier of a world state. Plain scenarios use a single token; scenarios
/// with a `factor_spec` join one token per agent with the declared separator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(String);

macro_rules! id_impls {
    ($ty:ident) => {
        impl $ty {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $ty {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

id_impls!(AgentId);
id_impls!(StateId);

/// A world state: id plus optional descriptive tags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldState {
    pub id: StateId,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub labels: BTreeSet<String>,
}

/// Total mapping (agent, state) -> finite value. Totality is a validation
/// rule, not a structural guarantee.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueTable(pub BTreeMap<AgentId, BTreeMap<StateId, f64>>);

impl ValueTable {
    pub fn get(&self, agent: &AgentId, state: &StateId) -> Option<f64> {
        self.0.get(agent).and_then(|row| row.get(state)).copied()
    }
}

/// A named state-transition map owned by one agent. States outside the map
/// are fixed points: applying the capability there leaves the world as is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Capability {
    pub name: String,
    pub owner: AgentId,
    pub transitions: BTreeMap<StateId, StateId>,
}

impl Capability {
    /// Applies the transition map with identity completion.
    pub fn apply(&self, state: &StateId) -> StateId {
        self.transitions.get(state).unwrap_or(state).clone()
    }
}

/// A transition map provided by society, usable by the listed beneficiaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocialProcedure {
    pub name: String,
    pub beneficiaries: BTreeSet<AgentId>,
    pub transitions: BTreeMap<StateId, StateId>,
}

impl SocialProcedure {
    pub fn apply(&self, state: &StateId) -> StateId {
        self.transitions.get(state).unwrap_or(state).clone()
    }

    pub fn benefits(&self, agent: &AgentId) -> bool {
        self.beneficiaries.contains(agent)
    }
}

/// Declares that every state id is a tuple of per-agent coordinates, one per
/// declared agent in file order, joined by `separator`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub arity: usize,
    pub separator: String,
}

impl FactorSpec {
    /// Splits a state id into its coordinates, checking arity and that each
    /// coordinate is a well-formed token.
    pub fn parse<'a>(&self, state: &'a StateId) -> Result<Vec<&'a str>> {
        let parts: Vec<&str> = state.as_str().split(self.separator.as_str()).collect();
        if parts.len() != self.arity || parts.iter().any(|p| !is_token(p)) {
            return Err(Error::UnparsableStateId(state.to_string()));
        }
        Ok(parts)
    }
}

/// The capability names an agent owns, as a set.
#[derive(Clone, Debug, PartialEq)]
pub struct CapabilitySet {
    pub owner: AgentId,
    pub capabilities: BTreeSet<String>,
}

/// A whole world model: agents, states, the value table, capabilities and
/// social procedures. Field order mirrors the file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub agents: Vec<AgentId>,
    pub states: Vec<WorldState>,
    pub values: ValueTable,
    pub capabilities: Vec<Capability>,
    pub procedures: Vec<SocialProcedure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor_spec: Option<FactorSpec>,
}

/// One broken invariant: the offending element, a short rule tag, and detail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub element: String,
    pub rule: String,
    pub detail: String,
}

impl Violation {
    fn new(element: impl Into<String>, rule: &str, detail: impl Into<String>) -> Self {
        Violation {
            element: element.into(),
            rule: rule.to_string(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] `{}`: {}", self.rule, self.element, self.detail)
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Parses a scenario file and validates it. Loading is deterministic: the
/// same text yields an identical `Scenario`.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let violations = validate(&scenario);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(scenario)
}

/// Checks every structural invariant and returns the violations found; an
/// empty list means the scenario is well-formed.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();

    if s.agents.is_empty() {
        out.push(Violation::new(
            "agents",
            "non-empty",
            "scenario declares no agents",
        ));
    }
    if s.states.is_empty() {
        out.push(Violation::new(
            "states",
            "non-empty",
            "scenario declares no states",
        ));
    }

    let mut agent_ids = BTreeSet::new();
    for a in &s.agents {
        if !is_token(a.as_str()) {
            out.push(Violation::new(
                a.as_str(),
                "token",
                "agent id must match [A-Za-z0-9_-]+",
            ));
        }
        if !agent_ids.insert(a.clone()) {
            out.push(Violation::new(
                a.as_str(),
                "unique-agent",
                "duplicate agent id",
            ));
        }
    }

    let mut state_ids = BTreeSet::new();
    for st in &s.states {
        match &s.factor_spec {
            // With a factor spec, the token rule applies per coordinate.
            Some(spec) => {
                if spec.parse(&st.id).is_err() {
                    out.push(Violation::new(
                        st.id.as_str(),
                        "factor-tuple",
                        format!(
                            "state id does not split into {} token coordinate(s) on `{}`",
                            spec.arity, spec.separator
                        ),
                    ));
                }
            }
            None => {
                if !is_token(st.id.as_str()) {
                    out.push(Violation::new(
                        st.id.as_str(),
                        "token",
                        "state id must match [A-Za-z0-9_-]+",
                    ));
                }
            }
        }
        if !state_ids.insert(st.id.clone()) {
            out.push(Violation::new(
                st.id.as_str(),
                "unique-state",
                "duplicate state id",
            ));
        }
    }

    if let Some(spec) = &s.factor_spec {
        if spec.arity == 0 {
            out.push(Violation::new(
                "factor_spec",
                "factor-arity",
                "arity must be at least 1",
            ));
        }
        if spec.separator.is_empty() {
            out.push(Violation::new(
                "factor_spec",
                "factor-separator",
                "separator must be non-empty",
            ));
        }
    }

    // Value table: total over declared (agent, state) pairs, finite, and
    // free of entries for undeclared agents or states.
    for a in &agent_ids {
        match s.values.0.get(a) {
            None => out.push(Violation::new(
                a.as_str(),
                "values-total",
                "value table has no row for this agent",
            )),
            Some(row) => {
                for st in &state_ids {
                    match row.get(st) {
                        None => out.push(Violation::new(
                            format!("{}/{}", a, st),
                            "values-total",
                            "value table misses this (agent, state) entry",
                        )),
                        Some(v) if !v.is_finite() => out.push(Violation::new(
                            format!("{}/{}", a, st),
                            "values-finite",
                            "value table entry is not finite",
                        )),
                        Some(_) => {}
                    }
                }
                for st in row.keys() {
                    if !state_ids.contains(st) {
                        out.push(Violation::new(
                            st.as_str(),
                            "values-known-state",
                            format!("value row of `{}` references an undeclared state", a),
                        ));
                    }
                }
            }
        }
    }
    for a in s.values.0.keys() {
        if !agent_ids.contains(a) {
            out.push(Violation::new(
                a.as_str(),
                "values-known-agent",
                "value table references an undeclared agent",
            ));
        }
    }

    // Capability and procedure names share one namespace so that witness
    // paths and bans can refer to either unambiguously.
    let mut names = BTreeSet::new();
    for c in &s.capabilities {
        if c.name.is_empty() {
            out.push(Violation::new(
                "capability",
                "named",
                "capability with empty name",
            ));
        }
        if !names.insert(c.name.clone()) {
            out.push(Violation::new(
                &c.name,
                "unique-name",
                "duplicate capability/procedure name",
            ));
        }
        if !agent_ids.contains(&c.owner) {
            out.push(Violation::new(
                &c.name,
                "known-owner",
                format!("owner `{}` is not a declared agent", c.owner),
            ));
        }
        check_transitions(&c.name, &c.transitions, &state_ids, &mut out);
    }
    for p in &s.procedures {
        if p.name.is_empty() {
            out.push(Violation::new(
                "procedure",
                "named",
                "procedure with empty name",
            ));
        }
        if !names.insert(p.name.clone()) {
            out.push(Violation::new(
                &p.name,
                "unique-name",
                "duplicate capability/procedure name",
            ));
        }
        if p.beneficiaries.is_empty() {
            out.push(Violation::new(
                &p.name,
                "beneficiaries",
                "procedure lists no beneficiaries",
            ));
        }
        for b in &p.beneficiaries {
            if !agent_ids.contains(b) {
                out.push(Violation::new(
                    &p.name,
                    "known-beneficiary",
                    format!("beneficiary `{}` is not a declared agent", b),
                ));
            }
        }
        check_transitions(&p.name, &p.transitions, &state_ids, &mut out);
    }

    out
}

fn check_transitions(
    name: &str,
    transitions: &BTreeMap<StateId, StateId>,
    known: &BTreeSet<StateId>,
    out: &mut Vec<Violation>,
) {
    for (from, to) in transitions {
        for st in [from, to] {
            if !known.contains(st) {
                out.push(Violation::new(
                    st.as_str(),
                    "known-state",
                    format!("transition of `{}` references an undeclared state", name),
                ));
            }
        }
    }
}

impl Scenario {
    /// Canonical JSON rendering; `load_scenario` of the output reproduces
    /// the scenario exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    pub fn has_agent(&self, agent: &AgentId) -> bool {
        self.agents.contains(agent)
    }

    pub fn has_state(&self, state: &StateId) -> bool {
        self.states.iter().any(|s| s.id == *state)
    }

    pub fn state_ids(&self) -> impl Iterator<Item = &StateId> {
        self.states.iter().map(|s| &s.id)
    }

    /// Looks up v(agent, state), erroring on unknown ids or a value-table gap.
    pub fn value(&self, agent: &AgentId, state: &StateId) -> Result<f64> {
        if !self.has_agent(agent) {
            return Err(Error::UnknownAgent(agent.to_string()));
        }
        if !self.has_state(state) {
            return Err(Error::UnknownState(state.to_string()));
        }
        self.values.get(agent, state).ok_or_else(|| {
            Error::Domain(format!(
                "value table has no entry for ({}, {})",
                agent, state
            ))
        })
    }

    pub fn capability(&self, name: &str) -> Option<&Capability> {
        self.capabilities.iter().find(|c| c.name == name)
    }

    pub fn procedure(&self, name: &str) -> Option<&SocialProcedure> {
        self.procedures.iter().find(|p| p.name == name)
    }

    pub fn capabilities_of<'s>(&'s self, agent: &AgentId) -> impl Iterator<Item = &'s Capability> {
        let agent = agent.clone();
        self.capabilities.iter().filter(move |c| c.owner == agent)
    }

    pub fn capability_set(&self, agent: &AgentId) -> CapabilitySet {
        CapabilitySet {
            owner: agent.clone(),
            capabilities: self
                .capabilities_of(agent)
                .map(|c| c.name.clone())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "agents": ["a"],
        "states": [{"id": "s"}],
        "values": {"a": {"s": 0}},
        "capabilities": [],
        "procedures": []
    }"#;

    #[test]
    fn minimal_scenario_loads() {
        let s = load_scenario(MINIMAL).unwrap();
        assert_eq!(s.agents.len(), 1);
        assert_eq!(s.states.len(), 1);
        assert_eq!(s.value(&"a".into(), &"s".into()).unwrap(), 0.0);
    }

    #[test]
    fn undeclared_state_is_named_in_the_error() {
        let text = r#"{
            "agents": ["a"],
            "states": [{"id": "s"}],
            "values": {"a": {"s": 0}},
            "capabilities": [{"name": "jump", "owner": "a", "transitions": {"s": "moon"}}],
            "procedures": []
        }"#;
        let err = load_scenario(text).unwrap_err();
        match err {
            Error::Validation(v) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].element, "moon");
                assert_eq!(v[0].rule, "known-state");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let text = r#"{
            "agents": ["a"],
            "states": [{"id": "s"}],
            "values": {"a": {"s": 0}},
            "capabilities": [],
            "procedures": [],
            "extra": true
        }"#;
        assert!(matches!(load_scenario(text), Err(Error::Parse(_))));
    }

    #[test]
    fn foreign_owner_is_one_violation() {
        let mut s = load_scenario(MINIMAL).unwrap();
        s.capabilities.push(Capability {
            name: "ghost".to_string(),
            owner: "nobody".into(),
            transitions: BTreeMap::new(),
        });
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "known-owner");
        assert_eq!(v[0].element, "ghost");
    }

    #[test]
    fn missing_value_entry_is_one_violation() {
        let mut s = load_scenario(MINIMAL).unwrap();
        s.states.push(WorldState {
            id: "t".into(),
            labels: BTreeSet::new(),
        });
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "values-total");
        assert_eq!(v[0].element, "a/t");
    }

    #[test]
    fn duplicate_ids_are_flagged() {
        let text = r#"{
            "agents": ["a", "a"],
            "states": [{"id": "s"}],
            "values": {"a": {"s": 0}},
            "capabilities": [],
            "procedures": []
        }"#;
        let err = load_scenario(text).unwrap_err();
        match err {
            Error::Validation(v) => assert!(v.iter().any(|x| x.rule == "unique-agent")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn bad_token_is_flagged() {
        let text = r#"{
            "agents": ["a b"],
            "states": [{"id": "s"}],
            "values": {"a b": {"s": 0}},
            "capabilities": [],
            "procedures": []
        }"#;
        let err = load_scenario(text).unwrap_err();
        match err {
            Error::Validation(v) => assert!(v.iter().any(|x| x.rule == "token")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn factor_spec_states_must_split() {
        let text = r#"{
            "agents": ["a", "b"],
            "states": [{"id": "x.y"}, {"id": "lonely"}],
            "values": {"a": {"x.y": 0, "lonely": 0}, "b": {"x.y": 0, "lonely": 0}},
            "capabilities": [],
            "procedures": [],
            "factor_spec": {"arity": 2, "separator": "."}
        }"#;
        let err = load_scenario(text).unwrap_err();
        match err {
            Error::Validation(v) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].element, "lonely");
                assert_eq!(v[0].rule, "factor-tuple");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let text = r#"{
            "agents": ["b", "a"],
            "states": [{"id": "t", "labels": ["far"]}, {"id": "s"}],
            "values": {"a": {"s": 1.5, "t": -2}, "b": {"s": 0, "t": 0.25}},
            "capabilities": [{"name": "hop", "owner": "a", "transitions": {"s": "t"}}],
            "procedures": [{"name": "lift", "beneficiaries": ["b"], "transitions": {"t": "s"}}]
        }"#;
        let s1 = load_scenario(text).unwrap();
        let s2 = load_scenario(&s1.to_json()).unwrap();
        assert_eq!(s1, s2);
        assert!(validate(&s1).is_empty());
    }
}
