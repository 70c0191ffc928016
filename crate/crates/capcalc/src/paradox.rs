//! Rights-based social ranking and its clash with Pareto optimality (Sen's
//! liberal paradox).
//!
//! Each agent may be decisive over some outcome pairs: society must rank
//! those pairs the way the agent does. Unanimous preferences add Pareto
//! edges. Closing the combined relation under transitivity can produce a
//! cycle, and a planner who follows rights alone can end up choosing an
//! outcome everyone ranks below an available alternative.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{AgentId, Violation};

/// Identifier of an outcome in a preference profile.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeId(String);

impl OutcomeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OutcomeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for OutcomeId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// Strict total orders over a common outcome set, best first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreferenceProfile {
    pub outcomes: Vec<OutcomeId>,
    pub rankings: BTreeMap<AgentId, Vec<OutcomeId>>,
}

impl PreferenceProfile {
    pub fn new(
        outcomes: Vec<OutcomeId>,
        rankings: BTreeMap<AgentId, Vec<OutcomeId>>,
    ) -> Result<Self> {
        let profile = PreferenceProfile { outcomes, rankings };
        let violations = profile.validate();
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        Ok(profile)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.outcomes.is_empty() {
            out.push(violation(
                "outcomes",
                "non-empty",
                "profile declares no outcomes",
            ));
        }
        if self.rankings.is_empty() {
            out.push(violation(
                "rankings",
                "non-empty",
                "profile declares no agents",
            ));
        }
        let unique: BTreeSet<&OutcomeId> = self.outcomes.iter().collect();
        if unique.len() != self.outcomes.len() {
            out.push(violation(
                "outcomes",
                "unique-outcome",
                "duplicate outcome id",
            ));
        }
        for (agent, ranking) in &self.rankings {
            let ranked: BTreeSet<&OutcomeId> = ranking.iter().collect();
            if ranked.len() != ranking.len() || ranked != unique {
                out.push(violation(
                    agent.as_str(),
                    "ranking-permutation",
                    "ranking must order every outcome exactly once",
                ));
            }
        }
        out
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        self.rankings.keys()
    }

    /// Position of each outcome in the agent's ranking; lower is better.
    fn rank_map(&self, agent: &AgentId) -> Result<BTreeMap<&OutcomeId, usize>> {
        let ranking = self
            .rankings
            .get(agent)
            .ok_or_else(|| Error::UnknownAgent(agent.to_string()))?;
        Ok(ranking.iter().enumerate().map(|(i, o)| (o, i)).collect())
    }
}

/// Per-agent decisive pairs, stored unordered; the agent's own ranking
/// orients them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RightsAssignment {
    pub by_agent: BTreeMap<AgentId, BTreeSet<(OutcomeId, OutcomeId)>>,
}

impl RightsAssignment {
    pub fn new(
        raw: BTreeMap<AgentId, Vec<(OutcomeId, OutcomeId)>>,
        profile: &PreferenceProfile,
    ) -> Result<Self> {
        let mut violations = Vec::new();
        let known: BTreeSet<&OutcomeId> = profile.outcomes.iter().collect();
        let mut claimed: BTreeMap<(OutcomeId, OutcomeId), AgentId> = BTreeMap::new();
        let mut by_agent: BTreeMap<AgentId, BTreeSet<(OutcomeId, OutcomeId)>> = BTreeMap::new();

        for (agent, pairs) in raw {
            if !profile.rankings.contains_key(&agent) {
                violations.push(violation(
                    agent.as_str(),
                    "rights-known-agent",
                    "rights holder has no ranking in the profile",
                ));
                continue;
            }
            for (a, b) in pairs {
                if a == b {
                    violations.push(violation(
                        agent.as_str(),
                        "rights-distinct",
                        format!("decisive pair repeats outcome `{}`", a),
                    ));
                    continue;
                }
                for o in [&a, &b] {
                    if !known.contains(o) {
                        violations.push(violation(
                            o.as_str(),
                            "rights-known-outcome",
                            "decisive pair references an undeclared outcome",
                        ));
                    }
                }
                let pair = if a <= b { (a, b) } else { (b, a) };
                match claimed.get(&pair) {
                    Some(holder) if *holder != agent => violations.push(violation(
                        format!("{}/{}", pair.0, pair.1),
                        "rights-exclusive",
                        format!("pair is decisive for both `{}` and `{}`", holder, agent),
                    )),
                    _ => {
                        claimed.insert(pair.clone(), agent.clone());
                        by_agent.entry(agent.clone()).or_default().insert(pair);
                    }
                }
            }
        }

        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        Ok(RightsAssignment { by_agent })
    }

    pub fn empty() -> Self {
        RightsAssignment {
            by_agent: BTreeMap::new(),
        }
    }
}

fn violation(element: impl Into<String>, rule: &str, detail: impl Into<String>) -> Violation {
    Violation {
        element: element.into(),
        rule: rule.to_string(),
        detail: detail.into(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    outcomes: Vec<OutcomeId>,
    rankings: BTreeMap<AgentId, Vec<OutcomeId>>,
    rights: BTreeMap<AgentId, Vec<(OutcomeId, OutcomeId)>>,
}

/// Parses the JSON profile format: `outcomes`, `rankings` (agent -> ordered
/// array, best first) and `rights` (agent -> array of outcome pairs).
pub fn load_profile(text: &str) -> Result<(PreferenceProfile, RightsAssignment)> {
    let doc: ProfileDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let profile = PreferenceProfile::new(doc.outcomes, doc.rankings)?;
    let rights = RightsAssignment::new(doc.rights, &profile)?;
    Ok((profile, rights))
}

/// Why a social ranking asserts one outcome over another.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Right(AgentId),
    Pareto,
    Transitivity,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Right(agent) => write!(f, "right of {}", agent),
            Provenance::Pareto => f.write_str("pareto"),
            Provenance::Transitivity => f.write_str("transitivity"),
        }
    }
}

/// An asserted strict social preference with its provenance tags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaggedEdge {
    pub from: OutcomeId,
    pub to: OutcomeId,
    pub provenance: Vec<Provenance>,
}

impl fmt::Display for TaggedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tags = self
            .provenance
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        write!(f, "{} > {} [{}]", self.from, self.to, tags)
    }
}

/// A set of ordered preference pairs, each carrying at least one tag.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SocialRelation {
    edges: BTreeMap<(OutcomeId, OutcomeId), BTreeSet<Provenance>>,
}

impl SocialRelation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, from: OutcomeId, to: OutcomeId, tag: Provenance) {
        self.edges.entry((from, to)).or_default().insert(tag);
    }

    pub fn contains(&self, from: &OutcomeId, to: &OutcomeId) -> bool {
        self.edges.contains_key(&(from.clone(), to.clone()))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn merge(&mut self, other: &SocialRelation) {
        for ((from, to), tags) in &other.edges {
            for tag in tags {
                self.insert(from.clone(), to.clone(), tag.clone());
            }
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = TaggedEdge> + '_ {
        self.edges.iter().map(|((from, to), tags)| TaggedEdge {
            from: from.clone(),
            to: to.clone(),
            provenance: tags.iter().cloned().collect(),
        })
    }

    pub fn tagged(&self, from: &OutcomeId, to: &OutcomeId) -> Option<TaggedEdge> {
        self.edges
            .get(&(from.clone(), to.clone()))
            .map(|tags| TaggedEdge {
                from: from.clone(),
                to: to.clone(),
                provenance: tags.iter().cloned().collect(),
            })
    }

    pub fn edges_from(&self, from: &OutcomeId) -> Vec<TaggedEdge> {
        self.edges().filter(|e| e.from == *from).collect()
    }

    pub fn edges_into(&self, to: &OutcomeId) -> Vec<TaggedEdge> {
        self.edges().filter(|e| e.to == *to).collect()
    }

    pub fn has_self_loop(&self) -> bool {
        self.edges.keys().any(|(a, b)| a == b)
    }

    /// Fixpoint closure under transitivity; derived edges are tagged
    /// `Transitivity`, existing edges keep their tags.
    pub fn transitive_closure(&self) -> SocialRelation {
        let mut rel = self.clone();
        loop {
            let mut additions = Vec::new();
            for (a, b) in rel.edges.keys() {
                for (b2, c) in rel.edges.keys() {
                    if b == b2 && !rel.edges.contains_key(&(a.clone(), c.clone())) {
                        additions.push((a.clone(), c.clone()));
                    }
                }
            }
            if additions.is_empty() {
                break;
            }
            for (a, c) in additions {
                rel.insert(a, c, Provenance::Transitivity);
            }
        }
        rel
    }

    /// Outcomes no distinct outcome is preferred over, sorted by id.
    pub fn maximal(&self, outcomes: &[OutcomeId]) -> Vec<OutcomeId> {
        let mut out: Vec<OutcomeId> = outcomes
            .iter()
            .filter(|x| !self.edges.keys().any(|(from, to)| to == *x && from != *x))
            .cloned()
            .collect();
        out.sort();
        out
    }
}

/// For each decisive pair, the edge ordered by the right-holder's ranking.
pub fn rights_edges(
    profile: &PreferenceProfile,
    rights: &RightsAssignment,
) -> Result<SocialRelation> {
    let mut rel = SocialRelation::new();
    for (agent, pairs) in &rights.by_agent {
        let rank = profile.rank_map(agent)?;
        for (a, b) in pairs {
            let ra = *rank
                .get(a)
                .ok_or_else(|| Error::UnknownOutcome(a.to_string()))?;
            let rb = *rank
                .get(b)
                .ok_or_else(|| Error::UnknownOutcome(b.to_string()))?;
            let (top, bottom) = if ra < rb { (a, b) } else { (b, a) };
            rel.insert(
                top.clone(),
                bottom.clone(),
                Provenance::Right(agent.clone()),
            );
        }
    }
    Ok(rel)
}

/// Pairs every agent ranks the same way.
pub fn pareto_edges(profile: &PreferenceProfile) -> Result<SocialRelation> {
    let ranks: Vec<BTreeMap<&OutcomeId, usize>> = profile
        .agents()
        .map(|a| profile.rank_map(a))
        .collect::<Result<_>>()?;
    let mut rel = SocialRelation::new();
    for x in &profile.outcomes {
        for y in &profile.outcomes {
            if x == y {
                continue;
            }
            let unanimous = ranks.iter().all(|r| match (r.get(x), r.get(y)) {
                (Some(rx), Some(ry)) => rx < ry,
                _ => false,
            });
            if unanimous {
                rel.insert(x.clone(), y.clone(), Provenance::Pareto);
            }
        }
    }
    Ok(rel)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParadoxCycle {
    /// Outcomes along the cycle; the last edge returns to the first entry.
    pub outcomes: Vec<OutcomeId>,
    pub edges: Vec<TaggedEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParetoInferiorFinding {
    /// The outcome a rights-respecting planner would select.
    pub choice: OutcomeId,
    pub dominated_by: OutcomeId,
    pub dominating_edge: TaggedEdge,
    /// How the planner's relation ranks the choice above the rest.
    pub support: Vec<TaggedEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParadoxReport {
    pub cycle: Option<ParadoxCycle>,
    pub pareto_inferior: Option<ParetoInferiorFinding>,
}

impl ParadoxReport {
    pub fn is_clean(&self) -> bool {
        self.cycle.is_none() && self.pareto_inferior.is_none()
    }
}

/// Shortest cycle through the lexicographically least outcome that lies on
/// one, with ties broken by the lexicographically least outcome sequence.
/// Works on base edges; pass a relation without transitivity padding.
fn find_cycle(rel: &SocialRelation) -> Option<ParadoxCycle> {
    let closure = rel.transitive_closure();
    let start = closure
        .edges
        .keys()
        .find(|(a, b)| a == b)
        .map(|(a, _)| a.clone())?;

    let mut adjacency: BTreeMap<&OutcomeId, Vec<&OutcomeId>> = BTreeMap::new();
    for (from, to) in rel.edges.keys() {
        adjacency.entry(from).or_default().push(to);
    }

    // BFS from `start`; first discovery yields the shortest, lexicographically
    // least vertex path.
    let mut paths: BTreeMap<&OutcomeId, Vec<OutcomeId>> = BTreeMap::new();
    paths.insert(&start, vec![start.clone()]);
    let mut queue = VecDeque::from([&start]);
    while let Some(current) = queue.pop_front() {
        let path = paths[current].clone();
        for next in adjacency.get(current).into_iter().flatten() {
            if !paths.contains_key(*next) {
                let mut next_path = path.clone();
                next_path.push((*next).clone());
                paths.insert(next, next_path);
                queue.push_back(next);
            }
        }
    }

    // Close the cycle along the best edge back into `start`.
    let outcomes = rel
        .edges
        .keys()
        .filter(|(_, to)| *to == start)
        .filter_map(|(from, _)| paths.get(from))
        .min_by(|a, b| (a.len(), *a).cmp(&(b.len(), *b)))?
        .clone();

    let mut edges = Vec::new();
    for i in 0..outcomes.len() {
        let from = &outcomes[i];
        let to = &outcomes[(i + 1) % outcomes.len()];
        edges.push(rel.tagged(from, to).expect("cycle follows relation edges"));
    }
    Some(ParadoxCycle { outcomes, edges })
}

/// The planner's relation: rights first, then Pareto edges that do not
/// contradict the rights closure, then transitivity. Returned as (base,
/// transitive closure); both have the same maximal elements.
fn rights_first_relation(
    profile: &PreferenceProfile,
    rights: &RightsAssignment,
) -> Result<(SocialRelation, SocialRelation)> {
    let rights_rel = rights_edges(profile, rights)?;
    let rights_closure = rights_rel.transitive_closure();
    let mut base = rights_rel;
    for edge in pareto_edges(profile)?.edges() {
        if !rights_closure.contains(&edge.to, &edge.from) {
            base.insert(edge.from, edge.to, Provenance::Pareto);
        }
    }
    let closed = base.transitive_closure();
    Ok((base, closed))
}

/// Builds rights + Pareto edges, closes under transitivity, and reports any
/// preference cycle plus any Pareto-dominated rights-first choice.
pub fn detect_paradox(
    profile: &PreferenceProfile,
    rights: &RightsAssignment,
) -> Result<ParadoxReport> {
    let rights_rel = rights_edges(profile, rights)?;
    let pareto = pareto_edges(profile)?;
    let mut union = rights_rel;
    union.merge(&pareto);

    let cycle = if union.transitive_closure().has_self_loop() {
        find_cycle(&union)
    } else {
        None
    };

    let (_, closed) = rights_first_relation(profile, rights)?;
    let maximal = closed.maximal(&profile.outcomes);
    let pareto_inferior = maximal.first().and_then(|choice| {
        let dominated_by = pareto
            .edges_into(choice)
            .into_iter()
            .map(|e| e.from)
            .min()?;
        let dominating_edge = pareto.tagged(&dominated_by, choice)?;
        Some(ParetoInferiorFinding {
            choice: choice.clone(),
            dominated_by,
            dominating_edge,
            support: closed.edges_from(choice),
        })
    });

    Ok(ParadoxReport {
        cycle,
        pareto_inferior,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChoicePolicy {
    RightsFirst,
    ParetoFirst,
}

impl FromStr for ChoicePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rights-first" => Ok(ChoicePolicy::RightsFirst),
            "pareto-first" => Ok(ChoicePolicy::ParetoFirst),
            other => Err(Error::UnknownPolicy(other.to_string())),
        }
    }
}

impl fmt::Display for ChoicePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChoicePolicy::RightsFirst => "rights-first",
            ChoicePolicy::ParetoFirst => "pareto-first",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChoiceReport {
    pub policy: ChoicePolicy,
    pub outcome: OutcomeId,
    /// Set when some outcome Pareto-dominates the choice.
    pub pareto_dominated_by: Option<OutcomeId>,
    /// Rights the selecting relation asserts the reverse of.
    pub violated_rights: Vec<TaggedEdge>,
    /// Rights pointing into the chosen outcome that went unexercised.
    pub overridden_rights: Vec<TaggedEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "result")]
pub enum ChoiceResult {
    Chosen(ChoiceReport),
    /// The selecting relation leaves no undominated outcome.
    NoMaximal {
        cycle: Vec<OutcomeId>,
    },
}

/// Selects an outcome under the given policy, breaking ties by
/// lexicographically least outcome id.
pub fn choose(
    profile: &PreferenceProfile,
    rights: &RightsAssignment,
    policy: ChoicePolicy,
) -> Result<ChoiceResult> {
    match policy {
        ChoicePolicy::RightsFirst => {
            let (base, closed) = rights_first_relation(profile, rights)?;
            let maximal = closed.maximal(&profile.outcomes);
            let Some(outcome) = maximal.first() else {
                let cycle = find_cycle(&base).expect("no maximal element implies a cycle");
                return Ok(ChoiceResult::NoMaximal {
                    cycle: cycle.outcomes,
                });
            };
            let pareto = pareto_edges(profile)?;
            let pareto_dominated_by = pareto.edges_into(outcome).into_iter().map(|e| e.from).min();
            Ok(ChoiceResult::Chosen(ChoiceReport {
                policy,
                outcome: outcome.clone(),
                pareto_dominated_by,
                violated_rights: Vec::new(),
                overridden_rights: Vec::new(),
            }))
        }
        ChoicePolicy::ParetoFirst => {
            let pareto = pareto_edges(profile)?;
            let maximal = pareto.maximal(&profile.outcomes);
            let outcome = maximal
                .first()
                .expect("a unanimity relation over a non-empty outcome set has a maximal element")
                .clone();
            let rights_rel = rights_edges(profile, rights)?;
            let violated_rights = rights_rel
                .edges()
                .filter(|e| pareto.contains(&e.to, &e.from))
                .collect();
            let overridden_rights = rights_rel.edges().filter(|e| e.to == outcome).collect();
            Ok(ChoiceResult::Chosen(ChoiceReport {
                policy,
                outcome,
                pareto_dominated_by: None,
                violated_rights,
                overridden_rights,
            }))
        }
    }
}
