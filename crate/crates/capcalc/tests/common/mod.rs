//! Shared helpers for the integration suites: fixture loading, seeded
//! random model generators, and brute-force oracles kept independent of the
//! library's own algorithms.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::Rng;

use capcalc::scenario::{
    validate, AgentId, Capability, Scenario, SocialProcedure, StateId, ValueTable, WorldState,
};

/// Directory holding the bundled fixtures; `CAPCALC_FIXTURES` overrides the
/// default workspace location.
pub fn fixtures_dir() -> PathBuf {
    match std::env::var_os("CAPCALC_FIXTURES") {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"),
    }
}

pub fn load_fixture(name: &str) -> String {
    let path = fixtures_dir().join(name);
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read fixture {}: {}", path.display(), e))
}

pub fn load_scenario_fixture(name: &str) -> Scenario {
    capcalc::load_scenario(&load_fixture(name)).expect("bundled fixtures are valid")
}

fn random_transitions(
    rng: &mut impl Rng,
    states: &[StateId],
    edge_probability: f64,
) -> BTreeMap<StateId, StateId> {
    let mut transitions = BTreeMap::new();
    for from in states {
        if rng.gen_bool(edge_probability) {
            let to = states[rng.gen_range(0..states.len())].clone();
            transitions.insert(from.clone(), to);
        }
    }
    transitions
}

/// A small valid scenario: up to 3 agents, 6 states, 4 capabilities and
/// 2 procedures, with integer values in [-10, 10].
pub fn random_scenario(rng: &mut impl Rng) -> Scenario {
    let n_agents = rng.gen_range(1..=3);
    let n_states = rng.gen_range(1..=6);
    let agents: Vec<AgentId> = (0..n_agents)
        .map(|i| AgentId::new(format!("a{i}")))
        .collect();
    let state_ids: Vec<StateId> = (0..n_states)
        .map(|i| StateId::new(format!("s{i}")))
        .collect();
    let states: Vec<WorldState> = state_ids
        .iter()
        .map(|id| WorldState {
            id: id.clone(),
            labels: BTreeSet::new(),
        })
        .collect();

    let mut table = BTreeMap::new();
    for agent in &agents {
        let mut row = BTreeMap::new();
        for state in &state_ids {
            row.insert(state.clone(), rng.gen_range(-10..=10) as f64);
        }
        table.insert(agent.clone(), row);
    }

    let capabilities: Vec<Capability> = (0..rng.gen_range(0..=4))
        .map(|i| Capability {
            name: format!("c{i}"),
            owner: agents[rng.gen_range(0..agents.len())].clone(),
            transitions: random_transitions(rng, &state_ids, 0.5),
        })
        .collect();

    let procedures: Vec<SocialProcedure> = (0..rng.gen_range(0..=2))
        .map(|i| {
            let mut beneficiaries: BTreeSet<AgentId> = agents
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect();
            if beneficiaries.is_empty() {
                beneficiaries.insert(agents[rng.gen_range(0..agents.len())].clone());
            }
            SocialProcedure {
                name: format!("p{i}"),
                beneficiaries,
                transitions: random_transitions(rng, &state_ids, 0.5),
            }
        })
        .collect();

    let scenario = Scenario {
        agents,
        states,
        values: ValueTable(table),
        capabilities,
        procedures,
        factor_spec: None,
    };
    assert!(
        validate(&scenario).is_empty(),
        "generator produced an invalid scenario"
    );
    scenario
}

/// A factored scenario: 2-3 agents, each with 1-3 coordinate values, full
/// product state space, values depending only on the agent's own coordinate
/// and capabilities moving only that coordinate.
pub fn random_product_scenario(rng: &mut impl Rng) -> Scenario {
    let n_agents = rng.gen_range(2..=3);
    let agents: Vec<AgentId> = (0..n_agents)
        .map(|i| AgentId::new(format!("a{i}")))
        .collect();
    let coordinate_sizes: Vec<usize> = (0..n_agents).map(|_| rng.gen_range(1..=3)).collect();

    // Enumerate the full product space in lexicographic coordinate order.
    let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
    for size in &coordinate_sizes {
        tuples = tuples
            .into_iter()
            .flat_map(|prefix| {
                (0..*size).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    let state_id = |tuple: &[usize]| {
        StateId::new(
            tuple
                .iter()
                .enumerate()
                .map(|(agent, v)| format!("k{agent}v{v}"))
                .collect::<Vec<_>>()
                .join("."),
        )
    };
    let states: Vec<WorldState> = tuples
        .iter()
        .map(|t| WorldState {
            id: state_id(t),
            labels: BTreeSet::new(),
        })
        .collect();

    // Per-agent value of each own-coordinate level.
    let coordinate_values: Vec<Vec<f64>> = coordinate_sizes
        .iter()
        .map(|size| (0..*size).map(|_| rng.gen_range(-10..=10) as f64).collect())
        .collect();
    let mut table = BTreeMap::new();
    for (index, agent) in agents.iter().enumerate() {
        let mut row = BTreeMap::new();
        for tuple in &tuples {
            row.insert(state_id(tuple), coordinate_values[index][tuple[index]]);
        }
        table.insert(agent.clone(), row);
    }

    // Coordinate-local capabilities: a partial map on the owner's coordinate
    // lifted pointwise to the product space.
    let mut capabilities = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let owner_index = rng.gen_range(0..n_agents);
        let size = coordinate_sizes[owner_index];
        let mut local: BTreeMap<usize, usize> = BTreeMap::new();
        for from in 0..size {
            if rng.gen_bool(0.6) {
                local.insert(from, rng.gen_range(0..size));
            }
        }
        let mut transitions = BTreeMap::new();
        for tuple in &tuples {
            if let Some(to_coord) = local.get(&tuple[owner_index]) {
                let mut target = tuple.clone();
                target[owner_index] = *to_coord;
                transitions.insert(state_id(tuple), state_id(&target));
            }
        }
        capabilities.push(Capability {
            name: format!("c{}", capabilities.len()),
            owner: agents[owner_index].clone(),
            transitions,
        });
    }

    let scenario = Scenario {
        agents,
        states,
        values: ValueTable(table),
        capabilities,
        procedures: Vec::new(),
        factor_spec: Some(capcalc::scenario::FactorSpec {
            arity: n_agents,
            separator: ".".to_string(),
        }),
    };
    assert!(
        validate(&scenario).is_empty(),
        "generator produced an invalid scenario"
    );
    scenario
}

/// Brute-force capability value: enumerate every move sequence of length up
/// to |W| (own capabilities plus the given procedures), apply it from the
/// origin with identity completion, and maximize the local value over the
/// endpoints. Independent of the BFS path in the library; sequences are
/// enumerated by extending every length-L endpoint with every move, so each
/// of the |moves|^L compositions is applied.
pub fn brute_force_capability_value(
    s: &Scenario,
    agent: &AgentId,
    origin: &StateId,
    extra_procedures: &BTreeSet<String>,
) -> f64 {
    let states: Vec<&StateId> = s.state_ids().collect();
    let index_of = |state: &StateId| {
        states
            .iter()
            .position(|x| *x == state)
            .expect("known state")
    };
    let compile = |map: &BTreeMap<StateId, StateId>| -> Vec<usize> {
        states
            .iter()
            .enumerate()
            .map(|(i, state)| map.get(*state).map(&index_of).unwrap_or(i))
            .collect()
    };

    let mut maps: Vec<Vec<usize>> = s
        .capabilities
        .iter()
        .filter(|c| c.owner == *agent)
        .map(|c| compile(&c.transitions))
        .collect();
    for name in extra_procedures {
        let p = s.procedure(name).expect("oracle inputs resolve");
        maps.push(compile(&p.transitions));
    }

    let values: Vec<f64> = states
        .iter()
        .map(|state| s.values.get(agent, state).expect("total value table"))
        .collect();

    let mut best = values[index_of(origin)];
    let mut frontier = vec![index_of(origin)];
    if maps.is_empty() {
        return best;
    }
    for _ in 0..states.len() {
        let mut next_frontier = Vec::with_capacity(frontier.len() * maps.len());
        for &state in &frontier {
            for map in &maps {
                let next = map[state];
                best = best.max(values[next]);
                next_frontier.push(next);
            }
        }
        frontier = next_frontier;
    }
    best
}

/// Random bimatrix game up to 4x4 with integer payoffs in [-10, 10].
pub fn random_game(rng: &mut impl Rng) -> capcalc::game::NormalFormGame {
    let rows = rng.gen_range(1..=4);
    let cols = rng.gen_range(1..=4);
    let row_strategies: Vec<String> = (0..rows).map(|i| format!("r{i}")).collect();
    let col_strategies: Vec<String> = (0..cols).map(|j| format!("k{j}")).collect();
    let payoffs: Vec<(f64, f64)> = (0..rows * cols)
        .map(|_| {
            (
                rng.gen_range(-10..=10) as f64,
                rng.gen_range(-10..=10) as f64,
            )
        })
        .collect();
    capcalc::game::NormalFormGame::new(row_strategies, col_strategies, payoffs).unwrap()
}

/// Every bundled fixture, wired to the command that consumes it. Used both
/// for the determinism gate and for report-schema validation.
pub fn fixture_command_matrix() -> Vec<Vec<String>> {
    let dir = fixtures_dir();
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let strings = |args: &[&str]| args.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        strings(&["value", &path("aditi.scenario.json"), "aditi", "home"]),
        strings(&["value", &path("movie.scenario.json"), "jack", "home"]),
        strings(&["value", &path("movie.scenario.json"), "shiva", "home"]),
        strings(&[
            "gain",
            &path("aditi-far.scenario.json"),
            "aditi",
            "home",
            "bus",
        ]),
        strings(&[
            "gain",
            &path("poolbus.scenario.json"),
            "driver",
            "home",
            "bus",
        ]),
        strings(&[
            "compare",
            &path("poolbus.scenario.json"),
            &path("poolbus.origins.json"),
            "pool-pass",
            "bus",
            "--aggregator",
            "utilitarian-sum",
        ]),
        strings(&["independence", &path("aditi.scenario.json")]),
        strings(&["independence", &path("product.scenario.json")]),
        strings(&["independence", &path("snoring.scenario.json")]),
        strings(&["independence", &path("school-carry.scenario.json")]),
        strings(&["independence", &path("transfer.scenario.json")]),
        strings(&["independence", &path("car-sale.scenario.json")]),
        strings(&["equilibrium", &path("sale.game.json")]),
        strings(&["equilibrium", &path("threat.game.json")]),
        strings(&["paradox", &path("sen-lady-chatterley.profile.json")]),
        strings(&[
            "paradox",
            &path("sen-lady-chatterley.profile.json"),
            "--policy",
            "pareto-first",
        ]),
        strings(&["pivot", "--k", "2", "--exact"]),
        strings(&["pivot", "--k", "22000", "--h", "1000000000"]),
    ]
}

/// Equilibrium oracle straight from the definition: a profile is an
/// equilibrium unless some unilateral deviation strictly improves the
/// deviating player's payoff.
pub fn nash_oracle(game: &capcalc::game::NormalFormGame) -> BTreeSet<(String, String)> {
    let rows = game.row_strategies().len();
    let cols = game.col_strategies().len();
    let mut out = BTreeSet::new();
    for i in 0..rows {
        for j in 0..cols {
            let (r, c) = game.payoff(i, j);
            let row_deviates = (0..rows).any(|i2| game.payoff(i2, j).0 > r);
            let col_deviates = (0..cols).any(|j2| game.payoff(i, j2).1 > c);
            if !row_deviates && !col_deviates {
                out.insert((
                    game.row_strategies()[i].clone(),
                    game.col_strategies()[j].clone(),
                ));
            }
        }
    }
    out
}
