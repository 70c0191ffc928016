//! Two-player finite normal-form games: pure-strategy Nash equilibria, weak
//! and strict dominance, and the penalty level needed to deter a strategy.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{AgentId, Scenario, StateId};

/// A bimatrix game. Payoffs are stored row-major, one `(row, col)` payoff
/// pair per cell; the file format mirrors this layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormGame {
    row_strategies: Vec<String>,
    col_strategies: Vec<String>,
    payoffs: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Row,
    Col,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dominance {
    Weak,
    Strict,
}

/// Pure-strategy Nash equilibria, in row-major order of the profiles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumSet {
    pub profiles: Vec<(String, String)>,
}

impl EquilibriumSet {
    pub fn contains(&self, row: &str, col: &str) -> bool {
        self.profiles.iter().any(|(r, c)| r == row && c == col)
    }
}

/// Smallest uniform penalty on a row that deters it; `open` means the
/// infimum itself is not enough and any penalty strictly above it is.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterrenceReport {
    pub deterred: String,
    pub target: (String, String),
    pub threshold: f64,
    pub open: bool,
}

impl NormalFormGame {
    pub fn new(
        row_strategies: Vec<String>,
        col_strategies: Vec<String>,
        payoffs: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let game = NormalFormGame {
            row_strategies,
            col_strategies,
            payoffs: payoffs.into_iter().map(|(r, c)| [r, c]).collect(),
        };
        game.validate()?;
        Ok(game)
    }

    /// Parses the JSON game format and validates the dimensions.
    pub fn load(text: &str) -> Result<Self> {
        let game: NormalFormGame =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        game.validate()?;
        Ok(game)
    }

    fn validate(&self) -> Result<()> {
        if self.row_strategies.is_empty() || self.col_strategies.is_empty() {
            return Err(Error::Domain(
                "each player needs at least one strategy".to_string(),
            ));
        }
        for side in [&self.row_strategies, &self.col_strategies] {
            let unique: BTreeSet<&String> = side.iter().collect();
            if unique.len() != side.len() {
                return Err(Error::Domain("duplicate strategy name".to_string()));
            }
        }
        let expected = self.row_strategies.len() * self.col_strategies.len();
        if self.payoffs.len() != expected {
            return Err(Error::Domain(format!(
                "payoff matrix has {} cells, expected {}",
                self.payoffs.len(),
                expected
            )));
        }
        if self.payoffs.iter().flatten().any(|p| !p.is_finite()) {
            return Err(Error::Domain("payoffs must be finite".to_string()));
        }
        Ok(())
    }

    pub fn row_strategies(&self) -> &[String] {
        &self.row_strategies
    }

    pub fn col_strategies(&self) -> &[String] {
        &self.col_strategies
    }

    pub fn payoff(&self, row: usize, col: usize) -> (f64, f64) {
        let cell = self.payoffs[row * self.col_strategies.len() + col];
        (cell[0], cell[1])
    }

    fn row_index(&self, name: &str) -> Result<usize> {
        self.row_strategies
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    fn col_index(&self, name: &str) -> Result<usize> {
        self.col_strategies
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game serialization cannot fail")
    }
}

/// All pure-strategy Nash equilibria: profiles where neither player can
/// strictly improve by a unilateral deviation (ties do not disqualify).
pub fn pure_nash(game: &NormalFormGame) -> EquilibriumSet {
    let rows = game.row_strategies.len();
    let cols = game.col_strategies.len();

    let best_row_payoff: Vec<f64> = (0..cols)
        .map(|j| {
            (0..rows)
                .map(|i| game.payoff(i, j).0)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let best_col_payoff: Vec<f64> = (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| game.payoff(i, j).1)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let mut profiles = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let (r, c) = game.payoff(i, j);
            if r == best_row_payoff[j] && c == best_col_payoff[i] {
                profiles.push((
                    game.row_strategies[i].clone(),
                    game.col_strategies[j].clone(),
                ));
            }
        }
    }
    EquilibriumSet { profiles }
}

/// Strategies of `player` that weakly dominate every alternative (at least
/// as good everywhere, strictly better somewhere against each alternative),
/// flagged `Strict` when strictly better everywhere. A player with a single
/// strategy gets that strategy reported as weakly dominant by convention.
pub fn dominant_strategies(game: &NormalFormGame, player: Player) -> Vec<(String, Dominance)> {
    let (own, other) = match player {
        Player::Row => (game.row_strategies.len(), game.col_strategies.len()),
        Player::Col => (game.col_strategies.len(), game.row_strategies.len()),
    };
    let pay = |mine: usize, theirs: usize| match player {
        Player::Row => game.payoff(mine, theirs).0,
        Player::Col => game.payoff(theirs, mine).1,
    };
    let name = |mine: usize| match player {
        Player::Row => game.row_strategies[mine].clone(),
        Player::Col => game.col_strategies[mine].clone(),
    };

    if own == 1 {
        return vec![(name(0), Dominance::Weak)];
    }

    let mut out = Vec::new();
    for s in 0..own {
        let mut weak_over_all = true;
        let mut strict_over_all = true;
        for t in 0..own {
            if t == s {
                continue;
            }
            let mut ge_everywhere = true;
            let mut gt_somewhere = false;
            let mut gt_everywhere = true;
            for o in 0..other {
                let a = pay(s, o);
                let b = pay(t, o);
                if a < b {
                    ge_everywhere = false;
                }
                if a > b {
                    gt_somewhere = true;
                } else {
                    gt_everywhere = false;
                }
            }
            if !(ge_everywhere && gt_somewhere) {
                weak_over_all = false;
            }
            if !gt_everywhere {
                strict_over_all = false;
            }
        }
        if weak_over_all {
            let kind = if strict_over_all {
                Dominance::Strict
            } else {
                Dominance::Weak
            };
            out.push((name(s), kind));
        }
    }
    out
}

/// Smallest uniform penalty `d` subtracted from the row player's payoff
/// across the deterred row such that `target` becomes a pure Nash
/// equilibrium of the penalized game and the deterred row appears in none.
///
/// The target must already be an equilibrium of the game with the deterred
/// row removed. Making the target stable needs `d >=` the payoff gap in the
/// target column; knocking the deterred row out of every equilibrium needs
/// `d >` the gap in each column where the column player would answer it,
/// which is what makes the threshold open.
pub fn deterrence_threshold(
    game: &NormalFormGame,
    deterred: &str,
    target: (&str, &str),
) -> Result<DeterrenceReport> {
    let deterred_i = game.row_index(deterred)?;
    let target_i = game.row_index(target.0)?;
    let target_j = game.col_index(target.1)?;
    if target_i == deterred_i {
        return Err(Error::Domain(
            "target profile must not use the deterred strategy".to_string(),
        ));
    }

    let rows = game.row_strategies.len();
    let cols = game.col_strategies.len();

    // Equilibrium check in the reduced game (deterred row removed).
    let row_ok = (0..rows)
        .filter(|&i| i != deterred_i)
        .all(|i| game.payoff(target_i, target_j).0 >= game.payoff(i, target_j).0);
    let col_ok = (0..cols).all(|j| game.payoff(target_i, target_j).1 >= game.payoff(target_i, j).1);
    if !row_ok || !col_ok {
        return Err(Error::TargetNotEquilibrium {
            row: target.0.to_string(),
            col: target.1.to_string(),
        });
    }

    // d >= closed_gap keeps the target stable against the deterred row.
    let closed_gap = game.payoff(deterred_i, target_j).0 - game.payoff(target_i, target_j).0;

    // d > open_gap_j removes (deterred, j) from the equilibria, for every
    // column j the column player would not deviate from.
    let deterred_col_best = (0..cols)
        .map(|j| game.payoff(deterred_i, j).1)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut open_gaps = Vec::new();
    for j in 0..cols {
        if game.payoff(deterred_i, j).1 == deterred_col_best {
            let best_other = (0..rows)
                .filter(|&i| i != deterred_i)
                .map(|i| game.payoff(i, j).0)
                .fold(f64::NEG_INFINITY, f64::max);
            open_gaps.push(game.payoff(deterred_i, j).0 - best_other);
        }
    }

    let mut threshold = closed_gap.max(0.0);
    for g in &open_gaps {
        threshold = threshold.max(*g);
    }
    let open = open_gaps.contains(&threshold);

    Ok(DeterrenceReport {
        deterred: deterred.to_string(),
        target: (target.0.to_string(), target.1.to_string()),
        threshold,
        open,
    })
}

/// Builds a bimatrix game from a scenario: each player picks one of the
/// listed capabilities or passes; the row move is applied first, then the
/// column move; payoffs are the two agents' local values at the resulting
/// state. The extra strategy is always named `pass`.
pub fn game_from_scenario(
    s: &Scenario,
    row_agent: &AgentId,
    col_agent: &AgentId,
    row_caps: &[String],
    col_caps: &[String],
    origin: &StateId,
) -> Result<NormalFormGame> {
    if !s.has_state(origin) {
        return Err(Error::UnknownState(origin.to_string()));
    }
    for (agent, caps) in [(row_agent, row_caps), (col_agent, col_caps)] {
        if !s.has_agent(agent) {
            return Err(Error::UnknownAgent(agent.to_string()));
        }
        for name in caps {
            if name == "pass" {
                return Err(Error::Domain(
                    "`pass` is reserved for the built-in stay-put strategy".to_string(),
                ));
            }
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
    }

    let apply = |name: &str, state: &StateId| -> StateId {
        if name == "pass" {
            state.clone()
        } else {
            s.capability(name).expect("validated above").apply(state)
        }
    };

    let with_pass = |caps: &[String]| -> Vec<String> {
        let mut all = caps.to_vec();
        all.push("pass".to_string());
        all
    };
    let row_strategies = with_pass(row_caps);
    let col_strategies = with_pass(col_caps);

    let mut payoffs = Vec::new();
    for r in &row_strategies {
        let mid = apply(r, origin);
        for c in &col_strategies {
            let end = apply(c, &mid);
            payoffs.push((s.value(row_agent, &end)?, s.value(col_agent, &end)?));
        }
    }
    NormalFormGame::new(row_strategies, col_strategies, payoffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_scenario;

    fn sale_game() -> NormalFormGame {
        NormalFormGame::new(
            vec!["buy".into(), "no buy".into()],
            vec!["sell".into(), "no sell".into()],
            vec![(300.0, 100.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
        )
        .unwrap()
    }

    fn threat_game() -> NormalFormGame {
        NormalFormGame::new(
            vec!["buy".into(), "no buy".into(), "threaten".into()],
            vec!["give".into(), "no give".into()],
            vec![
                (300.0, 100.0),
                (0.0, 0.0),
                (0.0, 0.0),
                (0.0, 0.0),
                (900.0, -500.0),
                (0.0, -1000.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sale_game_equilibria() {
        let eq = pure_nash(&sale_game());
        assert_eq!(
            eq.profiles,
            vec![
                ("buy".to_string(), "sell".to_string()),
                ("no buy".to_string(), "no sell".to_string())
            ]
        );
    }

    #[test]
    fn threat_game_equilibria_and_dominance() {
        let game = threat_game();
        let eq = pure_nash(&game);
        assert!(eq.contains("threaten", "give"));
        assert!(!eq.contains("buy", "give"));

        let dom = dominant_strategies(&game, Player::Row);
        assert_eq!(dom, vec![("threaten".to_string(), Dominance::Weak)]);
        // For the column player, give is at least as good everywhere and
        // strictly better against buy and threaten.
        assert_eq!(
            dominant_strategies(&game, Player::Col),
            vec![("give".to_string(), Dominance::Weak)]
        );
    }

    #[test]
    fn sale_game_row_dominance_is_weak_buy() {
        // buy ties no-buy in the no-sell column and beats it in the sell
        // column, so it dominates weakly, not strictly.
        let dom = dominant_strategies(&sale_game(), Player::Row);
        assert_eq!(dom, vec![("buy".to_string(), Dominance::Weak)]);
    }

    #[test]
    fn all_zero_game_has_all_profiles_as_equilibria() {
        let game = NormalFormGame::new(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![(0.0, 0.0); 4],
        )
        .unwrap();
        assert_eq!(pure_nash(&game).profiles.len(), 4);
    }

    #[test]
    fn single_strategy_is_weakly_dominant_by_convention() {
        let game = NormalFormGame::new(vec!["only".into()], vec!["left".into()], vec![(1.0, 1.0)])
            .unwrap();
        assert_eq!(
            dominant_strategies(&game, Player::Row),
            vec![("only".to_string(), Dominance::Weak)]
        );
    }

    #[test]
    fn deterrence_on_the_threat_game() {
        let report = deterrence_threshold(&threat_game(), "threaten", ("buy", "give")).unwrap();
        assert_eq!(report.threshold, 600.0);
        assert!(report.open);
    }

    #[test]
    fn deterrence_threshold_scales_with_the_temptation() {
        let mut cells = vec![
            (300.0, 100.0),
            (0.0, 0.0),
            (0.0, 0.0),
            (0.0, 0.0),
            (1300.0, -500.0),
            (0.0, -1000.0),
        ];
        let game = NormalFormGame::new(
            vec!["buy".into(), "no buy".into(), "threaten".into()],
            vec!["give".into(), "no give".into()],
            cells.clone(),
        )
        .unwrap();
        let report = deterrence_threshold(&game, "threaten", ("buy", "give")).unwrap();
        assert_eq!(report.threshold, 1000.0);
        assert!(report.open);

        // A row that is never part of an equilibrium needs no penalty at all.
        cells[4] = (100.0, -500.0);
        cells[5] = (100.0, -1000.0);
        let harmless = NormalFormGame::new(
            vec!["buy".into(), "no buy".into(), "threaten".into()],
            vec!["give".into(), "no give".into()],
            cells,
        )
        .unwrap();
        let report = deterrence_threshold(&harmless, "threaten", ("buy", "give")).unwrap();
        assert_eq!(report.threshold, 0.0);
        assert!(!report.open);
    }

    #[test]
    fn deterrence_rejects_non_equilibrium_targets() {
        assert!(matches!(
            deterrence_threshold(&threat_game(), "threaten", ("no buy", "give")),
            Err(Error::TargetNotEquilibrium { .. })
        ));
    }

    #[test]
    fn malformed_cells_are_rejected_at_parse_time() {
        let text = r#"{
            "row_strategies": ["a"],
            "col_strategies": ["x"],
            "payoffs": [[1, 2, 3]]
        }"#;
        assert!(matches!(NormalFormGame::load(text), Err(Error::Parse(_))));
        let short = r#"{
            "row_strategies": ["a", "b"],
            "col_strategies": ["x"],
            "payoffs": [[1, 2]]
        }"#;
        assert!(matches!(NormalFormGame::load(short), Err(Error::Domain(_))));
    }

    fn sale_scenario() -> crate::scenario::Scenario {
        load_scenario(
            r#"{
                "agents": ["ravi", "sona"],
                "states": [{"id": "start"}, {"id": "bid"}, {"id": "deal"}],
                "values": {
                    "ravi": {"start": 0, "bid": 0, "deal": 300},
                    "sona": {"start": 0, "bid": 0, "deal": 100}
                },
                "capabilities": [
                    {"name": "buy", "owner": "ravi", "transitions": {"start": "bid"}},
                    {"name": "sell", "owner": "sona", "transitions": {"bid": "deal"}}
                ],
                "procedures": []
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn scenario_game_reproduces_the_sale_matrix() {
        let s = sale_scenario();
        let game = game_from_scenario(
            &s,
            &"ravi".into(),
            &"sona".into(),
            &["buy".to_string()],
            &["sell".to_string()],
            &"start".into(),
        )
        .unwrap();
        assert_eq!(game.row_strategies(), ["buy", "pass"]);
        assert_eq!(game.col_strategies(), ["sell", "pass"]);
        assert_eq!(game.payoff(0, 0), (300.0, 100.0));
        assert_eq!(game.payoff(0, 1), (0.0, 0.0));
        assert_eq!(game.payoff(1, 0), (0.0, 0.0));
        assert_eq!(game.payoff(1, 1), (0.0, 0.0));
    }

    #[test]
    fn pass_pass_cell_holds_the_origin_values() {
        let s = sale_scenario();
        let game = game_from_scenario(&s, &"ravi".into(), &"sona".into(), &[], &[], &"deal".into())
            .unwrap();
        assert_eq!(game.payoff(0, 0), (300.0, 100.0));
    }

    #[test]
    fn identity_capabilities_make_a_flat_game() {
        let s = load_scenario(
            r#"{
                "agents": ["p", "q"],
                "states": [{"id": "s"}],
                "values": {"p": {"s": 2}, "q": {"s": 3}},
                "capabilities": [{"name": "shrug", "owner": "p", "transitions": {}}],
                "procedures": []
            }"#,
        )
        .unwrap();
        let game = game_from_scenario(
            &s,
            &"p".into(),
            &"q".into(),
            &["shrug".to_string()],
            &[],
            &"s".into(),
        )
        .unwrap();
        for i in 0..2 {
            assert_eq!(game.payoff(i, 0), (2.0, 3.0));
        }
    }
}
