//! Command-line front end: loads scenario/game/profile files, runs the
//! requested analysis and prints a deterministic text or JSON report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use capcalc::engine;
use capcalc::error::{Error, ErrorCategory};
use capcalc::externality::{self, FactorizationViolation};
use capcalc::game::{self, NormalFormGame, Player};
use capcalc::paradox::{self, ChoicePolicy, ChoiceResult};
use capcalc::pivot::{self, TieQuery};
use capcalc::report::{InputDigest, Report};
use capcalc::scenario::{load_scenario, AgentId, Scenario, StateId};
use capcalc::Aggregator;

#[derive(Parser)]
#[command(
    name = "capcalc",
    version,
    about = "Capability-calculus analysis over finite world models"
)]
struct Cli {
    /// Output format of the report.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Local value v and capability value V of an agent at a state.
    Value {
        scenario: String,
        agent: String,
        state: String,
        /// Socially provided procedures to include, repeatable.
        #[arg(long = "with", value_name = "PROCEDURE")]
        with: Vec<String>,
    },
    /// Gain an agent draws from one procedure.
    Gain {
        scenario: String,
        agent: String,
        state: String,
        procedure: String,
    },
    /// Compare two procedures across all agents under an aggregator.
    Compare {
        scenario: String,
        /// JSON file mapping each agent to her current state.
        origins: String,
        p: String,
        q: String,
        #[arg(long)]
        aggregator: String,
    },
    /// Check the independence condition (and factorization, when declared).
    Independence { scenario: String },
    /// Pure Nash equilibria and dominant strategies of a bimatrix game.
    Equilibrium { game: String },
    /// Rights/Pareto analysis of a preference profile.
    Paradox {
        profile: String,
        #[arg(long, default_value = "rights-first")]
        policy: String,
    },
    /// Tie probability for a k-k split and the decisions built on it.
    Pivot {
        #[arg(long)]
        k: u64,
        /// Harm to society if the bad alternative wins.
        #[arg(long)]
        h: Option<f64>,
        /// Also compute the exact rational probability.
        #[arg(long)]
        exact: bool,
    },
}

enum CliError {
    Io { path: String, message: String },
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Lib(e) => match e.category() {
                ErrorCategory::Load => 2,
                ErrorCategory::UnknownName => 3,
                ErrorCategory::Domain => 4,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Io { path, message } => format!("failed to read `{}`: {}", path, message),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((report, text)) => {
            match cli.format {
                Format::Text => print!("{}", text),
                Format::Json => println!("{}", report.to_json()),
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn read_input(path: &str) -> Result<(String, InputDigest), CliError> {
    let contents = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    let digest = InputDigest::of(path, contents.as_bytes());
    Ok((contents, digest))
}

fn load_scenario_file(path: &str) -> Result<(Scenario, InputDigest), CliError> {
    let (text, digest) = read_input(path)?;
    Ok((load_scenario(&text)?, digest))
}

fn num(v: f64) -> String {
    format!("{}", v)
}

fn path_line(digest: &InputDigest) -> String {
    format!("input: {} sha256={}", digest.path, digest.sha256)
}

fn run(command: &Command) -> Result<(Report, String), CliError> {
    match command {
        Command::Value {
            scenario,
            agent,
            state,
            with,
        } => cmd_value(scenario, agent, state, with),
        Command::Gain {
            scenario,
            agent,
            state,
            procedure,
        } => cmd_gain(scenario, agent, state, procedure),
        Command::Compare {
            scenario,
            origins,
            p,
            q,
            aggregator,
        } => cmd_compare(scenario, origins, p, q, aggregator),
        Command::Independence { scenario } => cmd_independence(scenario),
        Command::Equilibrium { game } => cmd_equilibrium(game),
        Command::Paradox { profile, policy } => cmd_paradox(profile, policy),
        Command::Pivot { k, h, exact } => cmd_pivot(*k, *h, *exact),
    }
}

fn cmd_value(
    path: &str,
    agent: &str,
    state: &str,
    with: &[String],
) -> Result<(Report, String), CliError> {
    let (scenario, digest) = load_scenario_file(path)?;
    let agent = AgentId::new(agent);
    let origin = StateId::new(state);
    let extras: BTreeSet<String> = with.iter().cloned().collect();

    let local = engine::local_value(&scenario, &agent, &origin)?;
    let reach = engine::reachable(&scenario, &agent, &origin, &extras)?;
    let cv = engine::capability_value(&scenario, &agent, &origin, &extras)?;
    let witness = reach.witness[&cv.argmax].clone();

    let mut text = format!("value analysis for agent `{}` at `{}`\n", agent, origin);
    text.push_str(&path_line(&digest));
    text.push('\n');
    if !extras.is_empty() {
        let list: Vec<&str> = extras.iter().map(String::as_str).collect();
        writeln!(text, "extra procedures: {}", list.join(", ")).unwrap();
    }
    writeln!(text, "v({}, {}) = {}", agent, origin, num(local)).unwrap();
    writeln!(text, "V({}, {}) = {}", agent, origin, num(cv.value)).unwrap();
    writeln!(text, "argmax state: {}", cv.argmax).unwrap();
    if witness.is_empty() {
        text.push_str("witness path: (stay)\n");
    } else {
        writeln!(text, "witness path: {}", witness.join(" -> ")).unwrap();
    }

    let findings = json!({
        "agent": agent,
        "origin": origin,
        "extra_procedures": extras,
        "local_value": local,
        "capability_value": cv.value,
        "argmax_state": cv.argmax,
        "witness_path": witness,
    });
    Ok((Report::new("value", vec![digest], findings), text))
}

fn cmd_gain(
    path: &str,
    agent: &str,
    state: &str,
    procedure: &str,
) -> Result<(Report, String), CliError> {
    let (scenario, digest) = load_scenario_file(path)?;
    let report = engine::gain(
        &scenario,
        &AgentId::new(agent),
        &StateId::new(state),
        procedure,
    )?;

    let mut text = format!(
        "gain analysis for agent `{}` at `{}`\n",
        report.agent, report.origin
    );
    text.push_str(&path_line(&digest));
    text.push('\n');
    writeln!(text, "procedure: {}", report.procedure).unwrap();
    writeln!(text, "V without = {}", num(report.value_before)).unwrap();
    writeln!(text, "V with = {}", num(report.value_after)).unwrap();
    writeln!(text, "gain = {}", num(report.gain)).unwrap();

    let findings = serde_json::to_value(&report).expect("serializable report");
    Ok((Report::new("gain", vec![digest], findings), text))
}

fn cmd_compare(
    scenario_path: &str,
    origins_path: &str,
    p: &str,
    q: &str,
    aggregator: &str,
) -> Result<(Report, String), CliError> {
    let (scenario, scenario_digest) = load_scenario_file(scenario_path)?;
    let (origins_text, origins_digest) = read_input(origins_path)?;
    let raw: BTreeMap<String, String> =
        serde_json::from_str(&origins_text).map_err(|e| Error::Parse(e.to_string()))?;
    let origins: BTreeMap<AgentId, StateId> = raw
        .into_iter()
        .map(|(a, s)| (AgentId::new(a), StateId::new(s)))
        .collect();
    let aggregator = Aggregator::from_str(aggregator)?;
    let report = engine::compare_procedures(&scenario, &origins, p, q, aggregator)?;

    let mut text = format!("procedure comparison under {}\n", aggregator);
    text.push_str(&path_line(&scenario_digest));
    text.push('\n');
    text.push_str(&path_line(&origins_digest));
    text.push('\n');
    for (first, second) in report.first.gains.iter().zip(&report.second.gains) {
        writeln!(
            text,
            "agent {}: gain({}) = {}, gain({}) = {}",
            first.agent,
            report.first.procedure,
            num(first.gain),
            report.second.procedure,
            num(second.gain)
        )
        .unwrap();
    }
    writeln!(
        text,
        "score({}) = {}",
        report.first.procedure,
        num(report.first.score)
    )
    .unwrap();
    writeln!(
        text,
        "score({}) = {}",
        report.second.procedure,
        num(report.second.score)
    )
    .unwrap();
    match &report.winner {
        Some(winner) => writeln!(text, "winner: {}", winner).unwrap(),
        None => text.push_str("winner: tie\n"),
    }
    for half in [&report.first, &report.second] {
        if half.beneficiaries.is_empty() {
            writeln!(text, "beneficiaries of {}: (none)", half.procedure).unwrap();
        } else {
            let list: Vec<&str> = half.beneficiaries.iter().map(|a| a.as_str()).collect();
            writeln!(
                text,
                "beneficiaries of {}: {}",
                half.procedure,
                list.join(", ")
            )
            .unwrap();
        }
    }

    let findings = serde_json::to_value(&report).expect("serializable report");
    Ok((
        Report::new("compare", vec![scenario_digest, origins_digest], findings),
        text,
    ))
}

fn cmd_independence(path: &str) -> Result<(Report, String), CliError> {
    let (scenario, digest) = load_scenario_file(path)?;
    let verdict = externality::check_independence(&scenario);

    let mut text = String::from("independence analysis\n");
    text.push_str(&path_line(&digest));
    text.push('\n');
    if verdict.holds {
        text.push_str("independence: holds\n");
    } else {
        writeln!(
            text,
            "independence: violated, {} record(s)",
            verdict.violations.len()
        )
        .unwrap();
        for record in &verdict.violations {
            let before = scenario.value(&record.affected, &record.state)?;
            writeln!(
                text,
                "- `{}` by {} at {}: {} {} -> {} (delta {}, {})",
                record.capability,
                record.actor,
                record.state,
                record.affected,
                num(before),
                num(before + record.delta),
                num(record.delta),
                match record.sign {
                    externality::Sign::Positive => "positive",
                    externality::Sign::Negative => "negative",
                    externality::Sign::None => "none",
                }
            )
            .unwrap();
        }
    }

    let factorization = if scenario.factor_spec.is_some() {
        let verdict = externality::check_factorization(&scenario)?;
        if verdict.holds {
            text.push_str("factorization: holds\n");
        } else {
            writeln!(
                text,
                "factorization: violated, {} record(s)",
                verdict.violations.len()
            )
            .unwrap();
            for violation in &verdict.violations {
                match violation {
                    FactorizationViolation::ValueCoupled {
                        agent,
                        state_a,
                        state_b,
                        value_a,
                        value_b,
                    } => writeln!(
                        text,
                        "- value of {} differs between {} and {} ({} vs {})",
                        agent,
                        state_a,
                        state_b,
                        num(*value_a),
                        num(*value_b)
                    )
                    .unwrap(),
                    FactorizationViolation::ForeignCoordinateMove {
                        capability,
                        owner,
                        from,
                        to,
                        coordinate_of,
                    } => writeln!(
                        text,
                        "- `{}` by {} moves the coordinate of {} ({} -> {})",
                        capability, owner, coordinate_of, from, to
                    )
                    .unwrap(),
                }
            }
        }
        Some(verdict)
    } else {
        None
    };

    let findings = json!({
        "independence": verdict,
        "factorization": factorization,
    });
    Ok((Report::new("independence", vec![digest], findings), text))
}

fn cmd_equilibrium(path: &str) -> Result<(Report, String), CliError> {
    let (text_in, digest) = read_input(path)?;
    let game = NormalFormGame::load(&text_in)?;
    let equilibria = game::pure_nash(&game);
    let dominant_row = game::dominant_strategies(&game, Player::Row);
    let dominant_col = game::dominant_strategies(&game, Player::Col);

    let mut text = String::from("equilibrium analysis\n");
    text.push_str(&path_line(&digest));
    text.push('\n');
    writeln!(text, "rows: {}", game.row_strategies().join(", ")).unwrap();
    writeln!(text, "cols: {}", game.col_strategies().join(", ")).unwrap();
    if equilibria.profiles.is_empty() {
        text.push_str("pure Nash equilibria: (none)\n");
    } else {
        let list: Vec<String> = equilibria
            .profiles
            .iter()
            .map(|(r, c)| format!("({}, {})", r, c))
            .collect();
        writeln!(text, "pure Nash equilibria: {}", list.join("; ")).unwrap();
    }
    for (label, dominant) in [("row", &dominant_row), ("col", &dominant_col)] {
        if dominant.is_empty() {
            writeln!(text, "dominant strategies ({}): (none)", label).unwrap();
        } else {
            let list: Vec<String> = dominant
                .iter()
                .map(|(name, kind)| {
                    format!(
                        "{} ({})",
                        name,
                        match kind {
                            game::Dominance::Weak => "weak",
                            game::Dominance::Strict => "strict",
                        }
                    )
                })
                .collect();
            writeln!(text, "dominant strategies ({}): {}", label, list.join(", ")).unwrap();
        }
    }

    let findings = json!({
        "rows": game.row_strategies(),
        "cols": game.col_strategies(),
        "equilibria": equilibria,
        "dominant_row": dominant_row,
        "dominant_col": dominant_col,
    });
    Ok((Report::new("equilibrium", vec![digest], findings), text))
}

fn cmd_paradox(path: &str, policy: &str) -> Result<(Report, String), CliError> {
    let (text_in, digest) = read_input(path)?;
    let (profile, rights) = paradox::load_profile(&text_in)?;
    let policy = ChoicePolicy::from_str(policy)?;
    let report = paradox::detect_paradox(&profile, &rights)?;
    let choice = paradox::choose(&profile, &rights, policy)?;

    let mut text = format!("paradox analysis under {}\n", policy);
    text.push_str(&path_line(&digest));
    text.push('\n');

    let rights_rel = paradox::rights_edges(&profile, &rights)?;
    let pareto_rel = paradox::pareto_edges(&profile)?;
    for (label, rel) in [("rights edges", &rights_rel), ("pareto edges", &pareto_rel)] {
        if rel.is_empty() {
            writeln!(text, "{}: (none)", label).unwrap();
        } else {
            let list: Vec<String> = rel.edges().map(|e| e.to_string()).collect();
            writeln!(text, "{}: {}", label, list.join("; ")).unwrap();
        }
    }

    match &report.cycle {
        None => text.push_str("cycle: (none)\n"),
        Some(cycle) => {
            let mut around: Vec<String> = cycle.outcomes.iter().map(|o| o.to_string()).collect();
            around.push(cycle.outcomes[0].to_string());
            writeln!(text, "cycle: {}", around.join(" > ")).unwrap();
            for edge in &cycle.edges {
                writeln!(text, "  edge {}", edge).unwrap();
            }
        }
    }
    match &report.pareto_inferior {
        None => text.push_str("pareto-inferior: (none)\n"),
        Some(finding) => writeln!(
            text,
            "pareto-inferior: rights-first choice `{}` is dominated by `{}`",
            finding.choice, finding.dominated_by
        )
        .unwrap(),
    }
    if report.is_clean() {
        text.push_str("verdict: clean\n");
    }

    match &choice {
        ChoiceResult::Chosen(chosen) => {
            writeln!(text, "choice ({}): {}", chosen.policy, chosen.outcome).unwrap();
            if let Some(dominator) = &chosen.pareto_dominated_by {
                writeln!(text, "  pareto-dominated by: {}", dominator).unwrap();
            }
            if !chosen.violated_rights.is_empty() {
                let list: Vec<String> = chosen
                    .violated_rights
                    .iter()
                    .map(|e| e.to_string())
                    .collect();
                writeln!(text, "  violated rights: {}", list.join("; ")).unwrap();
            }
            if !chosen.overridden_rights.is_empty() {
                let list: Vec<String> = chosen
                    .overridden_rights
                    .iter()
                    .map(|e| e.to_string())
                    .collect();
                writeln!(text, "  overridden rights: {}", list.join("; ")).unwrap();
            }
        }
        ChoiceResult::NoMaximal { cycle } => {
            let list: Vec<String> = cycle.iter().map(|o| o.to_string()).collect();
            writeln!(
                text,
                "choice ({}): none, the relation cycles through {}",
                policy,
                list.join(" > ")
            )
            .unwrap();
        }
    }

    let findings = json!({
        "paradox": report,
        "choice": choice,
    });
    Ok((Report::new("paradox", vec![digest], findings), text))
}

fn cmd_pivot(k: u64, h: Option<f64>, exact: bool) -> Result<(Report, String), CliError> {
    let query = TieQuery::from_k(k)?;
    let log_tie = pivot::tie_probability_log(k);
    let bound = pivot::bound_report(k);

    let mut text = format!(
        "pivot analysis for k = {} ({} other voters)\n",
        k,
        query.electorate()
    );

    let exact_string = if exact {
        let p = pivot::tie_probability_exact(k)?;
        let rendered = p.to_string();
        writeln!(text, "exact tie probability = {}", rendered).unwrap();
        Some(rendered)
    } else {
        None
    };

    writeln!(text, "ln P(tie) = {}", num(log_tie)).unwrap();
    writeln!(text, "P(tie) ~= {}", num(log_tie.exp())).unwrap();
    writeln!(
        text,
        "bound (k/2)*ln(0.75) = {}: {} (margin {} ln units, {} log10 units)",
        num(bound.log_bound),
        if bound.holds { "holds" } else { "fails" },
        num(bound.margin_ln),
        num(bound.margin_log10)
    )
    .unwrap();

    let harm = match h {
        Some(h) => {
            let report = pivot::expected_harm(&query, h)?;
            writeln!(
                text,
                "expected harm = {} (h = {}, ln = {})",
                num(report.expected),
                num(h),
                num(report.log_expected)
            )
            .unwrap();
            if report.expected == 0.0 && h > 0.0 {
                text.push_str(
                    "note: the product underflows; any positive private gain exceeds it\n",
                );
            }
            Some(report)
        }
        None => None,
    };

    let findings = json!({
        "k": k,
        "electorate": query.electorate(),
        "exact": exact_string,
        "log_tie": log_tie,
        "bound": bound,
        "expected_harm": harm,
    });
    Ok((Report::new("pivot", Vec::new(), findings), text))
}
