//! Building engine objects from a resolved scenario.

use std::path::PathBuf;

use coalform::kelly::KellySystem;
use coalform::partition::{enumerate_partitions, Coalition, Partition};
use coalform::queue::{BlockingWitness, PayoffRule, Rule, StabilityVerdict};
use coalform::QueueSystem;
use serde_json::{json, Value};

use crate::fail::{input, CliError};
use crate::scenario::{RuleArg, Scenario};

/// Largest n for which commands list every partition.
pub const MAX_LISTED_AGENTS: usize = 8;

pub fn queue_system(sc: &Scenario) -> Result<QueueSystem, CliError> {
    Ok(QueueSystem::new(sc.servers()?.to_vec(), sc.lambda()?, sc.mu)?)
}

pub fn kelly_system(sc: &Scenario) -> Result<KellySystem, CliError> {
    Ok(KellySystem::new(sc.influence()?.to_vec(), sc.eta, sc.gamma)?)
}

pub fn parse_partition(text: &str, n: usize) -> Result<Partition, CliError> {
    Ok(Partition::parse_with_n(text, n)?)
}

/// The `--partition` given, or every partition of `n` agents.
pub fn partitions(sc: &Scenario, n: usize) -> Result<Vec<Partition>, CliError> {
    match &sc.partition {
        Some(t) => Ok(vec![parse_partition(t, n)?]),
        None => Ok(enumerate_partitions(n, MAX_LISTED_AGENTS)?.collect()),
    }
}

pub fn queue_rule(r: Option<RuleArg>) -> Result<Rule, CliError> {
    match r.unwrap_or(RuleArg::Rbia) {
        RuleArg::Gbpa => Ok(Rule::Gbpa),
        RuleArg::Rbpa => Ok(Rule::Rbpa),
        RuleArg::Rbia => Ok(Rule::Rbia),
        other => Err(input(format!("rule {} applies to the kelly game only", other.name()))),
    }
}

pub fn kelly_rule(r: Option<RuleArg>) -> Result<RuleArg, CliError> {
    match r.unwrap_or(RuleArg::Ustable) {
        k @ (RuleArg::Ustable | RuleArg::Cstable) => Ok(k),
        other => Err(input(format!("rule {} applies to the queue game only", other.name()))),
    }
}

/// `--payoff`; both named rules when absent.
pub fn payoff_rules(sc: &Scenario, n: usize) -> Result<Vec<PayoffRule>, CliError> {
    let Some(text) = sc.payoff.as_deref() else {
        return Ok(vec![PayoffRule::Proportional, PayoffRule::Shapley]);
    };
    match text {
        "proportional" => Ok(vec![PayoffRule::Proportional]),
        "shapley" => Ok(vec![PayoffRule::Shapley]),
        _ => match text.strip_prefix("file:") {
            Some(path) => {
                if sc.partition.is_none() {
                    return Err(input("an explicit payoff needs --partition"));
                }
                Ok(vec![PayoffRule::Explicit(read_payoff(sc, path, n)?)])
            }
            None => Err(input(format!(
                "unknown payoff {text:?}: expected proportional, shapley or file:PATH"
            ))),
        },
    }
}

fn read_payoff(sc: &Scenario, path: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let mut p = PathBuf::from(path);
    if p.is_relative() && !p.exists() {
        if let Some(dir) = &sc.base_dir {
            p = dir.join(p);
        }
    }
    let text = std::fs::read_to_string(&p).map_err(|e| input(format!("cannot read payoff {}: {e}", p.display())))?;
    let v = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| input(format!("payoff {}: {t:?} is not a number", p.display()))))
        .collect::<Result<Vec<f64>, CliError>>()?;
    if v.len() != n {
        return Err(input(format!("payoff {} has {} entries for {n} agents", p.display(), v.len())));
    }
    Ok(v)
}

pub fn witness_text(v: &StabilityVerdict) -> Option<String> {
    v.witness.as_ref().map(|w| w.coalition.to_string())
}

pub fn witness_json(w: &BlockingWitness) -> Value {
    json!({
        "coalition": w.coalition.to_string(),
        "kind": w.kind,
        "anticipated": w.anticipated_rate,
        "prevailing": w.prevailing_worth,
    })
}

pub fn verdict_json(v: &StabilityVerdict) -> (Value, Value) {
    let verdict = Value::from(if v.stable { "stable" } else { "blocked" });
    (verdict, v.witness.as_ref().map_or(Value::Null, witness_json))
}

pub fn queue_system_json(s: &QueueSystem) -> Value {
    json!({"game": "queue", "servers": s.servers(), "lambda": s.lambda(), "mu": s.mu()})
}

pub fn kelly_system_json(s: &KellySystem) -> Value {
    json!({"game": "kelly", "influence": s.influence(), "eta": s.adamant_eta(), "gamma": s.gamma()})
}

pub fn coalition_list(cs: &[Coalition]) -> Vec<String> {
    cs.iter().map(ToString::to_string).collect()
}

/// Builds the global worker pool when `--jobs` is given.
pub fn set_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    match jobs {
        Some(0) => Err(input("--jobs must be at least 1")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Other(e.into())),
        None => Ok(()),
    }
}
