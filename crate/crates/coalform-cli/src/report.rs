//! `report`: one JSON document summarising a system.
//!
//! Parts whose enumeration exceeds a cap are reported as `null` rather than
//! failing the whole report.

use coalform::dynamics::{check_assumption_a1, MAX_A1_AGENTS};
use coalform::kelly::{self, MAX_NE_AGENTS, MAX_SCAN_AGENTS};
use coalform::queue::{self, PayoffRule, Rule};
use serde_json::{json, Value};

use crate::fail::CliError;
use crate::kelly_cmd;
use crate::scenario::{Game, Scenario};
use crate::system::*;
use crate::table::emit_json;

fn or_null<T: serde::Serialize>(r: coalform::Result<T>) -> Result<Value, CliError> {
    match r {
        Ok(v) => Ok(serde_json::to_value(v)?),
        Err(coalform::Error::SizeCap { .. }) => Ok(Value::Null),
        Err(e) => Err(e.into()),
    }
}

fn names(ps: &[coalform::Partition]) -> Vec<String> {
    ps.iter().map(ToString::to_string).collect()
}

pub fn report(sc: &Scenario) -> Result<(), CliError> {
    let v = match sc.game()? {
        Game::Queue => queue_report(sc)?,
        Game::Kelly => kelly_report(sc)?,
    };
    emit_json(&v, sc.out.as_deref())
}

fn queue_report(sc: &Scenario) -> Result<Value, CliError> {
    let sys = queue_system(sc)?;
    let ks = sys.k_star();
    let psi: Vec<Value> = sys
        .realizable_k()
        .into_iter()
        .map(|k| Ok(json!({"k": k, "psi": sys.psi(k)?})))
        .collect::<Result<_, CliError>>()?;
    let a1 = if sys.n() <= MAX_A1_AGENTS {
        Value::Bool(check_assumption_a1(&sys)?)
    } else {
        Value::Null
    };
    let mut v = json!({
        "system": queue_system_json(&sys),
        "k_star": ks,
        "c_star": coalition_list(&sys.c_star_set()?),
        "psi": psi,
        "assumption_a1": a1,
        "rbia_stable_duopolies": names(&queue::rbia_stable_duopolies(&sys)?),
        "light_traffic_set": names(&queue::light_traffic_stable_set(&sys)?),
        "gc_stabilizing_payoff": queue::gc_stabilizing_payoffs(&sys),
    });
    if let Some(text) = &sc.partition {
        let p = parse_partition(text, sys.n())?;
        let we = sys.solve_we(&p)?;
        let mut verdicts = Vec::new();
        for payoff in [PayoffRule::Proportional, PayoffRule::Shapley] {
            let cfg = queue::configuration(&sys, &p, &payoff)?;
            for rule in [Rule::Gbpa, Rule::Rbpa, Rule::Rbia] {
                let (verdict, witness) = verdict_json(&queue::check(&sys, &cfg, rule));
                verdicts.push(json!({
                    "rule": rule.to_string(),
                    "payoff_rule": payoff.name(),
                    "payoff": cfg.payoff,
                    "verdict": verdict,
                    "witness": witness,
                }));
            }
        }
        let poly = queue::rbpa_stable_payoff_exists(&sys, &p)?;
        v["partition"] = json!({
            "partition": p.to_string(),
            "rates": we.rates,
            "common_blocking": we.common_blocking,
            "verdicts": verdicts,
            "rbpa_payoff_exists": poly.exists(),
            "rbpa_payoff": poly.payoff,
            "rbia_stable_partition": queue::rbia_stable_partition(&sys, &p),
        });
    }
    Ok(v)
}

fn kelly_report(sc: &Scenario) -> Result<Value, CliError> {
    let sys = kelly_system(sc)?;
    let n = sys.n();
    let ne = if n <= MAX_NE_AGENTS {
        or_null(kelly::ne_classes(&sys))?
    } else {
        Value::Null
    };
    let (u, c) = if n <= MAX_SCAN_AGENTS {
        let rows = kelly_cmd::scan(&sys, &coalform::partition::all_partitions(n)?)?;
        let pick = |f: fn(&kelly_cmd::Row) -> bool| -> Vec<Value> {
            rows.iter()
                .filter(|r| f(r))
                .map(|r| json!({"partition": r.partition.to_string(), "class": r.class}))
                .collect()
        };
        (Value::from(pick(|r| r.u.stable)), Value::from(pick(|r| r.c.stable)))
    } else {
        (Value::Null, Value::Null)
    };
    let mut v = json!({
        "system": kelly_system_json(&sys),
        "symmetric": sys.is_symmetric(),
        "ne_classes": ne,
        "social_optimum": or_null(kelly::so_partition(&sys))?,
        "poa": or_null(kelly::poa(&sys))?,
        "u_stable": u,
        "c_stable": c,
    });
    if !sys.has_adamant() {
        v["moa"] = json!(kelly::moa(&sys)?);
        v["absolute_stability"] = serde_json::to_value(kelly::absolute_stability_check(&sys)?)?;
    }
    if let Some(text) = &sc.partition {
        let p = parse_partition(text, n)?;
        let ne = kelly::rsg_ne(&sys, &p)?;
        v["partition"] = json!({
            "partition": p.to_string(),
            "class": kelly::partition_class(&sys, &p)?,
            "equilibrium": ne,
            "shares": kelly::shapley_within(&sys, &p)?,
            "spectral_shares": kelly::spectral_shares(&sys, &p)?,
            "u_stable": verdict_json(&kelly::u_stable(&sys, &p)?).0,
        });
    }
    Ok(v)
}
