//! `we`, queue `stability` and `dynamics`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;

use coalform::dynamics::{self, default_max_steps, Trace};
use coalform::queue;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::fail::{input, CliError};
use crate::scenario::{Format, Scenario};
use crate::system::*;
use crate::table::{emit_json, Table};

pub fn we(sc: &Scenario) -> Result<(), CliError> {
    let sys = queue_system(sc)?;
    let text = sc.partition.as_deref().ok_or_else(|| input("we needs --partition"))?;
    let p = parse_partition(text, sys.n())?;
    let split = sys.solve_we(&p)?;
    let mut t = Table::new(["partition", "coalition", "servers", "rate", "blocking"]);
    for (&c, &r) in p.blocks().iter().zip(&split.rates) {
        t.push(vec![
            p.to_string().into(),
            c.to_string().into(),
            sys.servers_of(c).into(),
            r.into(),
            split.common_blocking.into(),
        ]);
    }
    match sc.format {
        Format::Csv => t.emit(Format::Csv, sc.out.as_deref()),
        Format::Json => {
            let rows: Vec<Value> = p
                .blocks()
                .iter()
                .zip(&split.rates)
                .map(|(&c, &r)| json!({"coalition": c.to_string(), "servers": sys.servers_of(c), "rate": r}))
                .collect();
            let v = json!({
                "system": queue_system_json(&sys),
                "partition": p.to_string(),
                "rates": rows,
                "common_blocking": split.common_blocking,
            });
            emit_json(&v, sc.out.as_deref())
        }
    }
}

pub fn stability(sc: &Scenario) -> Result<(), CliError> {
    let sys = queue_system(sc)?;
    let rule = queue_rule(sc.rule)?;
    let ps = partitions(sc, sys.n())?;
    let rules = payoff_rules(sc, sys.n())?;
    let cells: Vec<(usize, usize)> = (0..ps.len()).flat_map(|i| (0..rules.len()).map(move |j| (i, j))).collect();
    let verdicts = cells
        .par_iter()
        .map(|&(i, j)| {
            let cfg = queue::configuration(&sys, &ps[i], &rules[j])?;
            Ok(queue::check(&sys, &cfg, rule))
        })
        .collect::<Result<Vec<_>, coalform::Error>>()?;
    let rows = cells
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.stable || !sc.stable_only);
    match sc.format {
        Format::Csv => {
            let mut t = Table::new(["partition", "rule", "payoff_rule", "stable", "witness"]);
            for (&(i, j), v) in rows {
                t.push(vec![
                    ps[i].to_string().into(),
                    rule.to_string().into(),
                    rules[j].name().into(),
                    v.stable.into(),
                    witness_text(v).into(),
                ]);
            }
            t.emit(Format::Csv, sc.out.as_deref())
        }
        Format::Json => {
            let out: Vec<Value> = rows
                .map(|(&(i, j), v)| {
                    let (verdict, witness) = verdict_json(v);
                    json!({
                        "system": queue_system_json(&sys),
                        "partition": ps[i].to_string(),
                        "rule": rule.to_string(),
                        "payoff_rule": rules[j].name(),
                        "verdict": verdict,
                        "witness": witness,
                    })
                })
                .collect();
            emit_json(&Value::Array(out), sc.out.as_deref())
        }
    }
}

/// One JSONL line per step plus one for the terminal configuration.
pub fn trace_jsonl(t: &Trace) -> Result<String, CliError> {
    let mut s = String::new();
    for r in t.records() {
        let line = json!({
            "seed": t.seed,
            "rule": t.rule.to_string(),
            "step": r.step,
            "partition": r.partition.to_string(),
            "witness": r.witness.as_ref().map_or(Value::Null, witness_json),
            "payoffs": r.payoffs,
        });
        writeln!(s, "{}", serde_json::to_string(&line)?).expect("write to String");
    }
    Ok(s)
}

pub fn dynamics(sc: &Scenario) -> Result<(), CliError> {
    let sys = queue_system(sc)?;
    let rule = queue_rule(sc.rule)?;
    let max_steps = sc.max_steps.unwrap_or_else(|| default_max_steps(sys.n()));
    if let Some(path) = &sc.replay {
        return replay(&sys, rule, max_steps, path);
    }
    if sc.runs == 0 {
        return Err(input("--runs must be at least 1"));
    }
    let seeds: Vec<u64> = (0..sc.runs as u64).map(|k| sc.seed.wrapping_add(k)).collect();
    let traces = dynamics::run_many(&sys, rule, &seeds, max_steps)?;
    let mut t = Table::new(["seed", "steps", "absorbed", "terminal_partition"]);
    for tr in &traces {
        t.push(vec![
            tr.seed.into(),
            tr.steps.len().into(),
            tr.absorbed.into(),
            tr.terminal.partition.to_string().into(),
        ]);
    }
    match &sc.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("traces.jsonl"))?);
            for tr in &traces {
                f.write_all(trace_jsonl(tr)?.as_bytes())?;
            }
            f.flush()?;
            t.emit(Format::Csv, Some(&dir.join("summary.csv")))
        }
        None => t.emit(Format::Csv, None),
    }
}

fn replay(
    sys: &coalform::QueueSystem,
    rule: queue::Rule,
    max_steps: usize,
    path: &std::path::Path,
) -> Result<(), CliError> {
    let old = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let mut seeds = Vec::new();
    let mut seen = BTreeSet::new();
    for (k, line) in old.lines().enumerate() {
        let v: Value = serde_json::from_str(line).map_err(|e| input(format!("{}:{}: {e}", path.display(), k + 1)))?;
        let seed = v["seed"]
            .as_u64()
            .ok_or_else(|| input(format!("{}:{}: no seed", path.display(), k + 1)))?;
        if seen.insert(seed) {
            seeds.push(seed);
        }
    }
    let traces = dynamics::run_many(sys, rule, &seeds, max_steps)?;
    let mut new = String::new();
    for tr in &traces {
        new.push_str(&trace_jsonl(tr)?);
    }
    if new != old {
        return Err(CliError::Other(anyhow::anyhow!(
            "replay of {} seeds differs from {}",
            seeds.len(),
            path.display()
        )));
    }
    println!("replay identical: {} traces", seeds.len());
    Ok(())
}
