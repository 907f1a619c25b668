//! Kelly `stability`, `kelly-ne` and `kelly-stability`.

use coalform::kelly::{self, KellySystem, MAX_SCAN_AGENTS};
use coalform::queue::StabilityVerdict;
use coalform::Partition;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::fail::{cap, CliError};
use crate::scenario::{Format, RuleArg, Scenario};
use crate::system::*;
use crate::table::{emit_json, Cell, Table};

pub struct Row {
    pub partition: Partition,
    pub class: String,
    pub u: StabilityVerdict,
    pub c: StabilityVerdict,
    pub shares: Vec<f64>,
}

impl Row {
    pub fn verdict(&self, rule: RuleArg) -> &StabilityVerdict {
        if rule == RuleArg::Cstable {
            &self.c
        } else {
            &self.u
        }
    }
}

/// U- and C-verdicts with shares for each partition, in input order.
pub fn scan(sys: &KellySystem, ps: &[Partition]) -> Result<Vec<Row>, CliError> {
    if sys.n() > MAX_SCAN_AGENTS {
        return Err(cap(format!("kelly scans allow at most {MAX_SCAN_AGENTS} agents, got {}", sys.n())));
    }
    Ok(ps
        .par_iter()
        .map(|p| {
            Ok(Row {
                partition: p.clone(),
                class: kelly::partition_class(sys, p)?,
                u: kelly::u_stable(sys, p)?,
                c: kelly::c_stable(sys, p)?,
                shares: kelly::shapley_within(sys, p)?,
            })
        })
        .collect::<Result<Vec<_>, coalform::Error>>()?)
}

pub fn stability(sc: &Scenario) -> Result<(), CliError> {
    let sys = kelly_system(sc)?;
    let rule = kelly_rule(sc.rule)?;
    let rows = scan(&sys, &partitions(sc, sys.n())?)?;
    let kept = rows.iter().filter(|r| r.verdict(rule).stable || !sc.stable_only);
    match sc.format {
        Format::Csv => {
            let mut t = Table::new(["partition", "class", "rule", "payoff_rule", "stable", "witness"]);
            for r in kept {
                let v = r.verdict(rule);
                t.push(vec![
                    r.partition.to_string().into(),
                    r.class.clone().into(),
                    rule.name().into(),
                    "shapley".into(),
                    v.stable.into(),
                    witness_text(v).into(),
                ]);
            }
            t.emit(Format::Csv, sc.out.as_deref())
        }
        Format::Json => {
            let out: Vec<Value> = kept
                .map(|r| {
                    let (verdict, witness) = verdict_json(r.verdict(rule));
                    json!({
                        "system": kelly_system_json(&sys),
                        "partition": r.partition.to_string(),
                        "class": r.class,
                        "rule": rule.name(),
                        "payoff_rule": "shapley",
                        "verdict": verdict,
                        "witness": witness,
                        "shares": r.shares,
                    })
                })
                .collect();
            emit_json(&Value::Array(out), sc.out.as_deref())
        }
    }
}

pub fn kelly_stability(sc: &Scenario) -> Result<(), CliError> {
    let sys = kelly_system(sc)?;
    let rule = kelly_rule(sc.rule)?;
    let rows = scan(&sys, &partitions(sc, sys.n())?)?;
    let mut headers = vec!["partition".to_string(), "class".into(), "u_stable".into(), "c_stable".into(), "witness".into()];
    headers.extend((1..=sys.n()).map(|i| format!("share_{i}")));
    let mut t = Table::new(headers);
    for r in rows.iter().filter(|r| r.verdict(rule).stable || !sc.stable_only) {
        let mut row: Vec<Cell> = vec![
            r.partition.to_string().into(),
            r.class.clone().into(),
            r.u.stable.into(),
            r.c.stable.into(),
            witness_text(r.verdict(rule)).into(),
        ];
        row.extend(r.shares.iter().map(|&x| Cell::from(x)));
        t.push(row);
    }
    t.emit(sc.format, sc.out.as_deref())
}

pub fn kelly_ne(sc: &Scenario) -> Result<(), CliError> {
    let sys = kelly_system(sc)?;
    let ps = kelly::ne_partitions(&sys)?;
    let mut t = Table::new([
        "partition",
        "class",
        "significant",
        "coalition_total",
        "adamant_utility",
        "adamant_significant",
    ]);
    for p in &ps {
        let ne = kelly::rsg_ne(&sys, p)?;
        t.push(vec![
            p.to_string().into(),
            kelly::partition_class(&sys, p)?.into(),
            ne.significant_count.into(),
            ne.coalition_total().into(),
            ne.adamant_utility.into(),
            ne.adamant_significant().into(),
        ]);
    }
    t.emit(sc.format, sc.out.as_deref())
}
