//! Seeded blocking dynamics for the congestion game.
//!
//! At each step one blocking coalition is drawn uniformly among all that block
//! the current configuration under the chosen rule. The partition becomes
//! `{Q} ∪ {C ∖ Q}`. The blocking coalition splits its surplus (new worth minus
//! its old payoff sum) equally; every other coalition rescales its old shares
//! to its new worth, or splits equally if the old shares summed to zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{bell, enumerate_partitions, Coalition, Configuration, Partition, MAX_REPRESENTABLE};
use crate::queue::{self, exceeds, BlockingWitness, PayoffRule, Rule};
use crate::rng::SplitMix64;
use crate::wardrop::QueueSystem;

/// Largest n for the exhaustive A.1 subset check.
pub const MAX_A1_AGENTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffUpdate {
    #[default]
    SurplusEqual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub rule: Rule,
    pub seed: u64,
    pub max_steps: usize,
    pub payoff_update: PayoffUpdate,
}

impl DynamicsConfig {
    pub fn new(rule: Rule, seed: u64, max_steps: usize) -> Result<Self> {
        if max_steps == 0 {
            return Err(Error::domain("max_steps must be at least 1"));
        }
        Ok(DynamicsConfig {
            rule,
            seed,
            max_steps,
            payoff_update: PayoffUpdate::SurplusEqual,
        })
    }
}

/// 10·Bell(n), saturating.
pub fn default_max_steps(n: usize) -> usize {
    usize::try_from(bell(n).saturating_mul(10)).unwrap_or(usize::MAX)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub config: Configuration,
    pub witness: BlockingWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub seed: u64,
    pub rule: Rule,
    pub steps: Vec<TraceStep>,
    pub terminal: Configuration,
    pub absorbed: bool,
}

/// One line of the JSONL export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub partition: Partition,
    pub witness: Option<BlockingWitness>,
    pub payoffs: Vec<f64>,
}

impl Trace {
    /// Steps followed by the terminal configuration (with no witness).
    pub fn records(&self) -> Vec<TraceRecord> {
        let mut out: Vec<TraceRecord> = self
            .steps
            .iter()
            .enumerate()
            .map(|(k, s)| TraceRecord {
                step: k,
                partition: s.config.partition.clone(),
                witness: Some(s.witness.clone()),
                payoffs: s.config.payoff.clone(),
            })
            .collect();
        out.push(TraceRecord {
            step: self.steps.len(),
            partition: self.terminal.partition.clone(),
            witness: None,
            payoffs: self.terminal.payoff.clone(),
        });
        out
    }
}

/// Applies a block: new partition and surplus-equal payoff update.
pub fn apply_block(sys: &QueueSystem, cfg: &Configuration, w: &BlockingWitness) -> Configuration {
    let q = w.coalition;
    let next = cfg.partition.isolate(q);
    let we = sys.we(&next);
    let mut phi = cfg.payoff.clone();
    for (&d, &worth) in next.blocks().iter().zip(&we.rates) {
        let old = cfg.sum_over(d);
        if d == q {
            let surplus = (worth - old) / q.len() as f64;
            assert!(surplus > 0.0, "blocking coalition {q} does not gain: worth {worth}, old sum {old}");
            for i in d.members() {
                phi[i - 1] += surplus;
            }
        } else if old > 0.0 {
            for i in d.members() {
                phi[i - 1] *= worth / old;
            }
        } else {
            for i in d.members() {
                phi[i - 1] = worth / d.len() as f64;
            }
        }
    }
    Configuration {
        partition: next,
        payoff: phi,
    }
}

/// One move, or `None` if `cfg` is stable under `rule`.
pub fn step(
    sys: &QueueSystem,
    cfg: &Configuration,
    rule: Rule,
    rng: &mut SplitMix64,
) -> Option<(Configuration, BlockingWitness)> {
    let ws = queue::blocking_witnesses(sys, cfg, rule);
    if ws.is_empty() {
        return None;
    }
    let w = ws[rng.below(ws.len())].clone();
    Some((apply_block(sys, cfg, &w), w))
}

/// Runs until absorption or `dc.max_steps` moves.
pub fn run(sys: &QueueSystem, initial: &Configuration, dc: &DynamicsConfig) -> Trace {
    let mut rng = SplitMix64::new(dc.seed);
    run_with(sys, initial.clone(), dc, &mut rng)
}

fn run_with(sys: &QueueSystem, initial: Configuration, dc: &DynamicsConfig, rng: &mut SplitMix64) -> Trace {
    let mut cur = initial;
    let mut steps = Vec::new();
    loop {
        if steps.len() >= dc.max_steps {
            let absorbed = queue::check(sys, &cur, dc.rule).stable;
            return Trace {
                seed: dc.seed,
                rule: dc.rule,
                steps,
                terminal: cur,
                absorbed,
            };
        }
        match step(sys, &cur, dc.rule, rng) {
            None => {
                return Trace {
                    seed: dc.seed,
                    rule: dc.rule,
                    steps,
                    terminal: cur,
                    absorbed: true,
                }
            }
            Some((next, w)) => {
                steps.push(TraceStep { config: cur, witness: w });
                cur = next;
            }
        }
    }
}

/// Uniformly random partition with proportional payoffs, drawn from `rng`.
pub fn random_initial(sys: &QueueSystem, rng: &mut SplitMix64) -> Result<Configuration> {
    let n = sys.n();
    let count = bell(n);
    if count > u64::MAX as u128 {
        return Err(Error::cap("random partition draw", n, 25));
    }
    let idx = rng.below(count as usize);
    let p = enumerate_partitions(n, MAX_REPRESENTABLE)?
        .nth(idx)
        .expect("index below Bell(n)");
    queue::configuration(sys, &p, &PayoffRule::Proportional)
}

/// A full seeded run: the seed picks the initial configuration, then drives the moves.
pub fn run_seeded(sys: &QueueSystem, rule: Rule, seed: u64, max_steps: usize) -> Result<Trace> {
    let dc = DynamicsConfig::new(rule, seed, max_steps)?;
    let mut rng = SplitMix64::new(seed);
    let init = random_initial(sys, &mut rng)?;
    Ok(run_with(sys, init, &dc, &mut rng))
}

/// Independent seeded runs in parallel; output follows `seeds` order.
pub fn run_many(sys: &QueueSystem, rule: Rule, seeds: &[u64], max_steps: usize) -> Result<Vec<Trace>> {
    seeds
        .par_iter()
        .map(|&s| run_seeded(sys, rule, s, max_steps))
        .collect()
}

/// For every coalition C containing no member of ℂ* as a subset, each strict
/// S ⊂ C has a strictly lower pessimal rate per server than C.
pub fn check_assumption_a1(sys: &QueueSystem) -> Result<bool> {
    let n = sys.n();
    if n > MAX_A1_AGENTS {
        return Err(Error::cap("assumption A.1 check", n, MAX_A1_AGENTS));
    }
    let cstar = sys.c_star_set()?;
    let per_server = |c: Coalition| sys.pessimal_rate(c) / sys.servers_of(c) as f64;
    Ok(sys
        .grand()
        .subsets()
        .filter(|c| !cstar.iter().any(|s| s.is_subset_of(*c)))
        .all(|c| {
            let top = per_server(c);
            c.strict_subsets().all(|s| exceeds(top, per_server(s)))
        }))
}
