//! Payoff rules and stability checks for the congestion game.
//!
//! All blocking tests compare an anticipated rate with a prevailing worth
//! using [`exceeds`], a strict inequality with a relative slack of
//! [`REL_TOL`], so exact ties such as λ̲_𝒩 = Λ = Σφ never register as blocks.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, Constraint, LpOutcome, Rel, Q};
use crate::partition::{
    enumerate_two_partitions, mergers_of, splits_of, Coalition, Configuration, Partition, PayoffVector,
};
use crate::rng::SplitMix64;
use crate::shapley::{self, MAX_SHAPLEY_SIZE};
use crate::wardrop::QueueSystem;

/// Relative slack for strict comparisons between rates.
pub const REL_TOL: f64 = 1e-9;

/// `lhs > rhs` beyond rounding noise.
pub fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs - rhs > REL_TOL * lhs.abs().max(rhs.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Gbpa,
    Rbpa,
    Rbia,
}

impl std::str::FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "gbpa" => Ok(Rule::Gbpa),
            "rbpa" => Ok(Rule::Rbpa),
            "rbia" => Ok(Rule::Rbia),
            _ => Err(Error::Parse {
                token: s.to_string(),
                reason: "expected gbpa, rbpa or rbia".into(),
            }),
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rule::Gbpa => "gbpa",
            Rule::Rbpa => "rbpa",
            Rule::Rbia => "rbia",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Merger,
    Split,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockingWitness {
    pub coalition: Coalition,
    pub kind: BlockKind,
    #[serde(rename = "anticipated")]
    pub anticipated_rate: f64,
    #[serde(rename = "prevailing")]
    pub prevailing_worth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub witness: Option<BlockingWitness>,
}

impl StabilityVerdict {
    pub fn stable() -> Self {
        StabilityVerdict {
            stable: true,
            witness: None,
        }
    }

    pub fn blocked(w: BlockingWitness) -> Self {
        StabilityVerdict {
            stable: false,
            witness: Some(w),
        }
    }

    fn from_first(w: Option<BlockingWitness>) -> Self {
        w.map_or_else(StabilityVerdict::stable, StabilityVerdict::blocked)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffRule {
    Proportional,
    Shapley,
    Explicit(PayoffVector),
}

impl PayoffRule {
    pub fn name(&self) -> &'static str {
        match self {
            PayoffRule::Proportional => "proportional",
            PayoffRule::Shapley => "shapley",
            PayoffRule::Explicit(_) => "explicit",
        }
    }
}

/// φ_i = (N_i / N_C) λ_C.
pub fn proportional_payoff(sys: &QueueSystem, p: &Partition) -> Result<PayoffVector> {
    let we = sys.solve_we(p)?;
    let mut phi = vec![0.0; sys.n()];
    for (&c, &rate) in p.blocks().iter().zip(&we.rates) {
        let nc = sys.servers_of(c) as f64;
        for i in c.members() {
            phi[i - 1] = sys.servers()[i - 1] as f64 / nc * rate;
        }
    }
    Ok(phi)
}

/// Worth of S ⊆ C ∈ p: S's rate once C splits into S and C∖S.
pub fn subcoalition_worth(sys: &QueueSystem, p: &Partition, s: Coalition) -> f64 {
    if p.contains_block(s) {
        sys.rate_in(p, s)
    } else {
        sys.rate_in(&p.isolate(s), s)
    }
}

/// Shapley shares within each coalition over [`subcoalition_worth`].
pub fn shapley_payoff_queue(sys: &QueueSystem, p: &Partition) -> Result<PayoffVector> {
    sys.solve_we(p)?;
    let mut phi = vec![0.0; sys.n()];
    for &c in p.blocks() {
        let shares = shapley::shapley_within(c, |s| subcoalition_worth(sys, p, s))?;
        for (i, x) in c.members().zip(shares) {
            phi[i - 1] = x.max(0.0);
        }
    }
    Ok(phi)
}

/// φ_k = λ̲_{k} + (λ_C − Σ_{j∈C} λ̲_{j}) / |C|.
pub fn unilateral_stable_payoff(sys: &QueueSystem, p: &Partition) -> Result<PayoffVector> {
    let we = sys.solve_we(p)?;
    let mut phi = vec![0.0; sys.n()];
    for (&c, &rate) in p.blocks().iter().zip(&we.rates) {
        let floor: f64 = c.members().map(|j| sys.pessimal_rate(Coalition::singleton(j))).sum();
        let surplus = (rate - floor) / c.len() as f64;
        for k in c.members() {
            phi[k - 1] = sys.pessimal_rate(Coalition::singleton(k)) + surplus;
        }
    }
    Ok(phi)
}

/// A configuration under the given payoff rule; explicit vectors are checked for consistency.
pub fn configuration(sys: &QueueSystem, p: &Partition, rule: &PayoffRule) -> Result<Configuration> {
    let phi = match rule {
        PayoffRule::Proportional => proportional_payoff(sys, p)?,
        PayoffRule::Shapley => shapley_payoff_queue(sys, p)?,
        PayoffRule::Explicit(v) => v.clone(),
    };
    let cfg = Configuration::new(p.clone(), phi)?;
    check_consistent(sys, &cfg)?;
    Ok(cfg)
}

/// Per-coalition payoff sums must equal WE worths (relative 1e-9).
pub fn check_consistent(sys: &QueueSystem, cfg: &Configuration) -> Result<()> {
    let we = sys.solve_we(&cfg.partition)?;
    for (&c, &rate) in cfg.partition.blocks().iter().zip(&we.rates) {
        let sum = cfg.sum_over(c);
        if (sum - rate).abs() > 1e-9 * rate.max(1e-300) {
            return Err(Error::domain(format!(
                "payoffs of {c} sum to {sum}, but its worth is {rate}"
            )));
        }
    }
    Ok(())
}

/// Random consistent payoff: each coalition's worth split by flat Dirichlet weights.
pub fn random_consistent_payoff(sys: &QueueSystem, p: &Partition, rng: &mut SplitMix64) -> PayoffVector {
    let we = sys.we(p);
    let mut phi = vec![0.0; sys.n()];
    for (&c, &rate) in p.blocks().iter().zip(&we.rates) {
        let w: Vec<f64> = c.members().map(|_| -(1.0 - rng.unit()).ln()).collect();
        let total: f64 = w.iter().sum();
        for (i, wi) in c.members().zip(w) {
            phi[i - 1] = rate * wi / total;
        }
    }
    phi
}

/// How `q` relates to the blocks of `p`.
pub fn classify(p: &Partition, q: Coalition) -> BlockKind {
    let touched: Vec<Coalition> = p.blocks().iter().copied().filter(|b| b.intersects(q)).collect();
    if touched.len() >= 2 && touched.iter().all(|b| b.is_subset_of(q)) {
        BlockKind::Merger
    } else if touched.len() == 1 && q.is_strict_subset_of(touched[0]) {
        BlockKind::Split
    } else {
        BlockKind::General
    }
}

/// Evaluates one candidate coalition under `rule`; `None` if it does not block.
pub fn blocks(sys: &QueueSystem, cfg: &Configuration, rule: Rule, q: Coalition) -> Option<BlockingWitness> {
    let p = &cfg.partition;
    if q == sys.grand() || p.contains_block(q) {
        // λ̲_𝒩 = Λ = Σφ, and a standing coalition cannot block itself
        return None;
    }
    let kind = classify(p, q);
    let prevailing = cfg.sum_over(q);
    match (rule, kind) {
        (Rule::Gbpa, _) | (Rule::Rbpa, BlockKind::Merger | BlockKind::Split) => {
            let lo = sys.pessimal_rate(q);
            exceeds(lo, prevailing).then_some(BlockingWitness {
                coalition: q,
                kind,
                anticipated_rate: lo,
                prevailing_worth: prevailing,
            })
        }
        (Rule::Rbia, BlockKind::Merger) => {
            let lo = sys.pessimal_rate(q);
            let worth: f64 = p.blocks().iter().filter(|b| b.is_subset_of(q)).map(|&b| sys.rate_in(p, b)).sum();
            if !exceeds(lo, worth) {
                return None;
            }
            // the second stage follows from the first for mergers
            let realized = sys.rate_in(&p.isolate(q), q);
            assert!(
                !exceeds(lo, realized),
                "merger {q}: realized rate {realized} below its pessimal rate {lo}"
            );
            Some(BlockingWitness {
                coalition: q,
                kind,
                anticipated_rate: lo,
                prevailing_worth: worth,
            })
        }
        (Rule::Rbia, BlockKind::Split) => {
            if !split_passes_first_stage(sys, p, q) {
                return None;
            }
            let realized = sys.rate_in(&p.isolate(q), q);
            exceeds(realized, prevailing).then_some(BlockingWitness {
                coalition: q,
                kind,
                anticipated_rate: realized,
                prevailing_worth: prevailing,
            })
        }
        _ => None,
    }
}

/// λ̲_Q > (N_Q / N_C) λ_C for a split Q of C ∈ p.
fn split_passes_first_stage(sys: &QueueSystem, p: &Partition, q: Coalition) -> bool {
    let c = p.block_of(q.min_member());
    let share = sys.servers_of(q) as f64 / sys.servers_of(c) as f64 * sys.rate_in(p, c);
    exceeds(sys.pessimal_rate(q), share)
}

/// Candidate coalitions for `rule` in canonical order.
pub fn candidates(p: &Partition, rule: Rule) -> Vec<Coalition> {
    match rule {
        Rule::Gbpa => {
            let mut all: Vec<Coalition> = Coalition::grand(p.n())
                .strict_subsets()
                .filter(|&q| !p.contains_block(q))
                .collect();
            all.sort();
            all
        }
        Rule::Rbpa | Rule::Rbia => {
            let mut all = mergers_of(p);
            all.extend(splits_of(p));
            all.retain(|&q| q != Coalition::grand(p.n()));
            all.sort();
            all
        }
    }
}

/// Every blocking coalition under `rule`, canonical order.
pub fn blocking_witnesses(sys: &QueueSystem, cfg: &Configuration, rule: Rule) -> Vec<BlockingWitness> {
    candidates(&cfg.partition, rule)
        .into_iter()
        .filter_map(|q| blocks(sys, cfg, rule, q))
        .collect()
}

/// Stability check dispatched by rule.
pub fn check(sys: &QueueSystem, cfg: &Configuration, rule: Rule) -> StabilityVerdict {
    match rule {
        Rule::Gbpa => gbpa_check(sys, cfg),
        Rule::Rbpa => rbpa_check(sys, cfg),
        Rule::Rbia => rbia_check(sys, cfg),
    }
}

/// General blocking with pessimal anticipation. Tries 𝒩∖{j}, then {j},
/// then every merger of singletons, then the rest in canonical order.
pub fn gbpa_check(sys: &QueueSystem, cfg: &Configuration) -> StabilityVerdict {
    let n = sys.n();
    let grand = sys.grand();
    let mut order: Vec<Coalition> = Vec::new();
    if n >= 2 {
        order.extend((1..=n).filter_map(|j| grand.minus(Coalition::singleton(j))));
        order.extend((1..=n).map(Coalition::singleton));
        order.extend(mergers_of(&Partition::singletons(n)));
    }
    let first = order
        .into_iter()
        .chain(candidates(&cfg.partition, Rule::Gbpa))
        .find_map(|q| blocks(sys, cfg, Rule::Gbpa, q));
    StabilityVerdict::from_first(first)
}

pub fn rbpa_check(sys: &QueueSystem, cfg: &Configuration) -> StabilityVerdict {
    StabilityVerdict::from_first(
        candidates(&cfg.partition, Rule::Rbpa)
            .into_iter()
            .find_map(|q| blocks(sys, cfg, Rule::Rbpa, q)),
    )
}

pub fn rbia_check(sys: &QueueSystem, cfg: &Configuration) -> StabilityVerdict {
    StabilityVerdict::from_first(
        candidates(&cfg.partition, Rule::Rbia)
            .into_iter()
            .find_map(|q| blocks(sys, cfg, Rule::Rbia, q)),
    )
}

/// Stable under RB-IA for every consistent payoff: no merger blocks and no
/// split clears the first stage. If a split clears it, handing that split's
/// members a small enough share makes the second stage hold too.
pub fn rbia_stable_partition(sys: &QueueSystem, p: &Partition) -> bool {
    let grand = sys.grand();
    let merger_blocks = mergers_of(p).into_iter().filter(|&q| q != grand).any(|q| {
        let worth: f64 = p.blocks().iter().filter(|b| b.is_subset_of(q)).map(|&b| sys.rate_in(p, b)).sum();
        exceeds(sys.pessimal_rate(q), worth)
    });
    !merger_blocks && !splits_of(p).into_iter().any(|q| split_passes_first_stage(sys, p, q))
}

/// All duopolies passing [`rbia_stable_partition`].
pub fn rbia_stable_duopolies(sys: &QueueSystem) -> Result<Vec<Partition>> {
    Ok(enumerate_two_partitions(sys.n())?
        .into_iter()
        .filter(|p| rbia_stable_partition(sys, p))
        .collect())
}

/// A payoff keeping the grand coalition RB-IA stable, if agent 1 holds at
/// least half of all servers: agent 1 gets max{λ̲_C : 1 ∈ C ⊊ 𝒩}, the rest
/// share the remainder equally.
pub fn gc_stabilizing_payoffs(sys: &QueueSystem) -> Option<PayoffVector> {
    let n = sys.n();
    let n1 = sys.servers()[0];
    if n1 < sys.total_servers() - n1 {
        return None;
    }
    if n == 1 {
        return Some(vec![sys.lambda()]);
    }
    let phi1 = sys
        .grand()
        .strict_subsets()
        .filter(|c| c.contains(1))
        .map(|c| sys.pessimal_rate(c))
        .fold(0.0, f64::max);
    let rest = ((sys.lambda() - phi1) / (n - 1) as f64).max(0.0);
    let mut phi = vec![rest; n];
    phi[0] = phi1;
    Some(phi)
}

/// Result of the RB-PA payoff polyhedron search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbpaPolyhedron {
    /// The split constraints admit a payoff.
    pub feasible: bool,
    /// Some payoff clears every split constraint strictly.
    pub interior: bool,
    /// Smallest slack t* over coalitions (max-min margin).
    pub margin: f64,
    pub payoff: Option<PayoffVector>,
    /// Mergers do not depend on payoffs; a blocking merger is reported here.
    pub merger_block: Option<BlockingWitness>,
}

impl RbpaPolyhedron {
    /// An RB-PA stable payoff exists.
    pub fn exists(&self) -> bool {
        self.feasible && self.merger_block.is_none()
    }
}

/// Decides whether {Σ_Q φ ≥ λ̲_Q for Q ⊊ C ∈ p, Σ_C φ = λ_C, φ ≥ 0} is
/// nonempty. Each coalition is an independent exact LP maximizing the common
/// slack t; the 2^|C| rows are added lazily as cuts.
pub fn rbpa_stable_payoff_exists(sys: &QueueSystem, p: &Partition) -> Result<RbpaPolyhedron> {
    let we = sys.solve_we(p)?;
    let mut phi = vec![0.0; sys.n()];
    let mut margin = f64::INFINITY;
    let mut feasible = true;
    let mut interior = true;
    for (&c, &rate) in p.blocks().iter().zip(&we.rates) {
        if c.len() > MAX_SHAPLEY_SIZE {
            return Err(Error::cap("coalition in payoff polyhedron", c.len(), MAX_SHAPLEY_SIZE));
        }
        if c.len() == 1 {
            phi[c.min_member() - 1] = rate;
            continue;
        }
        let (t, x) = max_slack(sys, c, rate);
        let tf = lp::q_to_f64(&t);
        margin = margin.min(tf);
        if t.is_negative() {
            feasible = false;
            interior = false;
        } else if t.is_zero() {
            interior = false;
        }
        for (i, xi) in c.members().zip(x) {
            phi[i - 1] = lp::q_to_f64(&xi).max(0.0);
        }
    }
    let cfg = Configuration::new(p.clone(), phi.clone()).ok();
    let merger_block = cfg.as_ref().and_then(|cfg| {
        mergers_of(p)
            .into_iter()
            .filter(|&q| q != sys.grand())
            .find_map(|q| blocks(sys, cfg, Rule::Rbpa, q))
    });
    Ok(RbpaPolyhedron {
        feasible,
        interior,
        margin: if margin.is_finite() { margin } else { 0.0 },
        payoff: feasible.then_some(phi),
        merger_block,
    })
}

/// max t s.t. Σ_Q φ − t ≥ λ̲_Q (Q ⊊ c), Σ_c φ = rate, φ ≥ 0.
fn max_slack(sys: &QueueSystem, c: Coalition, rate: f64) -> (Q, Vec<Q>) {
    let members = c.to_vec();
    let k = members.len();
    // variables: φ_1..φ_k, t⁺, t⁻
    let nv = k + 2;
    let floor_of = |q: Coalition| lp::q_from_f64(sys.pessimal_rate(q));
    let row_for = |q: Coalition| -> Constraint {
        let mut coeffs = vec![Q::zero(); nv];
        for (j, &m) in members.iter().enumerate() {
            if q.contains(m) {
                coeffs[j] = Q::from_integer(1.into());
            }
        }
        coeffs[k] = Q::from_integer((-1).into());
        coeffs[k + 1] = Q::from_integer(1.into());
        Constraint {
            coeffs,
            rel: Rel::Ge,
            rhs: floor_of(q),
        }
    };
    let mut sum_row = vec![Q::from_integer(1.into()); nv];
    sum_row[k] = Q::zero();
    sum_row[k + 1] = Q::zero();
    let mut rows = vec![Constraint {
        coeffs: sum_row,
        rel: Rel::Eq,
        rhs: lp::q_from_f64(rate),
    }];
    let mut active: Vec<Coalition> = members.iter().map(|&m| Coalition::singleton(m)).collect();
    rows.extend(active.iter().map(|&q| row_for(q)));
    let mut objective = vec![Q::zero(); nv];
    objective[k] = Q::from_integer(1.into());
    objective[k + 1] = Q::from_integer((-1).into());
    let all: Vec<Coalition> = c.strict_subsets().collect();
    loop {
        let LpOutcome::Optimal { x, value } = lp::maximize(nv, &objective, &rows) else {
            unreachable!("slack LP is feasible and bounded once singleton rows are present");
        };
        let phi = &x[..k];
        let mut violated: Vec<(f64, Coalition)> = all
            .iter()
            .filter(|q| !active.contains(q))
            .filter_map(|&q| {
                let lhs: Q = members
                    .iter()
                    .zip(phi)
                    .filter(|(m, _)| q.contains(**m))
                    .map(|(_, v)| v.clone())
                    .sum::<Q>()
                    - &value;
                let gap = floor_of(q) - lhs;
                gap.is_positive().then(|| (lp::q_to_f64(&gap), q))
            })
            .collect();
        if violated.is_empty() {
            return (value, phi.to_vec());
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, q) in violated.iter().take(4) {
            active.push(q);
            rows.push(row_for(q));
        }
    }
}

/// Duopolies in which no strict subset of the larger side holds more than
/// half of all servers. Structural; no equilibrium is solved.
pub fn light_traffic_stable_set(sys: &QueueSystem) -> Result<Vec<Partition>> {
    let n = sys.total_servers();
    Ok(enumerate_two_partitions(sys.n())?
        .into_iter()
        .filter(|p| {
            let (a, b) = (p.blocks()[0], p.blocks()[1]);
            let big = if sys.servers_of(a) >= sys.servers_of(b) { a } else { b };
            !big.strict_subsets().any(|c| 2 * sys.servers_of(c) > n)
        })
        .collect())
}

/// Every duopoly; the large-Λ answer.
pub fn heavy_traffic_stable_set(sys: &QueueSystem) -> Result<Vec<Partition>> {
    enumerate_two_partitions(sys.n())
}

/// Checks the heavy-traffic answer at a given market size.
pub fn verify_heavy_traffic(sys: &QueueSystem, lambda: f64) -> Result<bool> {
    let at = sys.with_lambda(lambda)?;
    Ok(heavy_traffic_stable_set(&at)?.iter().all(|p| rbia_stable_partition(&at, p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::all_partitions;

    fn sys(n: &[u32], l: f64) -> QueueSystem {
        QueueSystem::new(n.to_vec(), l, 1.0).unwrap()
    }

    fn part(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn c(m: &[usize]) -> Coalition {
        Coalition::from_members(m).unwrap()
    }

    #[test]
    fn proportional_examples() {
        let s = sys(&[10, 2], 6.0);
        let phi = proportional_payoff(&s, &Partition::grand(2)).unwrap();
        assert!((phi[0] - 5.0).abs() < 1e-12 && (phi[1] - 1.0).abs() < 1e-12);
        let s = sys(&[3, 3, 3], 5.0);
        let phi = proportional_payoff(&s, &part("{{1,2},{3}}")).unwrap();
        assert!((phi[0] - phi[1]).abs() < 1e-12);
    }

    #[test]
    fn shapley_two_member_formula() {
        let s = sys(&[5, 3, 2], 7.0);
        let p = part("{{1,2},{3}}");
        let phi = shapley_payoff_queue(&s, &p).unwrap();
        let lam_c = s.rate_in(&p, c(&[1, 2]));
        let v1 = subcoalition_worth(&s, &p, c(&[1]));
        let v2 = subcoalition_worth(&s, &p, c(&[2]));
        assert!((phi[0] - (0.5 * (lam_c - v2) + 0.5 * v1)).abs() < 1e-12);
        assert!((phi[2] - s.rate_in(&p, c(&[3]))).abs() < 1e-12);
    }

    #[test]
    fn payoff_rules_are_consistent() {
        let s = sys(&[6, 4, 3, 2, 1], 9.0);
        for p in all_partitions(5).unwrap() {
            for rule in [PayoffRule::Proportional, PayoffRule::Shapley] {
                configuration(&s, &p, &rule).unwrap();
            }
            let u = unilateral_stable_payoff(&s, &p).unwrap();
            check_consistent(&s, &Configuration::new(p.clone(), u).unwrap()).unwrap();
        }
    }

    #[test]
    fn explicit_payoff_must_match_worths() {
        let s = sys(&[2, 2], 4.0);
        let bad = PayoffRule::Explicit(vec![1.0, 1.0]);
        assert!(configuration(&s, &Partition::singletons(2), &bad).is_err());
        let ok = PayoffRule::Explicit(vec![2.0, 2.0]);
        assert!(configuration(&s, &Partition::singletons(2), &ok).is_ok());
    }

    #[test]
    fn gbpa_two_agents_singletons_stable() {
        let s = sys(&[3, 2], 4.0);
        let cfg = configuration(&s, &Partition::singletons(2), &PayoffRule::Proportional).unwrap();
        assert!(gbpa_check(&s, &cfg).stable);
    }

    #[test]
    fn gbpa_all_singletons_blocked_by_complement_of_one() {
        let s = sys(&[4, 3, 2, 1], 6.0);
        let cfg = configuration(&s, &Partition::singletons(4), &PayoffRule::Proportional).unwrap();
        let v = gbpa_check(&s, &cfg);
        let w = v.witness.unwrap();
        assert_eq!(w.coalition.len(), 3);
        assert!(w.anticipated_rate > w.prevailing_worth);
    }

    #[test]
    fn rbpa_grand_coalition_unstable() {
        let s = sys(&[5, 4, 3], 8.0);
        let cfg = configuration(&s, &Partition::grand(3), &PayoffRule::Proportional).unwrap();
        assert!(!rbpa_check(&s, &cfg).stable);
    }

    #[test]
    fn rbpa_numerical_example() {
        let s = sys(&[80, 20, 5], 100.0);
        let p = part("{{1,2},{3}}");
        let sh = configuration(&s, &p, &PayoffRule::Shapley).unwrap();
        assert!(rbpa_check(&s, &sh).stable);
        let pr = configuration(&s, &p, &PayoffRule::Proportional).unwrap();
        let v = rbpa_check(&s, &pr);
        assert_eq!(v.witness.unwrap().coalition, c(&[1]));
    }

    #[test]
    fn rbia_numerical_example() {
        let s = sys(&[10, 2, 2, 2], 13.0);
        let p = part("{{1,2,3},{4}}");
        let cfg = configuration(&s, &p, &PayoffRule::Proportional).unwrap();
        let v = rbia_check(&s, &cfg);
        let w = v.witness.unwrap();
        assert_eq!(w.coalition, c(&[1, 2]));
        assert_eq!(w.kind, BlockKind::Split);
        assert!(!rbia_stable_partition(&s, &p));
    }

    #[test]
    fn rbia_three_or_more_coalitions_unstable() {
        let s = sys(&[4, 3, 3, 2], 7.0);
        for p in all_partitions(4).unwrap().into_iter().filter(|p| p.len() >= 3) {
            for rule in [PayoffRule::Proportional, PayoffRule::Shapley] {
                let cfg = configuration(&s, &p, &rule).unwrap();
                assert!(!rbia_check(&s, &cfg).stable, "{p}");
            }
            assert!(!rbia_stable_partition(&s, &p));
        }
    }

    #[test]
    fn grand_coalition_witness_payoff() {
        let s = sys(&[10, 2, 2, 2], 13.0);
        let phi = gc_stabilizing_payoffs(&s).unwrap();
        let cfg = configuration(&s, &Partition::grand(4), &PayoffRule::Explicit(phi)).unwrap();
        assert!(rbia_check(&s, &cfg).stable);
        assert!(gc_stabilizing_payoffs(&sys(&[5, 4, 3], 8.0)).is_none());
        assert!(gc_stabilizing_payoffs(&sys(&[9, 1], 3.0)).is_some());
    }

    #[test]
    fn c_star_duopolies_stable() {
        let s = sys(&[10, 2, 2, 2], 13.0);
        for cs in s.c_star_set().unwrap() {
            let p = Partition::new(4, vec![cs, s.grand().minus(cs).unwrap()]).unwrap();
            assert!(rbia_stable_partition(&s, &p), "{p}");
        }
    }

    #[test]
    fn polyhedron_examples() {
        let s = sys(&[5, 4, 3], 8.0);
        let r = rbpa_stable_payoff_exists(&s, &Partition::singletons(3)).unwrap();
        assert!(r.feasible && r.payoff.is_some());
        let r = rbpa_stable_payoff_exists(&s, &Partition::grand(3)).unwrap();
        assert!(!r.feasible && r.payoff.is_none());
        let s = sys(&[10, 2, 2, 2], 13.0);
        for p in rbia_stable_duopolies(&s).unwrap() {
            let r = rbpa_stable_payoff_exists(&s, &p).unwrap();
            assert!(r.exists(), "{p}");
            let cfg = configuration(&s, &p, &PayoffRule::Explicit(r.payoff.unwrap())).unwrap();
            assert!(rbpa_check(&s, &cfg).stable, "{p}");
        }
    }

    #[test]
    fn polyhedron_witness_is_rbpa_stable() {
        let s = sys(&[6, 4, 3, 2, 1], 9.0);
        for p in all_partitions(5).unwrap() {
            let r = rbpa_stable_payoff_exists(&s, &p).unwrap();
            if let Some(phi) = r.payoff.clone() {
                let cfg = configuration(&s, &p, &PayoffRule::Explicit(phi)).unwrap();
                let splits_block = splits_of(&p).into_iter().any(|q| blocks(&s, &cfg, Rule::Rbpa, q).is_some());
                assert!(!splits_block, "{p}");
            }
        }
    }

    #[test]
    fn unilateral_payoff_examples() {
        let s = sys(&[4, 3, 2], 5.0);
        let phi = unilateral_stable_payoff(&s, &Partition::singletons(3)).unwrap();
        for i in 1..=3 {
            let we = s.rate_in(&Partition::singletons(3), Coalition::singleton(i));
            let lo = s.pessimal_rate(Coalition::singleton(i));
            // singletons: surplus is λ_i − λ̲_i
            assert!((phi[i - 1] - we).abs() < 1e-12 && we >= lo - 1e-12);
        }
        let p = part("{{1,2,3}}");
        let phi = unilateral_stable_payoff(&s, &p).unwrap();
        for i in 1..=3 {
            assert!(phi[i - 1] > s.pessimal_rate(Coalition::singleton(i)));
        }
    }

    #[test]
    fn light_traffic_examples() {
        let s = sys(&[7, 2, 2, 2, 2], 1e-3);
        let set = light_traffic_stable_set(&s).unwrap();
        let mut ks: Vec<u32> = set
            .iter()
            .map(|p| p.blocks().iter().map(|&b| s.servers_of(b)).max().unwrap())
            .collect();
        ks.sort_unstable();
        ks.dedup();
        assert_eq!(ks, vec![8, 9]);
        let s = sys(&[10, 2, 2, 2], 1e-3);
        assert!(!light_traffic_stable_set(&s).unwrap().contains(&part("{{1,2,3},{4}}")));
        let s = sys(&[3, 3], 1.0);
        assert_eq!(light_traffic_stable_set(&s).unwrap(), vec![Partition::singletons(2)]);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("RB-IA".parse::<Rule>().unwrap(), Rule::Rbia);
        assert!("xyz".parse::<Rule>().is_err());
    }
}
