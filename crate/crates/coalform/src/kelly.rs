//! Kelly-mechanism resource sharing with coalitions.
//!
//! Each coalition of a partition bids as one player in a proportional
//! allocation game: share `λa / Σλa` minus cost `γa`. Only the strongest
//! member of a coalition bids, so its NE utility depends on its active factor
//! `λ̄` and on the active factors of everyone else. An optional adamant player
//! takes part in every game but never joins a coalition.
//!
//! Worth is split inside each coalition by a Shapley value. A sub-coalition
//! `C ⊂ S` is valued with the environment outside `S` fixed and `S ∖ C`
//! scattered into singletons.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{all_partitions, coarser_than, Coalition, Partition, PayoffVector, MAX_REPRESENTABLE};
use crate::queue::{classify, BlockKind, BlockingWitness, StabilityVerdict};
use crate::shapley;

/// Absolute slack for utility comparisons.
pub const EPS: f64 = 1e-12;

/// Largest n for exhaustive partition scans and C-stability.
pub const MAX_SCAN_AGENTS: usize = 8;

/// Largest n for the exhaustive strategy-profile NE search.
pub const MAX_NE_AGENTS: usize = 5;

/// Relative slack on the significance test `Σ w_i − (m−1) w_m > 0`.
const SIG_TOL: f64 = 1e-12;

/// η thresholds, exact. The usual three-decimal roundings are 0.414, 0.707,
/// 2.414 and 2.732.
pub mod thresholds {
    pub const SQRT2_MINUS_1: f64 = std::f64::consts::SQRT_2 - 1.0;
    pub const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;
    pub const ONE_PLUS_SQRT2: f64 = 1.0 + std::f64::consts::SQRT_2;
    pub const ONE_PLUS_SQRT3: f64 = 2.732_050_807_568_877;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KellySystem {
    influence: Vec<f64>,
    adamant_eta: Option<f64>,
    gamma: f64,
    action_bound: f64,
}

impl KellySystem {
    /// Action bound defaults to `2(n+1)/γ`.
    pub fn new(influence: Vec<f64>, adamant_eta: Option<f64>, gamma: f64) -> Result<Self> {
        let n = influence.len();
        if n == 0 || n > MAX_REPRESENTABLE {
            return Err(Error::domain(format!("need 1..={MAX_REPRESENTABLE} agents, got {n}")));
        }
        if let Some(bad) = influence.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::domain(format!("influence factors must be positive and finite, got {bad}")));
        }
        if let Some(e) = adamant_eta {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::domain(format!("η must be nonnegative and finite, got {e}")));
            }
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::domain(format!("γ must be positive and finite, got {gamma}")));
        }
        Ok(KellySystem {
            influence,
            adamant_eta,
            gamma,
            action_bound: 2.0 * (n + 1) as f64 / gamma,
        })
    }

    /// n identical agents with λ = 1, γ = 1.
    pub fn symmetric(n: usize, adamant_eta: Option<f64>) -> Result<Self> {
        KellySystem::new(vec![1.0; n], adamant_eta, 1.0)
    }

    pub fn with_action_bound(mut self, a: f64) -> Result<Self> {
        let floor = self.n() as f64 / self.gamma;
        if !(a.is_finite() && a > floor) {
            return Err(Error::domain(format!("action bound {a} must exceed n/γ = {floor}")));
        }
        self.action_bound = a;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.influence.len()
    }

    pub fn influence(&self) -> &[f64] {
        &self.influence
    }

    pub fn adamant_eta(&self) -> Option<f64> {
        self.adamant_eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn action_bound(&self) -> f64 {
        self.action_bound
    }

    /// λ₀ = η·max λ_i; η = 0 counts as no adamant player.
    pub fn adamant_factor(&self) -> Option<f64> {
        match self.adamant_eta {
            Some(e) if e > 0.0 => Some(e * self.max_influence()),
            _ => None,
        }
    }

    pub fn has_adamant(&self) -> bool {
        self.adamant_factor().is_some()
    }

    pub fn is_symmetric(&self) -> bool {
        self.influence.iter().all(|&x| x == self.influence[0])
    }

    fn max_influence(&self) -> f64 {
        self.influence.iter().copied().fold(f64::MIN, f64::max)
    }

    /// λ̄ of a coalition.
    pub fn active_factor(&self, c: Coalition) -> f64 {
        c.members().map(|i| self.influence[i - 1]).fold(f64::MIN, f64::max)
    }

    /// Lowest-index member attaining λ̄.
    pub fn active_player(&self, c: Coalition) -> usize {
        let top = self.active_factor(c);
        c.members().find(|&i| self.influence[i - 1] == top).expect("nonempty")
    }

    fn check_n(&self, p: &Partition) -> Result<()> {
        if p.n() != self.n() {
            return Err(Error::domain(format!(
                "partition over {} agents for a system of {}",
                p.n(),
                self.n()
            )));
        }
        Ok(())
    }
}

/// NE of the game among aggregate players with the given factors.
struct FactorNe {
    utility: Vec<f64>,
    action: Vec<f64>,
    m: usize,
    s: f64,
}

fn solve_factors(factors: &[f64], gamma: f64) -> FactorNe {
    let k = factors.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| factors[b].total_cmp(&factors[a]).then(a.cmp(&b)));
    let w: Vec<f64> = order.iter().map(|&i| 1.0 / factors[i]).collect();
    let mut m = 1;
    let mut acc = 0.0;
    for (j, &wj) in w.iter().enumerate() {
        acc += wj;
        if acc - j as f64 * wj > SIG_TOL * acc {
            m = j + 1;
        }
    }
    let s: f64 = w[..m].iter().sum();
    let mut utility = vec![0.0; k];
    let mut action = vec![0.0; k];
    let lead = (m - 1) as f64;
    for (rank, &idx) in order.iter().enumerate().take(m) {
        let r = s - lead * w[rank];
        utility[idx] = (r / s).powi(2);
        action[idx] = lead * r / (gamma * factors[idx] * s * s);
    }
    FactorNe { utility, action, m, s }
}

/// Utility of `blocks[target]` when `blocks` (plus the adamant player) play.
fn utility_among(sys: &KellySystem, blocks: &[Coalition], target: usize) -> f64 {
    let mut f: Vec<f64> = blocks.iter().map(|&b| sys.active_factor(b)).collect();
    f.extend(sys.adamant_factor());
    solve_factors(&f, sys.gamma).utility[target]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RSGOutcome {
    /// Per block of the partition, in its canonical order.
    pub coalition_utilities: Vec<f64>,
    pub aggregate_actions: Vec<f64>,
    pub active_players: Vec<usize>,
    /// M^P, counted over every bidder including the adamant player.
    pub significant_count: usize,
    pub s_value: f64,
    pub adamant_utility: Option<f64>,
    pub adamant_action: Option<f64>,
}

impl RSGOutcome {
    pub fn adamant_significant(&self) -> bool {
        self.adamant_utility.is_some_and(|u| u > 0.0)
    }

    /// Σ of the coalitions' utilities, adamant excluded.
    pub fn coalition_total(&self) -> f64 {
        self.coalition_utilities.iter().sum()
    }
}

/// Closed-form NE utilities and aggregate actions for partition `p`.
pub fn rsg_ne(sys: &KellySystem, p: &Partition) -> Result<RSGOutcome> {
    sys.check_n(p)?;
    let k = p.len();
    let mut f: Vec<f64> = p.blocks().iter().map(|&b| sys.active_factor(b)).collect();
    f.extend(sys.adamant_factor());
    let ne = solve_factors(&f, sys.gamma);
    Ok(RSGOutcome {
        coalition_utilities: ne.utility[..k].to_vec(),
        aggregate_actions: ne.action[..k].to_vec(),
        active_players: p.blocks().iter().map(|&b| sys.active_player(b)).collect(),
        significant_count: ne.m,
        s_value: ne.s,
        adamant_utility: ne.utility.get(k).copied(),
        adamant_action: ne.action.get(k).copied(),
    })
}

/// Blocks of 𝒬: `c`, the rest of `blocks[home]` as singletons, the others
/// unchanged. `c` comes first.
fn scatter(blocks: &[Coalition], home: usize, c: Coalition) -> Vec<Coalition> {
    let mut q = vec![c];
    if let Some(rest) = blocks[home].minus(c) {
        q.extend(rest.members().map(Coalition::singleton));
    }
    q.extend(blocks.iter().enumerate().filter(|&(j, _)| j != home).map(|(_, &b)| b));
    q
}

/// ν_C^P: utility of `c` with the rest of its block split into singletons.
pub fn subcoalition_worth(sys: &KellySystem, p: &Partition, c: Coalition) -> Result<f64> {
    sys.check_n(p)?;
    let home = p.block_index_of(c.min_member());
    if !c.is_subset_of(p.blocks()[home]) {
        return Err(Error::domain(format!("{c} is not inside a single coalition of {p}")));
    }
    Ok(utility_among(sys, &scatter(p.blocks(), home, c), 0))
}

/// Shapley shares of every agent, each computed within its own coalition.
pub fn shapley_within(sys: &KellySystem, p: &Partition) -> Result<PayoffVector> {
    sys.check_n(p)?;
    let blocks = p.blocks();
    let mut phi = vec![0.0; sys.n()];
    for (home, &b) in blocks.iter().enumerate() {
        if b.len() == 1 {
            phi[b.min_member() - 1] = utility_among(sys, blocks, home);
            continue;
        }
        let sh = shapley::shapley_within(b, |c| utility_among(sys, &scatter(blocks, home, c), 0))?;
        for (i, v) in b.members().zip(sh) {
            phi[i - 1] = v;
        }
    }
    Ok(phi)
}

/// Utility of agent `i` after splitting off alone from `p`.
fn alone_utility(sys: &KellySystem, p: &Partition, i: usize) -> f64 {
    let solo = Coalition::singleton(i);
    let mut blocks = vec![solo];
    blocks.extend(p.blocks().iter().filter_map(|b| b.minus(solo)));
    utility_among(sys, &blocks, 0)
}

fn u_verdict(sys: &KellySystem, p: &Partition, phi: &[f64]) -> StabilityVerdict {
    for &b in p.blocks().iter().filter(|b| b.len() >= 2) {
        for i in b.members() {
            let alone = alone_utility(sys, p, i);
            if alone > phi[i - 1] + EPS {
                return StabilityVerdict::blocked(BlockingWitness {
                    coalition: Coalition::singleton(i),
                    kind: BlockKind::Split,
                    anticipated_rate: alone,
                    prevailing_worth: phi[i - 1],
                });
            }
        }
    }
    StabilityVerdict::stable()
}

/// No agent strictly gains by splitting off alone. Deviating to `{i}` is the
/// only deviation that needs checking: any other one can still land on that
/// split and utilities are pessimistic over the resulting partitions.
pub fn u_stable(sys: &KellySystem, p: &Partition) -> Result<StabilityVerdict> {
    let phi = shapley_within(sys, p)?;
    Ok(u_verdict(sys, p, &phi))
}

/// Every partition with its U-stability verdict, canonical order.
pub fn stable_partition_scan(sys: &KellySystem) -> Result<Vec<(Partition, StabilityVerdict)>> {
    let n = sys.n();
    if n > MAX_SCAN_AGENTS {
        return Err(Error::cap("partition scan", n, MAX_SCAN_AGENTS));
    }
    all_partitions(n)?
        .into_par_iter()
        .map(|p| {
            let v = u_stable(sys, &p)?;
            Ok((p, v))
        })
        .collect()
}

/// The U-stable partitions only.
pub fn u_stable_partitions(sys: &KellySystem) -> Result<Vec<Partition>> {
    Ok(stable_partition_scan(sys)?
        .into_iter()
        .filter(|(_, v)| v.stable)
        .map(|(p, _)| p)
        .collect())
}

/// Φ^S for every nonempty S: shares of S's members under {S, singletons}.
fn deviation_shares(sys: &KellySystem) -> Result<HashMap<Coalition, Vec<f64>>> {
    let n = sys.n();
    Coalition::grand(n)
        .subsets()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|s| {
            let mut blocks = vec![s];
            if let Some(rest) = Coalition::grand(n).minus(s) {
                blocks.extend(rest.members().map(Coalition::singleton));
            }
            let q = Partition::new(n, blocks)?;
            let phi = shapley_within(sys, &q)?;
            Ok((s, s.members().map(|j| phi[j - 1]).collect()))
        })
        .collect()
}

fn c_verdict(
    sys: &KellySystem,
    p: &Partition,
    phi: &[f64],
    dev: &HashMap<Coalition, Vec<f64>>,
) -> StabilityVerdict {
    let u = u_verdict(sys, p, phi);
    if !u.stable {
        return u;
    }
    let mut cands: Vec<Coalition> = dev.keys().copied().filter(|s| !p.contains_block(*s)).collect();
    cands.sort();
    for s in cands {
        let big = &dev[&s];
        if s.members().zip(big).all(|(j, &v)| v > phi[j - 1] + EPS) {
            return StabilityVerdict::blocked(BlockingWitness {
                coalition: s,
                kind: classify(p, s),
                anticipated_rate: big.iter().sum(),
                prevailing_worth: s.members().map(|j| phi[j - 1]).sum(),
            });
        }
    }
    StabilityVerdict::stable()
}

/// U-stable, and no coalition S ∉ p whose members all strictly prefer their
/// shares under {S, singletons}.
pub fn c_stable(sys: &KellySystem, p: &Partition) -> Result<StabilityVerdict> {
    sys.check_n(p)?;
    if sys.n() > MAX_SCAN_AGENTS {
        return Err(Error::cap("C-stability check", sys.n(), MAX_SCAN_AGENTS));
    }
    let dev = deviation_shares(sys)?;
    let phi = shapley_within(sys, p)?;
    Ok(c_verdict(sys, p, &phi, &dev))
}

/// C-stability of every partition, canonical order.
pub fn c_stable_scan(sys: &KellySystem) -> Result<Vec<(Partition, StabilityVerdict)>> {
    let n = sys.n();
    if n > MAX_SCAN_AGENTS {
        return Err(Error::cap("C-stability scan", n, MAX_SCAN_AGENTS));
    }
    let dev = deviation_shares(sys)?;
    all_partitions(n)?
        .into_par_iter()
        .map(|p| {
            let phi = shapley_within(sys, &p)?;
            let v = c_verdict(sys, &p, &phi, &dev);
            Ok((p, v))
        })
        .collect()
}

/// Per-agent coalition proposals; agent `i` always proposes itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyProfile {
    n: usize,
    choices: Vec<Coalition>,
}

impl StrategyProfile {
    pub fn new(choices: Vec<Coalition>) -> Result<Self> {
        let n = choices.len();
        if n == 0 || n > MAX_REPRESENTABLE {
            return Err(Error::domain(format!("need 1..={MAX_REPRESENTABLE} choices, got {n}")));
        }
        let grand = Coalition::grand(n);
        for (k, &x) in choices.iter().enumerate() {
            if !x.contains(k + 1) {
                return Err(Error::domain(format!("agent {} must propose itself, got {x}", k + 1)));
            }
            if !x.is_subset_of(grand) {
                return Err(Error::domain(format!("proposal {x} has members outside 1..={n}")));
            }
        }
        Ok(StrategyProfile { n, choices })
    }

    /// Every agent proposes exactly its own block.
    pub fn natural(p: &Partition) -> Self {
        let choices = (1..=p.n()).map(|i| p.block_of(i)).collect();
        StrategyProfile { n: p.n(), choices }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn choices(&self) -> &[Coalition] {
        &self.choices
    }

    /// Mutual-consent neighbours of each agent (bitmask, self included).
    fn mutual(&self) -> Vec<u64> {
        (0..self.n)
            .map(|i| {
                let xi = self.choices[i];
                xi.members()
                    .filter(|&j| self.choices[j - 1].contains(i + 1))
                    .fold(0u64, |acc, j| acc | 1 << (j - 1))
            })
            .collect()
    }
}

/// Coarsest partitions whose coalitions are all mutual-consent cliques of
/// the adjacency `adj` (bit j−1 of `adj[i−1]` set when i and j agree).
fn clique_partitions(n: usize, adj: &[u64]) -> Vec<Partition> {
    fn go(adj: &[u64], left: u64, cur: &mut Vec<Coalition>, out: &mut Vec<Vec<Coalition>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        let first = left.trailing_zeros() as usize;
        let pool = adj[first] & left & !(1u64 << first);
        // every subset of the pool that is a clique, joined with `first`
        let mut sub = pool;
        loop {
            let block = sub | 1 << first;
            let is_clique = (0..64).filter(|b| sub & (1u64 << b) != 0).all(|b| adj[b] & block == block);
            if is_clique {
                cur.push(Coalition::from_bits(block).expect("nonempty"));
                go(adj, left & !block, cur, out);
                cur.pop();
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & pool;
        }
    }
    let mut raw = Vec::new();
    go(adj, Coalition::grand(n).bits(), &mut Vec::new(), &mut raw);
    let all: Vec<Partition> = raw
        .into_iter()
        .map(|b| Partition::new(n, b).expect("blocks cover 1..=n"))
        .collect();
    let mut keep: Vec<Partition> = all
        .iter()
        .filter(|p| !all.iter().any(|q| coarser_than(q, p).unwrap_or(false)))
        .cloned()
        .collect();
    keep.sort_by_key(|p| p.to_string());
    keep
}

/// All coarsest partitions consistent with mutual consent; possibly several.
pub fn partitions_from_profile(x: &StrategyProfile) -> Vec<Partition> {
    clique_partitions(x.n, &x.mutual())
}

/// U_i(x): the agent's smallest share over the partitions `x` can lead to.
pub fn player_utility(sys: &KellySystem, x: &StrategyProfile) -> Result<PayoffVector> {
    if x.n != sys.n() {
        return Err(Error::domain(format!("profile over {} agents for a system of {}", x.n, sys.n())));
    }
    let mut u = vec![f64::INFINITY; sys.n()];
    for p in partitions_from_profile(x) {
        for (ui, v) in u.iter_mut().zip(shapley_within(sys, &p)?) {
            *ui = ui.min(v);
        }
    }
    Ok(u)
}

/// Every partition arising from a pure NE of the proposal game. Profiles
/// only matter through their mutual-consent graph, so utilities are
/// tabulated per graph and the profile sweep is a lookup.
pub fn ne_partitions(sys: &KellySystem) -> Result<Vec<Partition>> {
    let n = sys.n();
    if n > MAX_NE_AGENTS {
        return Err(Error::cap("exhaustive NE search", n, MAX_NE_AGENTS));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let n_graphs = 1usize << pairs.len();

    let mut share_cache: HashMap<Partition, Vec<f64>> = HashMap::new();
    let mut graph_parts: Vec<Vec<Partition>> = Vec::with_capacity(n_graphs);
    let mut graph_util: Vec<Vec<f64>> = Vec::with_capacity(n_graphs);
    for g in 0..n_graphs {
        let mut adj: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        for (e, &(i, j)) in pairs.iter().enumerate() {
            if g & (1 << e) != 0 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
        let parts = clique_partitions(n, &adj);
        let mut u = vec![f64::INFINITY; n];
        for p in &parts {
            if !share_cache.contains_key(p) {
                share_cache.insert(p.clone(), shapley_within(sys, p)?);
            }
            for (ui, v) in u.iter_mut().zip(&share_cache[p]) {
                *ui = ui.min(*v);
            }
        }
        graph_parts.push(parts);
        graph_util.push(u);
    }

    // profile index: agent i's choice (bits over the others) at offset i·(n−1)
    let width = n - 1;
    let per = 1usize << width;
    let total = 1usize << (n * width);
    let wants = |i: usize, c: usize| -> u64 {
        let mut bits = 1u64 << i;
        for (b, j) in (0..n).filter(|&j| j != i).enumerate() {
            if c & (1 << b) != 0 {
                bits |= 1 << j;
            }
        }
        bits
    };
    let want_table: Vec<Vec<u64>> = (0..n).map(|i| (0..per).map(|c| wants(i, c)).collect()).collect();
    let graph_of: Vec<u32> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let w: Vec<u64> = (0..n).map(|i| want_table[i][(idx >> (i * width)) & (per - 1)]).collect();
            let mut g = 0u32;
            for (e, &(i, j)) in pairs.iter().enumerate() {
                if w[i] & (1 << j) != 0 && w[j] & (1 << i) != 0 {
                    g |= 1 << e;
                }
            }
            g
        })
        .collect();

    let is_ne: Vec<bool> = (0..total)
        .into_par_iter()
        .map(|idx| {
            (0..n).all(|i| {
                let shift = i * width;
                let base = idx & !((per - 1) << shift);
                let mine = graph_util[graph_of[idx] as usize][i];
                (0..per).all(|c| graph_util[graph_of[base | c << shift] as usize][i] <= mine + EPS)
            })
        })
        .collect();

    let mut seen: BTreeSet<u32> = BTreeSet::new();
    for idx in 0..total {
        if is_ne[idx] {
            seen.insert(graph_of[idx]);
        }
    }
    let mut out: Vec<Partition> = Vec::new();
    for g in seen {
        for p in &graph_parts[g as usize] {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
    }
    out.sort_by_key(|p| p.to_string());
    Ok(out)
}

/// Class label: GC, ALC, TTC (two pairs) or P<k>; suffix `o` when the adamant
/// player is absent or earns nothing. GC with an adamant player never does.
pub fn partition_class(sys: &KellySystem, p: &Partition) -> Result<String> {
    let ne = rsg_ne(sys, p)?;
    let base = if p.is_grand() {
        "GC".to_string()
    } else if p.is_all_singletons() {
        "ALC".to_string()
    } else if p.shape() == [2, 2] {
        "TTC".to_string()
    } else {
        format!("P{}", p.len())
    };
    Ok(if ne.adamant_significant() { base } else { base + "o" })
}

/// Distinct classes of the NE-partitions.
pub fn ne_classes(sys: &KellySystem) -> Result<BTreeSet<String>> {
    ne_partitions(sys)?.iter().map(|p| partition_class(sys, p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialOptimum {
    pub class: String,
    /// One optimal partition; any partition of the class does as well.
    pub partition: Partition,
    /// Σ of coalition utilities, adamant excluded.
    pub value: f64,
}

/// Social optimum: closed form for symmetric systems, otherwise exhaustive.
pub fn so_partition(sys: &KellySystem) -> Result<SocialOptimum> {
    use thresholds::*;
    let n = sys.n();
    if sys.is_symmetric() {
        let gc = Partition::grand(n);
        let Some(eta) = sys.adamant_factor().map(|_| sys.adamant_eta.unwrap_or(0.0)) else {
            return Ok(SocialOptimum {
                class: "GCo".into(),
                partition: gc,
                value: 1.0,
            });
        };
        if n == 1 || eta >= INV_SQRT2 || eta <= SQRT2_MINUS_1 {
            return Ok(SocialOptimum {
                class: "GC".into(),
                partition: gc,
                value: 1.0 / (1.0 + eta).powi(2),
            });
        }
        let half = n.div_ceil(2);
        let mut labels = vec![0usize; n];
        labels[half..].fill(1);
        let p2 = Partition::from_labels(&labels)?;
        let (class, value) = if eta <= 0.5 {
            ("P2o", 0.5)
        } else {
            ("P2", 2.0 / (1.0 + 2.0 * eta).powi(2))
        };
        return Ok(SocialOptimum {
            class: class.into(),
            partition: p2,
            value,
        });
    }
    so_exhaustive(sys)
}

/// Maximizes the coalitions' total utility over all partitions.
pub fn so_exhaustive(sys: &KellySystem) -> Result<SocialOptimum> {
    let n = sys.n();
    if n > MAX_SCAN_AGENTS {
        return Err(Error::cap("social optimum search", n, MAX_SCAN_AGENTS));
    }
    let mut best: Option<(Partition, f64)> = None;
    for p in all_partitions(n)? {
        let v = rsg_ne(sys, &p)?.coalition_total();
        if best.as_ref().is_none_or(|(_, b)| v > *b + EPS) {
            best = Some((p, v));
        }
    }
    let (partition, value) = best.expect("at least one partition");
    Ok(SocialOptimum {
        class: partition_class(sys, &partition)?,
        partition,
        value,
    })
}

/// SO total over worst NE total. Without an adamant player the optimum is GC
/// (total 1) and the worst NE is ALC, so this is 1/U^A.
pub fn poa(sys: &KellySystem) -> Result<f64> {
    let n = sys.n();
    let alc = rsg_ne(sys, &Partition::singletons(n))?.coalition_total();
    if !sys.has_adamant() {
        return Ok(1.0 / alc);
    }
    let so = if sys.is_symmetric() { so_partition(sys)? } else { so_exhaustive(sys)? };
    let worst = if n <= MAX_NE_AGENTS {
        let mut w = f64::INFINITY;
        for p in ne_partitions(sys)? {
            w = w.min(rsg_ne(sys, &p)?.coalition_total());
        }
        w
    } else {
        alc
    };
    Ok(so.value / worst)
}

/// The n > 4 symmetric closed form, by η band.
pub fn poa_symmetric_large(n: usize, eta: f64) -> f64 {
    use thresholds::*;
    let nf = n as f64;
    if eta > (nf - 1.0) / nf {
        ((1.0 + nf * eta) / (1.0 + eta)).powi(2) / nf
    } else if eta >= INV_SQRT2 {
        nf / (1.0 + eta).powi(2)
    } else if eta > 0.5 {
        2.0 * nf / (1.0 + 2.0 * eta).powi(2)
    } else if eta >= SQRT2_MINUS_1 {
        nf / 2.0
    } else {
        nf / (1.0 + eta).powi(2)
    }
}

/// Factors sorted nonincreasing.
fn sorted_desc(sys: &KellySystem) -> Vec<f64> {
    let mut l = sys.influence.clone();
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

fn rho(l: &[f64], j: usize) -> f64 {
    // 1-based j; ϱ_{n+1} = 1
    if j > l.len() {
        1.0
    } else {
        l[0] / (l[0] + l[j - 1])
    }
}

/// Measure of asymmetry I_A = min_{2≤j≤n} (ϱ_{j+1}² − ϱ_j²) / (c_j (1−ϱ_j)²).
pub fn moa(sys: &KellySystem) -> Result<f64> {
    if sys.has_adamant() {
        return Err(Error::domain("the asymmetry measure assumes no adamant player"));
    }
    let l = sorted_desc(sys);
    let n = l.len();
    Ok((2..=n)
        .map(|j| {
            let c = if j == 2 { 1.0 } else { j as f64 };
            (rho(&l, j + 1).powi(2) - rho(&l, j).powi(2)) / (c * (1.0 - rho(&l, j)).powi(2))
        })
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapAssumption {
    /// Every gap w_{j+1} − w_j, j ≥ 2, is at least w₁.
    A1,
    /// Same with w₃ = w₄ and the j = 3 gap skipped.
    A1Prime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsoluteStability {
    pub stable: bool,
    pub assumption: Option<GapAssumption>,
    /// First j at which the companion condition fails.
    pub failing_j: Option<usize>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Checks A.1 (or A.1′) and then A.2 (or A.2′). `stable` is the sufficient
/// and necessary verdict those assumptions give; with neither gap
/// assumption in force the answer is `false` and `assumption` is `None`.
pub fn absolute_stability_check(sys: &KellySystem) -> Result<AbsoluteStability> {
    if sys.has_adamant() {
        return Err(Error::domain("absolute stability assumes no adamant player"));
    }
    let l = sorted_desc(sys);
    let n = l.len();
    let w: Vec<f64> = l.iter().map(|x| 1.0 / x).collect();
    let gap_ok = |j: usize| w[j] - w[j - 1] >= w[0] * (1.0 - 1e-12);
    // gaps over j = 2..n−1, 1-based: w_{j+1} − w_j
    let a1 = (2..n).all(gap_ok);
    let a1_prime = n >= 4 && close(w[2], w[3]) && (2..n).filter(|&j| j != 3).all(gap_ok);
    let rho2 = |j: usize| rho(&l, j).powi(2);
    let a2_at = |j: usize| {
        let c = if j == 2 { 1.0 } else { j as f64 };
        rho2(j + 1) - rho2(j) >= c * (1.0 - rho(&l, j)).powi(2) * (1.0 - 1e-12)
    };
    if a1 {
        let failing_j = (2..=n).find(|&j| !a2_at(j));
        return Ok(AbsoluteStability {
            stable: failing_j.is_none(),
            assumption: Some(GapAssumption::A1),
            failing_j,
        });
    }
    if a1_prime {
        let (l1, l3) = (l[0], l[2]);
        let pair = ((2.0 * l1 - l3) / (2.0 * l1 + l3)).powi(2);
        let rho_2 = rho(&l, 2);
        let slack = 1.0 - 1e-12;
        let ok = |j: usize| match j {
            2 => pair >= (rho_2.powi(2) + (1.0 - rho_2).powi(2)) * slack,
            3 => rho2(4) - pair >= 3.0 * (l3 / (2.0 * l1 + l3)).powi(2) * slack,
            4 => (rho2(5) - rho2(4)) + (rho2(4) - pair) / 3.0 >= 4.0 * (1.0 - rho(&l, 3)).powi(2) * slack,
            _ => a2_at(j),
        };
        let failing_j = (2..=n).find(|&j| !ok(j));
        return Ok(AbsoluteStability {
            stable: failing_j.is_none(),
            assumption: Some(GapAssumption::A1Prime),
            failing_j,
        });
    }
    Ok(AbsoluteStability {
        stable: false,
        assumption: None,
        failing_j: None,
    })
}

/// Size test for symmetric systems: weak when the largest coalition exceeds
/// (k+1)²/k², k the number of coalitions.
pub fn weak_partition(sys: &KellySystem, p: &Partition) -> Result<bool> {
    sys.check_n(p)?;
    if !sys.is_symmetric() {
        return Err(Error::domain("the weakness test applies to identical agents only"));
    }
    let k = p.len() as f64;
    let m = p.shape()[0] as f64;
    Ok(m > ((k + 1.0) / k).powi(2))
}

/// Two or more identical strongest agents share a coalition while at least
/// three coalitions earn utility: returns whether λ̄_k lies strictly inside
/// the range that leaves such a partition a chance of U-stability. `None`
/// when the hypothesis does not apply.
pub fn identical_top_range(sys: &KellySystem, p: &Partition) -> Result<Option<bool>> {
    let ne = rsg_ne(sys, p)?;
    let top = sys.max_influence();
    let tops: Vec<usize> = (1..=sys.n()).filter(|&i| sys.influence[i - 1] == top).collect();
    let together = p.blocks().iter().any(|b| tops.iter().filter(|&&i| b.contains(i)).count() >= 2);
    let mut sig: Vec<f64> = p
        .blocks()
        .iter()
        .zip(&ne.coalition_utilities)
        .filter(|(_, &u)| u > 0.0)
        .map(|(&b, _)| sys.active_factor(b))
        .collect();
    if !together || sig.len() < 3 {
        return Ok(None);
    }
    sig.sort_by(|a, b| b.total_cmp(a));
    let k = sig.len() as f64;
    let head: f64 = sig[..sig.len() - 1].iter().map(|x| top / x).sum();
    let last = top / sig[sig.len() - 1];
    Ok(Some(head / (k - 2.0) > last && last > (head + 1.0) / (k - 1.0)))
}

/// Resource fraction per agent: coalition m gets λ̄_m ā_m / Σ λ̄ ā (the
/// adamant player included in the sum), split by the Shapley ratios.
pub fn spectral_shares(sys: &KellySystem, p: &Partition) -> Result<Vec<f64>> {
    let ne = rsg_ne(sys, p)?;
    let phi = shapley_within(sys, p)?;
    let bids: Vec<f64> = p
        .blocks()
        .iter()
        .zip(&ne.aggregate_actions)
        .map(|(&b, &a)| sys.active_factor(b) * a)
        .collect();
    let adamant_bid = sys.adamant_factor().zip(ne.adamant_action).map_or(0.0, |(f, a)| f * a);
    let total: f64 = bids.iter().sum::<f64>() + adamant_bid;
    let mut out = vec![0.0; sys.n()];
    for (&b, &bid) in p.blocks().iter().zip(&bids) {
        // a lone bidder facing nobody takes everything at vanishing cost
        let frac = if total > 0.0 { bid / total } else { 1.0 / p.len() as f64 };
        let worth: f64 = b.members().map(|i| phi[i - 1]).sum();
        for i in b.members() {
            out[i - 1] = if worth > 0.0 {
                frac * phi[i - 1] / worth
            } else {
                frac / b.len() as f64
            };
        }
    }
    Ok(out)
}

/// λ_j = base − α_j δ.
pub fn delta_family(base: f64, alpha: &[f64], delta: f64) -> Vec<f64> {
    alpha.iter().map(|a| base - a * delta).collect()
}

/// U-stable partitions of the δ-family at each grid point.
pub fn delta_sweep(
    base: f64,
    alpha: &[f64],
    gamma: f64,
    deltas: &[f64],
) -> Result<Vec<(f64, Vec<Partition>)>> {
    deltas
        .par_iter()
        .map(|&d| {
            let sys = KellySystem::new(delta_family(base, alpha, d), None, gamma)?;
            Ok((d, u_stable_partitions(&sys)?))
        })
        .collect()
}

/// Evenly spaced grid `lo, lo+step, …` up to `hi` (inclusive within half a step).
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let k = ((hi - lo) / step + 0.5).floor() as usize;
    (0..=k).map(|i| lo + i as f64 * step).collect()
}

/// First grid value at which `p` is stable.
pub fn first_stable(rows: &[(f64, Vec<Partition>)], p: &Partition) -> Option<f64> {
    rows.iter().find(|(_, s)| s.contains(p)).map(|(d, _)| *d)
}
