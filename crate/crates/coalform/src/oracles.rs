//! Slow reference implementations for tests.
//!
//! Everything here works from the definitions and shares no solver code with
//! the engine: its own Erlang-B, its own Wardrop split, its own RSG solvers,
//! its own partition generator and Shapley by permutations. Only the data
//! types (`Coalition`, `Partition`, system accessors) are shared.

use crate::error::{Error, Result};
use crate::kelly::KellySystem;
use crate::partition::{Coalition, Configuration, Partition};
use crate::queue::{BlockKind, BlockingWitness};
use crate::wardrop::QueueSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_agents: usize,
    pub grid_points: usize,
    pub max_iters: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_agents: 6,
            grid_points: 2001,
            max_iters: 10_000,
        }
    }
}

impl OracleBudget {
    pub fn new(max_agents: usize, grid_points: usize, max_iters: usize) -> Result<Self> {
        if max_agents == 0 || grid_points < 2 || max_iters == 0 {
            return Err(Error::domain("oracle budget fields must be positive (grid_points ≥ 2)"));
        }
        Ok(OracleBudget {
            max_agents,
            grid_points,
            max_iters,
        })
    }
}

fn cap(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::cap(what, n, max))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// set partitions

/// All set partitions of `items` as lists of blocks (restricted growth strings).
pub fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let k = items.len();
    let mut out = Vec::new();
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut rgs = vec![0usize; k];
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        let mut p = vec![Vec::new(); blocks];
        for (i, &b) in rgs.iter().enumerate() {
            p[b].push(items[i]);
        }
        out.push(p);
        // next restricted growth string
        let mut i = k - 1;
        loop {
            if i == 0 {
                return out;
            }
            let max_before = *rgs[..i].iter().max().unwrap();
            if rgs[i] <= max_before {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

fn to_partition(n: usize, blocks: &[Vec<usize>]) -> Partition {
    let bs = blocks.iter().map(|b| Coalition::from_members(b).expect("nonempty")).collect();
    Partition::new(n, bs).expect("covers 1..=n")
}

// ---------------------------------------------------------------------------
// queueing

fn ln_fact(k: u32) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// ln B(m, a) from the direct sum, evaluated with log-sum-exp.
pub fn ln_erlang_b(m: u32, ln_a: f64) -> f64 {
    let terms: Vec<f64> = (0..=m).map(|k| k as f64 * ln_a - ln_fact(k)).collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
    terms[m as usize] - lse
}

/// Root of an increasing `f` on [lo, hi] with f(lo) ≤ 0 ≤ f(hi), Illinois variant.
fn illinois(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo >= 0.0 {
        return lo;
    }
    if fhi <= 0.0 {
        return hi;
    }
    let mut side = 0i8;
    for _ in 0..300 {
        let x = (lo * fhi - hi * flo) / (fhi - flo);
        let x = if x > lo && x < hi { x } else { 0.5 * (lo + hi) };
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Offered load with blocking e^ℓ on m servers, never above `rho`.
fn load_at(m: u32, ell: f64, ln_rho: f64) -> f64 {
    illinois(|x| ln_erlang_b(m, x) - ell, ln_rho - 700.0, ln_rho).exp()
}

/// Rates at the Wardrop equilibrium (equal blocking) for the given server totals.
pub fn wardrop_rates(sizes: &[u32], lambda: f64, mu: f64) -> Vec<f64> {
    if sizes.len() == 1 {
        return vec![lambda];
    }
    let rho = lambda / mu;
    let ln_rho = rho.ln();
    let k = sizes.len() as f64;
    let lo = sizes.iter().map(|&m| ln_erlang_b(m, (rho / k).ln())).fold(f64::INFINITY, f64::min);
    let hi = sizes.iter().map(|&m| ln_erlang_b(m, ln_rho)).fold(f64::INFINITY, f64::min);
    let total = |ell: f64| sizes.iter().map(|&m| load_at(m, ell, ln_rho)).sum::<f64>() - rho;
    let ell = illinois(total, lo, hi);
    let loads: Vec<f64> = sizes.iter().map(|&m| load_at(m, ell, ln_rho)).collect();
    // remove the last bit of residual proportionally
    let s: f64 = loads.iter().sum();
    loads.iter().map(|a| a / s * lambda).collect()
}

/// λ̲_Q by brute force: Q's WE rate minimized over every arrangement of the others.
pub fn pessimal_rate_exhaustive(sys: &QueueSystem, q: Coalition) -> Result<f64> {
    let n = sys.n();
    cap("exhaustive pessimal rate", n, 6)?;
    let members: Vec<usize> = (1..=n).filter(|&i| !q.contains(i)).collect();
    if members.is_empty() {
        return Ok(sys.lambda());
    }
    let nq: u32 = q.members().map(|i| sys.servers()[i - 1]).sum();
    let mut best = f64::INFINITY;
    for arr in set_partitions(&members) {
        let mut sizes = vec![nq];
        sizes.extend(arr.iter().map(|b| b.iter().map(|&i| sys.servers()[i - 1]).sum::<u32>()));
        best = best.min(wardrop_rates(&sizes, sys.lambda(), sys.mu())[0]);
    }
    Ok(best)
}

/// First coalition Q ∉ p, in lexicographic member order, whose pessimal rate
/// strictly exceeds its members' current payoff.
pub fn gbpa_exhaustive_witness(sys: &QueueSystem, cfg: &Configuration) -> Result<Option<BlockingWitness>> {
    let n = sys.n();
    cap("exhaustive GB-PA scan", n, 6)?;
    let p = &cfg.partition;
    let mut qs: Vec<Vec<usize>> = (1u64..(1 << n) - 1)
        .map(|bits| (1..=n).filter(|i| bits & (1 << (i - 1)) != 0).collect())
        .collect();
    qs.sort();
    for m in qs {
        let q = Coalition::from_members(&m)?;
        if p.blocks().contains(&q) {
            continue;
        }
        let lo = pessimal_rate_exhaustive(sys, q)?;
        let prev: f64 = m.iter().map(|&i| cfg.payoff[i - 1]).sum();
        if lo - prev > 1e-9 * lo.abs().max(prev.abs()) {
            let touched: Vec<&Coalition> = p.blocks().iter().filter(|b| m.iter().any(|&i| b.contains(i))).collect();
            let kind = if touched.iter().all(|b| b.members().all(|i| m.contains(&i))) {
                BlockKind::Merger
            } else if touched.len() == 1 {
                BlockKind::Split
            } else {
                BlockKind::General
            };
            return Ok(Some(BlockingWitness {
                coalition: q,
                kind,
                anticipated_rate: lo,
                prevailing_worth: prev,
            }));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Kelly

const KELLY_TOL: f64 = 1e-12;

fn bidder_factors(sys: &KellySystem, blocks: &[Vec<usize>]) -> Vec<f64> {
    let mut f: Vec<f64> = blocks
        .iter()
        .map(|b| b.iter().map(|&i| sys.influence()[i - 1]).fold(0.0, f64::max))
        .collect();
    if let Some(e) = sys.adamant_eta() {
        if e > 0.0 {
            f.push(e * sys.influence().iter().copied().fold(0.0, f64::max));
        }
    }
    f
}

/// NE utilities of bidders with factors `f`, from the fixed point in the
/// total effective bid T: each bids max(0, T − γT²/λ), and the bids add to T.
pub fn rsg_bisection(f: &[f64], gamma: f64) -> Vec<f64> {
    if f.len() == 1 {
        return vec![1.0];
    }
    // Σ max(0, 1 − γT/λ) = 1, decreasing in T
    let h = |t: f64| f.iter().map(|l| (1.0 - gamma * t / l).max(0.0)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, f.iter().copied().fold(0.0, f64::max) / gamma);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    f.iter()
        .map(|l| {
            let y = (t - gamma * t * t / l).max(0.0);
            // share y/T less cost γ·(y/λ)
            if y <= 0.0 {
                0.0
            } else {
                y / t - gamma * y / l
            }
        })
        .collect()
}

fn utility_of(sys: &KellySystem, blocks: &[Vec<usize>], idx: usize) -> f64 {
    rsg_bisection(&bidder_factors(sys, blocks), sys.gamma())[idx]
}

fn blocks_of(p: &Partition) -> Vec<Vec<usize>> {
    p.blocks().iter().map(|b| b.to_vec()).collect()
}

/// ν_C: the least utility C can get while the rest of its own coalition
/// rearranges freely and every other coalition stays put.
pub fn kelly_worth(sys: &KellySystem, p: &Partition, c: &[usize]) -> f64 {
    let all = blocks_of(p);
    let home = all.iter().position(|b| b.contains(&c[0])).expect("member of some block");
    let rest: Vec<usize> = all[home].iter().copied().filter(|i| !c.contains(i)).collect();
    let others: Vec<Vec<usize>> = all.iter().enumerate().filter(|&(j, _)| j != home).map(|(_, b)| b.clone()).collect();
    set_partitions(&rest)
        .into_iter()
        .map(|arr| {
            let mut blocks = vec![c.to_vec()];
            blocks.extend(arr);
            blocks.extend(others.iter().cloned());
            utility_of(sys, &blocks, 0)
        })
        .fold(f64::INFINITY, f64::min)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

/// Shapley shares by averaging marginal contributions over every ordering.
pub fn kelly_shares(sys: &KellySystem, p: &Partition) -> Vec<f64> {
    let mut phi = vec![0.0; sys.n()];
    for b in blocks_of(p) {
        let perms = permutations(&b);
        let count = perms.len() as f64;
        for order in perms {
            let mut before: Vec<usize> = Vec::new();
            let mut prev = 0.0;
            for &i in &order {
                before.push(i);
                let mut sorted = before.clone();
                sorted.sort();
                let v = kelly_worth(sys, p, &sorted);
                phi[i - 1] += (v - prev) / count;
                prev = v;
            }
        }
    }
    phi
}

/// Partitions a profile leads to: mutual-consent coalitions, coarsest only.
pub fn profile_partitions(n: usize, choices: &[Vec<usize>]) -> Vec<Partition> {
    let agree = |i: usize, j: usize| choices[i - 1].contains(&j) && choices[j - 1].contains(&i);
    let items: Vec<usize> = (1..=n).collect();
    let ok: Vec<Vec<Vec<usize>>> = set_partitions(&items)
        .into_iter()
        .filter(|p| p.iter().all(|b| b.iter().all(|&i| b.iter().all(|&j| i == j || agree(i, j)))))
        .collect();
    let inside = |fine: &Vec<Vec<usize>>, coarse: &Vec<Vec<usize>>| {
        fine.iter().all(|b| coarse.iter().any(|c| b.iter().all(|i| c.contains(i))))
    };
    ok.iter()
        .filter(|p| !ok.iter().any(|q| q.len() < p.len() && inside(p, q)))
        .map(|p| to_partition(n, p))
        .collect()
}

/// U_i(x) for every agent: least share over the profile's partitions.
pub fn profile_utility(sys: &KellySystem, choices: &[Vec<usize>]) -> Vec<f64> {
    let mut u = vec![f64::INFINITY; sys.n()];
    for p in profile_partitions(sys.n(), choices) {
        for (ui, v) in u.iter_mut().zip(kelly_shares(sys, &p)) {
            *ui = ui.min(v);
        }
    }
    u
}

/// Every proposal agent i can make (always containing i).
fn proposals(n: usize, i: usize) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (1..=n).filter(|&j| j != i).collect();
    (0u32..1 << others.len())
        .map(|mask| {
            let mut x: Vec<usize> = others.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &j)| j).collect();
            x.push(i);
            x.sort();
            x
        })
        .collect()
}

/// Is the profile where everyone proposes its own block an NE?
pub fn natural_profile_is_ne(sys: &KellySystem, p: &Partition) -> Result<bool> {
    let n = sys.n();
    cap("natural profile NE check", n, 4)?;
    let natural: Vec<Vec<usize>> = (1..=n)
        .map(|i| p.blocks().iter().find(|b| b.contains(i)).unwrap().to_vec())
        .collect();
    let base = profile_utility(sys, &natural);
    for i in 1..=n {
        for alt in proposals(n, i) {
            let mut x = natural.clone();
            x[i - 1] = alt;
            if profile_utility(sys, &x)[i - 1] > base[i - 1] + KELLY_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All partitions reached by some pure NE, by tabulating U over every
/// profile. Sorted by their text form.
pub fn exhaustive_ne_partitions(sys: &KellySystem) -> Result<Vec<Partition>> {
    let n = sys.n();
    cap("exhaustive NE search", n, 4)?;
    let per: Vec<Vec<Vec<usize>>> = (1..=n).map(|i| proposals(n, i)).collect();
    let width = per[0].len();
    let total = width.pow(n as u32);
    let digits = |mut idx: usize| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let d = idx % width;
                idx /= width;
                d
            })
            .collect()
    };
    let table: Vec<Vec<f64>> = (0..total)
        .map(|idx| {
            let x: Vec<Vec<usize>> = digits(idx).iter().enumerate().map(|(i, &d)| per[i][d].clone()).collect();
            profile_utility(sys, &x)
        })
        .collect();
    let mut out: Vec<Partition> = Vec::new();
    for idx in 0..total {
        let d = digits(idx);
        let stable = (0..n).all(|i| {
            let stride = width.pow(i as u32);
            let base = idx - d[i] * stride;
            (0..width).all(|alt| table[base + alt * stride][i] <= table[idx][i] + KELLY_TOL)
        });
        if stable {
            let x: Vec<Vec<usize>> = d.iter().enumerate().map(|(i, &k)| per[i][k].clone()).collect();
            for q in profile_partitions(n, &x) {
                if !out.contains(&q) {
                    out.push(q);
                }
            }
        }
    }
    out.sort_by_key(|q| q.to_string());
    Ok(out)
}

/// Utilities and actions reached by damped grid best responses.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseOutcome {
    pub utilities: Vec<f64>,
    pub actions: Vec<f64>,
    pub adamant_utility: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn payoff(l: f64, a: f64, others: f64, gamma: f64) -> f64 {
    let bid = l * a;
    let tot = bid + others;
    let share = if tot > 0.0 { bid / tot } else { 0.0 };
    share - gamma * a
}

fn best_response(l: f64, others: f64, gamma: f64, a_max: f64, grid: usize) -> f64 {
    let step = a_max / (grid - 1) as f64;
    let (mut k_best, mut v_best) = (0usize, f64::NEG_INFINITY);
    for k in 0..grid {
        let v = payoff(l, k as f64 * step, others, gamma);
        if v > v_best {
            k_best = k;
            v_best = v;
        }
    }
    // golden-section polish on the two cells around the best grid point
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut lo = (k_best as f64 - 1.0).max(0.0) * step;
    let mut hi = ((k_best + 1) as f64 * step).min(a_max);
    let f = |a: f64| payoff(l, a, others, gamma);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let polished = 0.5 * (lo + hi);
    if f(polished) >= v_best {
        polished
    } else {
        k_best as f64 * step
    }
}

/// Damped (θ = 1/2) grid best-response dynamics on the coalitions' aggregate
/// actions, started from a common positive point.
pub fn best_response_rsg(sys: &KellySystem, p: &Partition, budget: OracleBudget) -> Result<BestResponseOutcome> {
    cap("best-response oracle", sys.n(), budget.max_agents)?;
    let f = bidder_factors(sys, &blocks_of(p));
    let k = p.len();
    let gamma = sys.gamma();
    let a_max = sys.action_bound();
    let mut a = vec![a_max / (4.0 * f.len() as f64); f.len()];
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..budget.max_iters {
        iterations = it + 1;
        let bids: Vec<f64> = f.iter().zip(&a).map(|(l, x)| l * x).collect();
        let total: f64 = bids.iter().sum();
        let next: Vec<f64> = (0..f.len())
            .map(|m| {
                let br = best_response(f[m], total - bids[m], gamma, a_max, budget.grid_points);
                0.5 * a[m] + 0.5 * br
            })
            .collect();
        let delta = next.iter().zip(&a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        a = next;
        if delta < 1e-9 {
            converged = true;
            break;
        }
    }
    let bids: Vec<f64> = f.iter().zip(&a).map(|(l, x)| l * x).collect();
    let total: f64 = bids.iter().sum();
    let u: Vec<f64> = (0..f.len())
        .map(|m| if f.len() == 1 { 1.0 } else { payoff(f[m], a[m], total - bids[m], gamma) })
        .collect();
    Ok(BestResponseOutcome {
        utilities: u[..k].to_vec(),
        actions: a[..k].to_vec(),
        adamant_utility: u.get(k).copied(),
        iterations,
        converged,
    })
}
