//! Wardrop split of the market across coalitions, pessimal worths, and the
//! per-server load Ψ with its maximizers k*.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::erlang::{blocking_unchecked, inverse_log, log_inv_blocking};
use crate::error::{Error, Result};
use crate::partition::{enumerate_partitions, Coalition, Partition, MAX_REPRESENTABLE};

/// Relative tie tolerance when collecting the argmax set k*.
pub const KSTAR_TIE_TOL: f64 = 1e-12;

/// How λ̲_Q is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PessimalMode {
    /// Q against the single merged opponent 𝒩∖Q.
    #[default]
    TwoCoalition,
    /// Minimum over every arrangement of the opponents.
    Exhaustive,
}

/// Per-agent servers, market size Λ and service rate μ.
///
/// Holds a cache of pessimal rates and WE solves; the cache is keyed by
/// coalition bits, so results are deterministic and racing inserts are harmless.
pub struct QueueSystem {
    servers: Vec<u32>,
    lambda: f64,
    mu: f64,
    mode: PessimalMode,
    pessimal: Mutex<HashMap<u64, f64>>,
    we_cache: Mutex<HashMap<Vec<u64>, WardropSplit>>,
}

impl Clone for QueueSystem {
    fn clone(&self) -> Self {
        QueueSystem {
            servers: self.servers.clone(),
            lambda: self.lambda,
            mu: self.mu,
            mode: self.mode,
            pessimal: Mutex::new(self.pessimal.lock().unwrap().clone()),
            we_cache: Mutex::new(self.we_cache.lock().unwrap().clone()),
        }
    }
}

impl std::fmt::Debug for QueueSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QueueSystem")
            .field("servers", &self.servers)
            .field("lambda", &self.lambda)
            .field("mu", &self.mu)
            .field("mode", &self.mode)
            .finish()
    }
}

impl QueueSystem {
    pub fn new(servers: Vec<u32>, lambda: f64, mu: f64) -> Result<Self> {
        if servers.is_empty() {
            return Err(Error::domain("at least one provider is required"));
        }
        if servers.len() > MAX_REPRESENTABLE {
            return Err(Error::cap("provider count", servers.len(), MAX_REPRESENTABLE));
        }
        if let Some(i) = servers.iter().position(|&s| s == 0) {
            return Err(Error::domain(format!("provider {} has no servers", i + 1)));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("arrival rate {lambda} must be positive")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::domain(format!("service rate {mu} must be positive")));
        }
        Ok(QueueSystem {
            servers,
            lambda,
            mu,
            mode: PessimalMode::TwoCoalition,
            pessimal: Mutex::new(HashMap::new()),
            we_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_pessimal_mode(mut self, mode: PessimalMode) -> Self {
        self.mode = mode;
        self.pessimal.get_mut().unwrap().clear();
        self
    }

    /// Same servers and μ at a different Λ, with a fresh cache.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Ok(QueueSystem::new(self.servers.clone(), lambda, self.mu)?.with_pessimal_mode(self.mode))
    }

    pub fn n(&self) -> usize {
        self.servers.len()
    }

    pub fn servers(&self) -> &[u32] {
        &self.servers
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn total_servers(&self) -> u32 {
        self.servers.iter().sum()
    }

    /// N_C.
    pub fn servers_of(&self, c: Coalition) -> u32 {
        c.members().map(|i| self.servers[i - 1]).sum()
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n())
    }

    fn check_partition(&self, p: &Partition) -> Result<()> {
        if p.n() != self.n() {
            return Err(Error::domain(format!(
                "partition over {} agents for a system of {}",
                p.n(),
                self.n()
            )));
        }
        Ok(())
    }

    /// Wardrop equilibrium of `p`; rates follow `p.blocks()` order.
    pub fn solve_we(&self, p: &Partition) -> Result<WardropSplit> {
        self.check_partition(p)?;
        Ok(self.we(p))
    }

    pub(crate) fn we(&self, p: &Partition) -> WardropSplit {
        let key: Vec<u64> = p.blocks().iter().map(|b| b.bits()).collect();
        if let Some(w) = self.we_cache.lock().unwrap().get(&key) {
            return w.clone();
        }
        let sizes: Vec<u32> = p.blocks().iter().map(|&b| self.servers_of(b)).collect();
        let w = we_by_servers(&sizes, self.lambda, self.mu);
        self.we_cache.lock().unwrap().insert(key, w.clone());
        w
    }

    /// λ_C^P for a block `c` of `p`.
    pub fn rate_in(&self, p: &Partition, c: Coalition) -> f64 {
        let idx = p
            .blocks()
            .iter()
            .position(|&b| b == c)
            .expect("coalition is a block of the partition");
        self.we(p).rates[idx]
    }

    /// λ̲_Q, the least rate Q can be held to by the outsiders.
    pub fn pessimal_rate(&self, q: Coalition) -> f64 {
        if q == self.grand() {
            return self.lambda;
        }
        if let Some(&v) = self.pessimal.lock().unwrap().get(&q.bits()) {
            return v;
        }
        let v = match self.mode {
            PessimalMode::TwoCoalition => {
                let rest = self.grand().minus(q).unwrap();
                let w = we_by_servers(&[self.servers_of(q), self.servers_of(rest)], self.lambda, self.mu);
                w.rates[0]
            }
            PessimalMode::Exhaustive => self.pessimal_exhaustive(q),
        };
        self.pessimal.lock().unwrap().insert(q.bits(), v);
        v
    }

    fn pessimal_exhaustive(&self, q: Coalition) -> f64 {
        let rest: Vec<usize> = self.grand().minus(q).unwrap().to_vec();
        let nq = self.servers_of(q);
        enumerate_partitions(rest.len(), MAX_REPRESENTABLE)
            .expect("nonempty remainder")
            .map(|sub| {
                let mut sizes = vec![nq];
                sizes.extend(sub.blocks().iter().map(|b| b.members().map(|k| self.servers[rest[k - 1] - 1]).sum::<u32>()));
                we_by_servers(&sizes, self.lambda, self.mu).rates[0]
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Ψ(k) = rate of a k-server coalition facing one (N−k)-server coalition, per server.
    pub fn psi(&self, k: u32) -> Result<f64> {
        let n = self.total_servers();
        if k == 0 || k >= n {
            return Err(Error::domain(format!("k = {k} must lie strictly between 0 and N = {n}")));
        }
        Ok(we_by_servers(&[k, n - k], self.lambda, self.mu).rates[0] / k as f64)
    }

    /// Larger-side server counts k ≥ N − k reachable by some two-coalition split.
    pub fn realizable_k(&self) -> Vec<u32> {
        let n = self.total_servers();
        let mut ks: Vec<u32> = self
            .grand()
            .strict_subsets()
            .map(|c| self.servers_of(c))
            .filter(|&k| 2 * k >= n)
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// argmax of Ψ over realizable k; near-ties within [`KSTAR_TIE_TOL`] are all kept.
    pub fn k_star(&self) -> Vec<u32> {
        let vals: Vec<(u32, f64)> = self
            .realizable_k()
            .into_iter()
            .map(|k| (k, self.psi(k).expect("realizable k is interior")))
            .collect();
        let best = vals.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        vals.into_iter()
            .filter(|&(_, v)| best - v <= KSTAR_TIE_TOL * best.abs())
            .map(|(k, _)| k)
            .collect()
    }

    /// ℂ*: strict coalitions with N_C ∈ k*, canonical order.
    pub fn c_star_set(&self) -> Result<Vec<Coalition>> {
        let ks = self.k_star();
        let mut out: Vec<Coalition> = self
            .grand()
            .strict_subsets()
            .filter(|&c| ks.contains(&self.servers_of(c)))
            .collect();
        if out.is_empty() {
            return Err(Error::domain("no strict coalition realizes k*"));
        }
        out.sort();
        Ok(out)
    }
}

/// Per-coalition arrival rates at the Wardrop equilibrium and the common blocking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WardropSplit {
    pub rates: Vec<f64>,
    pub common_blocking: f64,
}

impl WardropSplit {
    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// WE for coalitions given only their server totals.
///
/// Bisection on ln B*: the total offered load Σ a_C(B) is increasing in B,
/// and at B = B(min N_C, Λ/μ) the smallest coalition alone already takes Λ/μ.
/// The search runs to the last representable bracket, then keeps the end
/// with the smaller market residual.
pub fn we_by_servers(sizes: &[u32], lambda: f64, mu: f64) -> WardropSplit {
    assert!(!sizes.is_empty() && sizes.iter().all(|&s| s > 0));
    let target = lambda / mu;
    if sizes.len() == 1 {
        return WardropSplit {
            rates: vec![lambda],
            common_blocking: blocking_unchecked(sizes[0], target),
        };
    }
    // work in L = ln(1/B); loads fall as L grows
    let loads = |l: f64| -> f64 { sizes.iter().map(|&m| inverse_log(m, l)).sum() };
    let smallest = *sizes.iter().min().unwrap();
    let mut l_lo = log_inv_blocking(smallest, target);
    let mut step = 1.0f64;
    let mut l_hi = l_lo + step;
    while loads(l_hi) >= target {
        l_lo = l_hi;
        step *= 2.0;
        l_hi += step;
    }
    loop {
        let mid = 0.5 * (l_lo + l_hi);
        if !(mid > l_lo && mid < l_hi) {
            break;
        }
        if loads(mid) >= target {
            l_lo = mid;
        } else {
            l_hi = mid;
        }
    }
    let rates_at = |l: f64| -> Vec<f64> { sizes.iter().map(|&m| mu * inverse_log(m, l)).collect() };
    let res = |r: &Vec<f64>| (r.iter().sum::<f64>() - lambda).abs();
    let (r_lo, r_hi) = (rates_at(l_lo), rates_at(l_hi));
    let (rates, l) = if res(&r_lo) <= res(&r_hi) { (r_lo, l_lo) } else { (r_hi, l_hi) };
    debug_assert!(
        res(&rates) <= 1e-10 * lambda,
        "WE residual {} for sizes {sizes:?} at Λ = {lambda}",
        res(&rates)
    );
    WardropSplit {
        rates,
        common_blocking: (-l).exp(),
    }
}
