//! Agents, coalitions and partitions, plus the enumerators both games share.
//!
//! Agents are numbered `1..=n`. A coalition is a bitmask (bit `i-1` holds
//! agent `i`), so `n` is limited to 64 by representation and to
//! [`DEFAULT_MAX_AGENTS`] by the exhaustive enumerators.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest agent count the exhaustive enumerators accept by default.
pub const DEFAULT_MAX_AGENTS: usize = 12;

/// Hard representation limit of [`Coalition`].
pub const MAX_REPRESENTABLE: usize = 64;

/// The strategic agents `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentSet {
    n: usize,
}

impl AgentSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("an agent set needs at least one agent"));
        }
        if n > MAX_REPRESENTABLE {
            return Err(Error::cap("agent set", n, MAX_REPRESENTABLE));
        }
        Ok(AgentSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n)
    }
}

/// A nonempty set of agents. Ordering is lexicographic on the sorted member list.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct Coalition(u64);

impl Coalition {
    pub fn from_bits(bits: u64) -> Result<Self> {
        if bits == 0 {
            return Err(Error::domain("a coalition cannot be empty"));
        }
        Ok(Coalition(bits))
    }

    /// Builds from 1-based member labels; duplicates are ignored.
    pub fn from_members(members: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &m in members {
            if m == 0 || m > MAX_REPRESENTABLE {
                return Err(Error::domain(format!("agent label {m} out of range")));
            }
            bits |= 1 << (m - 1);
        }
        Coalition::from_bits(bits)
    }

    pub fn singleton(agent: usize) -> Self {
        assert!((1..=MAX_REPRESENTABLE).contains(&agent), "agent {agent} out of range");
        Coalition(1 << (agent - 1))
    }

    pub fn grand(n: usize) -> Self {
        assert!((1..=MAX_REPRESENTABLE).contains(&n));
        if n == 64 {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << n) - 1)
        }
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn contains(self, agent: usize) -> bool {
        (1..=MAX_REPRESENTABLE).contains(&agent) && self.0 & (1 << (agent - 1)) != 0
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_strict_subset_of(self, other: Coalition) -> bool {
        self.is_subset_of(other) && self != other
    }

    pub fn intersects(self, other: Coalition) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    /// `self ∖ other`, or `None` when nothing is left.
    pub fn minus(self, other: Coalition) -> Option<Coalition> {
        let b = self.0 & !other.0;
        (b != 0).then_some(Coalition(b))
    }

    pub fn min_member(self) -> usize {
        self.0.trailing_zeros() as usize + 1
    }

    /// Members in increasing order.
    pub fn members(self) -> Members {
        Members(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.members().collect()
    }

    /// All nonempty strict subsets, in increasing bitmask order.
    pub fn strict_subsets(self) -> impl Iterator<Item = Coalition> {
        let full = self.0;
        let mut sub = 0u64;
        std::iter::from_fn(move || {
            // next submask above `sub` in the lattice of `full`
            sub = sub.wrapping_sub(full) & full;
            (sub != 0 && sub != full).then_some(Coalition(sub))
        })
    }

    /// All nonempty subsets including `self`.
    pub fn subsets(self) -> impl Iterator<Item = Coalition> {
        self.strict_subsets().chain(std::iter::once(self))
    }
}

pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i + 1)
    }
}

impl Ord for Coalition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.members().cmp(other.members())
    }
}

impl PartialOrd for Coalition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, m) in self.members().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Coalition> for Vec<usize> {
    fn from(c: Coalition) -> Self {
        c.to_vec()
    }
}

impl TryFrom<Vec<usize>> for Coalition {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Coalition::from_members(&v)
    }
}

/// Disjoint exhaustive coalitions over `1..=n`, kept in canonical order
/// (blocks sorted by smallest member).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Partition {
    n: usize,
    blocks: Vec<Coalition>,
}

impl Partition {
    pub fn new(n: usize, mut blocks: Vec<Coalition>) -> Result<Self> {
        AgentSet::new(n)?;
        let grand = Coalition::grand(n).bits();
        let mut seen = 0u64;
        for b in &blocks {
            if b.bits() & !grand != 0 {
                return Err(Error::domain(format!("{b} has members outside 1..={n}")));
            }
            if b.bits() & seen != 0 {
                return Err(Error::domain(format!("{b} overlaps another coalition")));
            }
            seen |= b.bits();
        }
        if seen != grand {
            let missing = Coalition(grand & !seen);
            return Err(Error::domain(format!("agents {missing} are not covered")));
        }
        blocks.sort_by_key(|b| b.min_member());
        Ok(Partition { n, blocks })
    }

    pub fn grand(n: usize) -> Self {
        Partition::new(n, vec![Coalition::grand(n)]).expect("valid n")
    }

    pub fn singletons(n: usize) -> Self {
        Partition::new(n, (1..=n).map(Coalition::singleton).collect()).expect("valid n")
    }

    /// From block labels (`labels[i]` is agent `i+1`'s block id).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let n = labels.len();
        let mut by_label: Vec<(usize, u64)> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            match by_label.iter_mut().find(|(k, _)| *k == l) {
                Some((_, bits)) => *bits |= 1 << i,
                None => by_label.push((l, 1 << i)),
            }
        }
        Partition::new(n, by_label.into_iter().map(|(_, b)| Coalition(b)).collect())
    }

    /// Parses `{{1,2},{3}}` for a known agent count.
    pub fn parse_with_n(s: &str, n: usize) -> Result<Self> {
        let blocks = parse_blocks(s)?;
        Partition::new(n, blocks).map_err(|e| Error::Parse {
            token: s.trim().to_string(),
            reason: e.to_string(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Coalition] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains_block(&self, c: Coalition) -> bool {
        self.blocks.contains(&c)
    }

    /// Index of the block containing `agent`.
    pub fn block_index_of(&self, agent: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(agent))
            .expect("agent outside partition")
    }

    pub fn block_of(&self, agent: usize) -> Coalition {
        self.blocks[self.block_index_of(agent)]
    }

    pub fn is_grand(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_all_singletons(&self) -> bool {
        self.blocks.len() == self.n
    }

    /// The partition `{q} ∪ {C ∖ q : C ∈ self}` with empty remainders dropped.
    /// Covers mergers, splits and arbitrary deviations alike.
    pub fn isolate(&self, q: Coalition) -> Partition {
        let mut blocks = vec![q];
        blocks.extend(self.blocks.iter().filter_map(|b| b.minus(q)));
        Partition::new(self.n, blocks).expect("isolate keeps exhaustiveness")
    }

    /// Block sizes, largest first.
    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().map(|b| b.len()).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Partition> for String {
    fn from(p: Partition) -> Self {
        p.to_string()
    }
}

impl TryFrom<String> for Partition {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Infers `n` as the largest label present.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks = parse_blocks(s)?;
        let n = blocks
            .iter()
            .map(|b| 64 - b.bits().leading_zeros() as usize)
            .max()
            .unwrap_or(0);
        Partition::new(n, blocks).map_err(|e| Error::Parse {
            token: s.trim().to_string(),
            reason: e.to_string(),
        })
    }
}

fn parse_blocks(s: &str) -> Result<Vec<Coalition>> {
    let toks = tokenize(s)?;
    let bad = |t: &str, why: &str| Error::Parse {
        token: t.to_string(),
        reason: why.to_string(),
    };
    // at end of input, name the last token read
    let end = toks.last().map_or("", String::as_str);
    let mut it = toks.iter().peekable();
    match it.next() {
        Some(t) if t == "{" => {}
        Some(t) => return Err(bad(t, "expected `{` opening the partition")),
        None => return Err(bad("", "empty partition text")),
    }
    let mut blocks = Vec::new();
    loop {
        match it.next().map(String::as_str) {
            Some("{") => {}
            Some("}") if blocks.is_empty() => return Err(bad("}", "partition has no coalitions")),
            Some(t) => return Err(bad(t, "expected `{` opening a coalition")),
            None => return Err(bad(end, "unexpected end of input")),
        }
        let mut members = Vec::new();
        loop {
            let t = it.next().ok_or_else(|| bad(end, "unclosed coalition"))?;
            let m: usize = t
                .parse()
                .map_err(|_| bad(t, "expected an agent label"))?;
            if m == 0 || m > MAX_REPRESENTABLE {
                return Err(bad(t, "agent labels run from 1 to 64"));
            }
            if members.contains(&m) {
                return Err(bad(t, "agent listed twice in a coalition"));
            }
            members.push(m);
            match it.next().map(String::as_str) {
                Some(",") => continue,
                Some("}") => break,
                Some(t) => return Err(bad(t, "expected `,` or `}`")),
                None => return Err(bad(end, "unclosed coalition")),
            }
        }
        let c = Coalition::from_members(&members)?;
        if let Some(prev) = blocks.iter().find(|b: &&Coalition| b.intersects(c)) {
            let dup = Coalition(prev.bits() & c.bits());
            return Err(bad(&c.to_string(), &format!("agents {dup} appear in two coalitions")));
        }
        blocks.push(c);
        match it.next().map(String::as_str) {
            Some(",") => continue,
            Some("}") => break,
            Some(t) => return Err(bad(t, "expected `,` or `}` after a coalition")),
            None => return Err(bad(end, "unclosed partition")),
        }
    }
    if let Some(t) = it.next() {
        return Err(bad(t, "trailing input after partition"));
    }
    Ok(blocks)
}

fn tokenize(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '{' | '}' | ',' => {
                out.push(c.to_string());
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            c if c.is_ascii_alphanumeric() || c == '-' || c == '.' => {
                let mut word = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '-' || d == '.' {
                        word.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(word);
            }
            other => {
                return Err(Error::Parse {
                    token: other.to_string(),
                    reason: "unexpected character".into(),
                })
            }
        }
    }
    Ok(out)
}

pub type PayoffVector = Vec<f64>;

/// A partition with a per-agent payoff (index `i-1` is agent `i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub partition: Partition,
    pub payoff: PayoffVector,
}

impl Configuration {
    pub fn new(partition: Partition, payoff: PayoffVector) -> Result<Self> {
        if payoff.len() != partition.n() {
            return Err(Error::domain(format!(
                "payoff has {} entries for {} agents",
                payoff.len(),
                partition.n()
            )));
        }
        if let Some(x) = payoff.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::domain(format!("payoff entry {x} is not a finite nonnegative number")));
        }
        Ok(Configuration { partition, payoff })
    }

    pub fn share(&self, agent: usize) -> f64 {
        self.payoff[agent - 1]
    }

    /// Σ_{i∈c} φ_i.
    pub fn sum_over(&self, c: Coalition) -> f64 {
        c.members().map(|i| self.payoff[i - 1]).sum()
    }
}

/// Bell numbers up to n = 25 fit comfortably; larger n saturate.
pub fn bell(n: usize) -> u128 {
    // Bell triangle
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last.saturating_add(x));
        }
        row = next;
    }
    row[0]
}

/// Every partition of `1..=n`, once each, in restricted-growth-string order.
pub fn enumerate_partitions(n: usize, max_n: usize) -> Result<Partitions> {
    AgentSet::new(n)?;
    if n > max_n {
        return Err(Error::cap("partition enumeration", n, max_n));
    }
    Ok(Partitions {
        rgs: vec![0; n],
        prefix_max: vec![0; n],
        done: false,
    })
}

/// Shorthand with the default cap.
pub fn all_partitions(n: usize) -> Result<Vec<Partition>> {
    Ok(enumerate_partitions(n, DEFAULT_MAX_AGENTS)?.collect())
}

pub struct Partitions {
    rgs: Vec<usize>,
    // prefix_max[i] = max(rgs[0..=i])
    prefix_max: Vec<usize>,
    done: bool,
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let out = Partition::from_labels(&self.rgs).expect("rgs is valid");
        let n = self.rgs.len();
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.rgs[i] <= self.prefix_max[i - 1] {
                self.rgs[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.rgs[i]);
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                break;
            }
        }
        Some(out)
    }
}

/// All partitions with exactly two coalitions, ordered by the coalition
/// holding agent 1 in canonical order.
pub fn enumerate_two_partitions(n: usize) -> Result<Vec<Partition>> {
    AgentSet::new(n)?;
    if n < 2 {
        return Err(Error::domain("two-coalition partitions need n ≥ 2"));
    }
    let grand = Coalition::grand(n);
    let mut firsts: Vec<Coalition> = grand
        .strict_subsets()
        .filter(|c| c.contains(1))
        .collect();
    firsts.sort();
    Ok(firsts
        .into_iter()
        .map(|c| Partition::new(n, vec![c, grand.minus(c).unwrap()]).unwrap())
        .collect())
}

/// Unions of two or more blocks of `p`, canonical order.
pub fn mergers_of(p: &Partition) -> Vec<Coalition> {
    let k = p.len();
    if !(2..=20).contains(&k) {
        return Vec::new();
    }
    let mut out: Vec<Coalition> = (1u32..(1 << k))
        .filter(|sel| sel.count_ones() >= 2)
        .map(|sel| {
            let bits = (0..k)
                .filter(|j| sel & (1 << j) != 0)
                .fold(0u64, |acc, j| acc | p.blocks[j].bits());
            Coalition(bits)
        })
        .collect();
    out.sort();
    out
}

/// Nonempty strict subsets of single blocks of `p`, canonical order.
pub fn splits_of(p: &Partition) -> Vec<Coalition> {
    let mut out: Vec<Coalition> = p.blocks.iter().flat_map(|b| b.strict_subsets()).collect();
    out.sort();
    out
}

/// True iff `p1 ≠ p2` and every block of `p2` sits inside a block of `p1`.
pub fn coarser_than(p1: &Partition, p2: &Partition) -> Result<bool> {
    if p1.n != p2.n {
        return Err(Error::domain(format!(
            "partitions over {} and {} agents are not comparable",
            p1.n, p2.n
        )));
    }
    Ok(p1 != p2
        && p2
            .blocks
            .iter()
            .all(|b| p1.blocks.iter().any(|a| b.is_subset_of(*a))))
}
