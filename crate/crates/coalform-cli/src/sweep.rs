//! Long-format sweeps: one row per (axis value, partition).

use coalform::kelly::{self, KellySystem};
use coalform::partition::{all_partitions, enumerate_two_partitions, Partition};
use coalform::queue::{self, PayoffRule};
use coalform::QueueSystem;
use rayon::prelude::*;

use crate::fail::{input, CliError};
use crate::kelly_cmd;
use crate::scenario::{Axis, RuleArg, Scenario};
use crate::system::*;
use crate::table::{Cell, Table};

/// Default δ/η grid step.
pub const DEFAULT_STEP: f64 = 0.001;
/// Default number of points on a Λ grid.
pub const DEFAULT_POINTS: usize = 20;

pub fn sweep(sc: &Scenario) -> Result<(), CliError> {
    let axis = sc.sweep.axis.ok_or_else(|| input("sweep needs an axis (--axis or [sweep] axis)"))?;
    let t = match axis {
        Axis::Lambda => lambda_sweep(sc)?,
        Axis::N1 => n1_sweep(sc)?,
        Axis::Psi => psi_sweep(sc)?,
        Axis::Delta => kelly_sweep(sc, true)?,
        Axis::Eta => kelly_sweep(sc, false)?,
    };
    t.emit(sc.format, sc.out.as_deref())
}

fn range(sc: &Scenario) -> Result<(f64, f64), CliError> {
    let (Some(lo), Some(hi)) = (sc.sweep.from, sc.sweep.to) else {
        return Err(input("sweep needs --from and --to"));
    };
    if !(lo <= hi) {
        return Err(input(format!("empty sweep range {lo}..{hi}")));
    }
    Ok((lo, hi))
}

/// Λ grid: `points` values, log-spaced with `--log`.
fn lambda_grid(sc: &Scenario) -> Result<Vec<f64>, CliError> {
    let (lo, hi) = range(sc)?;
    let k = sc.sweep.points.unwrap_or(DEFAULT_POINTS);
    if k == 0 {
        return Err(input("--points must be at least 1"));
    }
    let log = sc.sweep.log.unwrap_or(false);
    if log && lo <= 0.0 {
        return Err(input("a log grid needs --from > 0"));
    }
    let at = |i: usize| {
        let t = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
        if log {
            10f64.powf(lo.log10() + t * (hi.log10() - lo.log10()))
        } else {
            lo + t * (hi - lo)
        }
    };
    Ok((0..k).map(at).collect())
}

fn larger(sys: &QueueSystem, p: &Partition) -> usize {
    let b = p.blocks();
    if sys.servers_of(b[0]) >= sys.servers_of(b[1]) {
        0
    } else {
        1
    }
}

fn lambda_sweep(sc: &Scenario) -> Result<Table, CliError> {
    let base = QueueSystem::new(sc.servers()?.to_vec(), 1.0, sc.mu)?;
    let ps = enumerate_two_partitions(base.n())?;
    let grid = lambda_grid(sc)?;
    let per_point = grid
        .par_iter()
        .map(|&l| {
            let sys = base.with_lambda(l)?;
            ps.iter()
                .map(|p| {
                    let big = larger(&sys, p);
                    let we = sys.solve_we(p)?;
                    Ok((
                        sys.servers_of(p.blocks()[big]),
                        we.rates[big],
                        queue::rbia_stable_partition(&sys, p),
                    ))
                })
                .collect::<Result<Vec<_>, coalform::Error>>()
        })
        .collect::<Result<Vec<_>, coalform::Error>>()?;
    let mut t = Table::new(["lambda", "partition", "larger_servers", "larger_rate", "stable"]);
    for (&l, rows) in grid.iter().zip(per_point) {
        for (p, (k, rate, stable)) in ps.iter().zip(rows) {
            if stable || !sc.stable_only {
                t.push(vec![l.into(), p.to_string().into(), k.into(), rate.into(), stable.into()]);
            }
        }
    }
    Ok(t)
}

/// Servers of agent 1 over an integer range, every duopoly, RB-PA by default.
fn n1_sweep(sc: &Scenario) -> Result<Table, CliError> {
    let servers = sc.servers()?.to_vec();
    let lambda = sc.lambda()?;
    let (lo, hi) = range(sc)?;
    if lo < 1.0 || lo.fract() != 0.0 || hi.fract() != 0.0 {
        return Err(input("the n1 axis takes whole server counts of at least 1"));
    }
    let rule = queue_rule(sc.rule.or(Some(RuleArg::Rbpa)))?;
    let rules = match payoff_rules(sc, servers.len())? {
        r if r.iter().any(|x| matches!(x, PayoffRule::Explicit(_))) => {
            return Err(input("the n1 axis takes proportional or shapley payoffs"))
        }
        r => r,
    };
    let ps = enumerate_two_partitions(servers.len())?;
    let n1s: Vec<u32> = (lo as u32..=hi as u32).collect();
    let per_point = n1s
        .par_iter()
        .map(|&n1| {
            let mut s = servers.clone();
            s[0] = n1;
            let sys = QueueSystem::new(s, lambda, sc.mu)?;
            let mut out = Vec::new();
            for p in &ps {
                for r in &rules {
                    let cfg = queue::configuration(&sys, p, r)?;
                    out.push((sys.servers_of(p.block_of(1)), queue::check(&sys, &cfg, rule)));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, coalform::Error>>()?;
    let mut t = Table::new(["n1", "partition", "servers_with_1", "rule", "payoff_rule", "stable", "witness"]);
    for (&n1, rows) in n1s.iter().zip(per_point) {
        let cells = ps.iter().flat_map(|p| rules.iter().map(move |r| (p, r)));
        for ((p, r), (w, v)) in cells.zip(rows) {
            if v.stable || !sc.stable_only {
                t.push(vec![
                    n1.into(),
                    p.to_string().into(),
                    w.into(),
                    rule.to_string().into(),
                    r.name().into(),
                    v.stable.into(),
                    witness_text(&v).into(),
                ]);
            }
        }
    }
    Ok(t)
}

/// Ψ(k)/Λ for every k in 1..N.
fn psi_sweep(sc: &Scenario) -> Result<Table, CliError> {
    let sys = queue_system(sc)?;
    let total = sys.total_servers();
    if total < 2 {
        return Err(input("Ψ needs at least two servers"));
    }
    let sums: std::collections::BTreeSet<u32> = sys.grand().strict_subsets().map(|c| sys.servers_of(c)).collect();
    let kstar = sys.k_star();
    let mut t = Table::new(["k", "realizable", "psi", "psi_over_lambda", "k_star"]);
    for k in 1..total {
        let psi = sys.psi(k)?;
        t.push(vec![
            k.into(),
            sums.contains(&k).into(),
            psi.into(),
            (psi / sys.lambda()).into(),
            kstar.contains(&k).into(),
        ]);
    }
    Ok(t)
}

/// δ-family (λ_j = base − α_j δ) or η sweep over a fixed influence vector.
fn kelly_sweep(sc: &Scenario, delta: bool) -> Result<Table, CliError> {
    let (lo, hi) = range(sc)?;
    let step = sc.sweep.step.unwrap_or(DEFAULT_STEP);
    if !(step > 0.0) {
        return Err(input("--step must be positive"));
    }
    let grid = kelly::grid(lo, hi, step);
    let make = |x: f64| -> Result<KellySystem, CliError> {
        if delta {
            let alpha = sc.sweep.alpha.as_ref().ok_or_else(|| input("the delta axis needs --alpha"))?;
            let base = sc.sweep.base.ok_or_else(|| input("the delta axis needs --base"))?;
            Ok(KellySystem::new(kelly::delta_family(base, alpha, x), sc.eta, sc.gamma)?)
        } else {
            Ok(KellySystem::new(sc.influence()?.to_vec(), Some(x), sc.gamma)?)
        }
    };
    let n = make(grid[0])?.n();
    let ps = all_partitions(n)?;
    let rule = kelly_rule(sc.rule)?;
    let per_point = grid
        .iter()
        .map(|&x| {
            let sys = make(x)?;
            Ok((kelly::moa(&sys).ok(), kelly_cmd::scan(&sys, &ps)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut headers = vec![
        "delta_or_eta".to_string(),
        "partition".into(),
        "u_stable".into(),
        "c_stable".into(),
        "class".into(),
        "moa".into(),
    ];
    headers.extend((1..=n).map(|i| format!("share_{i}")));
    let mut t = Table::new(headers);
    for (&x, (moa, rows)) in grid.iter().zip(per_point) {
        for r in rows.iter().filter(|r| r.verdict(rule).stable || !sc.stable_only) {
            let mut row: Vec<Cell> = vec![
                x.into(),
                r.partition.to_string().into(),
                r.u.stable.into(),
                r.c.stable.into(),
                r.class.clone().into(),
                moa.into(),
            ];
            row.extend(r.shares.iter().map(|&s| Cell::from(s)));
            t.push(row);
        }
    }
    Ok(t)
}
