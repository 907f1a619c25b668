//! Small dense linear programs over exact rationals.
//!
//! Two-phase tableau simplex with Bland's rule, so it terminates on
//! degenerate problems. Variables are nonnegative; a free variable is
//! modelled by the caller as a difference of two.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub rel: Rel,
    pub rhs: Q,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

/// Exact rational from a finite f64.
pub fn q_from_f64(x: f64) -> Q {
    BigRational::from_float(x).expect("finite value")
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Maximizes `objective · x` subject to `rows`, `x ≥ 0`.
pub fn maximize(n_vars: usize, objective: &[Q], rows: &[Constraint]) -> LpOutcome {
    assert_eq!(objective.len(), n_vars);
    let m = rows.len();
    // column layout: originals | slack/surplus | artificials | rhs
    let n_slack = rows.iter().filter(|r| r.rel != Rel::Eq).count();
    let n_art = rows
        .iter()
        .filter(|r| {
            let neg = r.rhs.is_negative();
            match r.rel {
                Rel::Eq => true,
                Rel::Ge => !neg,
                Rel::Le => neg,
            }
        })
        .count();
    let width = n_vars + n_slack + n_art + 1;
    let rhs_col = width - 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut is_art = vec![false; width - 1];
    let (mut next_slack, mut next_art) = (n_vars, n_vars + n_slack);
    for r in rows {
        assert_eq!(r.coeffs.len(), n_vars);
        let flip = r.rhs.is_negative();
        let sign = if flip { -Q::one() } else { Q::one() };
        let mut row = vec![Q::zero(); width];
        for (j, a) in r.coeffs.iter().enumerate() {
            row[j] = a * &sign;
        }
        row[rhs_col] = &r.rhs * &sign;
        let rel = match (r.rel, flip) {
            (Rel::Le, true) => Rel::Ge,
            (Rel::Ge, true) => Rel::Le,
            (rel, _) => rel,
        };
        match rel {
            Rel::Le => {
                row[next_slack] = Q::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Rel::Ge => {
                row[next_slack] = -Q::one();
                next_slack += 1;
                row[next_art] = Q::one();
                is_art[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
            Rel::Eq => {
                row[next_art] = Q::one();
                is_art[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
        }
        t.push(row);
    }

    // phase one: maximize −Σ artificials
    if n_art > 0 {
        let cost: Vec<Q> = (0..width - 1)
            .map(|j| if is_art[j] { -Q::one() } else { Q::zero() })
            .collect();
        let allowed = vec![true; width - 1];
        match run_simplex(&mut t, &mut basis, &cost, &allowed) {
            Phase::Optimal => {}
            Phase::Unbounded => unreachable!("phase one is bounded"),
        }
        let infeas: Q = basis
            .iter()
            .zip(&t)
            .filter(|(b, _)| is_art[**b])
            .map(|(_, row)| row[rhs_col].clone())
            .sum();
        if infeas.is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out, dropping redundant rows
        let mut i = 0;
        while i < t.len() {
            if is_art[basis[i]] {
                let col = (0..width - 1).find(|&j| !is_art[j] && !t[i][j].is_zero());
                match col {
                    Some(j) => pivot(&mut t, &mut basis, i, j),
                    None => {
                        t.remove(i);
                        basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost = vec![Q::zero(); width - 1];
    cost[..n_vars].clone_from_slice(objective);
    let allowed: Vec<bool> = (0..width - 1).map(|j| !is_art[j]).collect();
    match run_simplex(&mut t, &mut basis, &cost, &allowed) {
        Phase::Unbounded => LpOutcome::Unbounded,
        Phase::Optimal => {
            let mut x = vec![Q::zero(); n_vars];
            for (i, &b) in basis.iter().enumerate() {
                if b < n_vars {
                    x[b] = t[i][rhs_col].clone();
                }
            }
            let value = x.iter().zip(objective).map(|(a, c)| a * c).sum();
            LpOutcome::Optimal { x, value }
        }
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

fn run_simplex(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], allowed: &[bool]) -> Phase {
    let width = cost.len() + 1;
    let rhs_col = width - 1;
    loop {
        // reduced cost c_j − c_B B^-1 A_j, smallest improving index enters
        let entering = (0..width - 1).find(|&j| {
            if !allowed[j] || basis.contains(&j) {
                return false;
            }
            let mut rc = cost[j].clone();
            for (i, &b) in basis.iter().enumerate() {
                if !t[i][j].is_zero() && !cost[b].is_zero() {
                    rc -= &cost[b] * &t[i][j];
                }
            }
            rc.is_positive()
        });
        let Some(j) = entering else {
            return Phase::Optimal;
        };
        let mut leave: Option<(usize, Q)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j].is_positive() {
                let ratio = &row[rhs_col] / &row[j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((i, _)) = leave else {
            return Phase::Unbounded;
        };
        pivot(t, basis, i, j);
    }
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c].clone();
    for x in t[r].iter_mut() {
        if !x.is_zero() {
            *x = &*x / &p;
        }
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (x, y) in row.iter_mut().zip(&prow) {
            if !y.is_zero() {
                *x -= &f * y;
            }
        }
    }
    basis[r] = c;
}
