use crate::model::{validate, Instance, Solution, Territory, TIME_EPS};

use super::ExactError;

/// Largest customer count accepted by [`exact_solve`].
pub const ORACLE_MAX_CUSTOMERS: usize = 8;
/// Largest horizon accepted by [`exact_solve`].
pub const ORACLE_MAX_DAYS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactLimits {
    /// Work units (subset evaluations plus partition transitions) before the
    /// search gives up.
    pub node_cap: u64,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits { node_cap: 50_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExactOutcome {
    /// Provably minimum territory count, with a solution attaining it.
    Optimal { territories: usize, solution: Solution },
    /// No partition satisfies every constraint.
    Infeasible,
    /// Node cap reached.
    Unknown { lower_bound: usize },
}

impl ExactOutcome {
    pub fn optimum(&self) -> Option<usize> {
        match self {
            ExactOutcome::Optimal { territories, .. } => Some(*territories),
            _ => None,
        }
    }
}

/// Visit order of one day with the earliest possible depot return, or `None`
/// when the set cannot be served by one vehicle that day. Exact dynamic
/// programme over (visited set, last visit) keeping the earliest start.
pub fn best_day_route(visits: &[usize], day: usize, inst: &Instance) -> Option<Vec<usize>> {
    let m = visits.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let load: f64 = visits.iter().map(|&i| inst.demand(i, day)).sum();
    if load > inst.capacity() + TIME_EPS || m > 16 {
        return None;
    }
    let full = (1usize << m) - 1;
    let mut start = vec![f64::INFINITY; (full + 1) * m];
    let mut prev = vec![usize::MAX; (full + 1) * m];
    let depart = inst.window(0).open;
    for (a, &j) in visits.iter().enumerate() {
        let arrival = depart + inst.t(0, j);
        if arrival - inst.window(j).close <= TIME_EPS {
            start[(1 << a) * m + a] = arrival.max(inst.window(j).open);
        }
    }
    for mask in 1..=full {
        for a in 0..m {
            let s = start[mask * m + a];
            if mask & (1 << a) == 0 || !s.is_finite() {
                continue;
            }
            let ready = s + inst.service(visits[a]);
            for (b, &j) in visits.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    continue;
                }
                let arrival = ready + inst.t(visits[a], j);
                if arrival - inst.window(j).close > TIME_EPS {
                    continue;
                }
                let next = (mask | (1 << b)) * m + b;
                let sj = arrival.max(inst.window(j).open);
                if sj < start[next] {
                    start[next] = sj;
                    prev[next] = a;
                }
            }
        }
    }
    let (last, ret) = (0..m)
        .filter(|&a| start[full * m + a].is_finite())
        .map(|a| (a, start[full * m + a] + inst.service(visits[a]) + inst.t(visits[a], 0)))
        .min_by(|x, y| x.1.total_cmp(&y.1))?;
    if ret > inst.workday() + TIME_EPS {
        return None;
    }
    let mut order = Vec::with_capacity(m);
    let (mut mask, mut a) = (full, last);
    loop {
        order.push(visits[a]);
        let p = prev[mask * m + a];
        mask &= !(1 << a);
        if p == usize::MAX {
            break;
        }
        a = p;
    }
    order.reverse();
    Some(order)
}

fn members_of(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect()
}

/// Per-day visit orders of a territory, or `None` when it breaks
/// contiguity, compactness, capacity or time windows.
fn territory_routes(members: &[usize], inst: &Instance) -> Option<Vec<(usize, Vec<usize>)>> {
    let geo = inst.geometry();
    if !geo.is_contiguous(members) {
        return None;
    }
    let ratio = geo.compactness_ratio(members, inst.compactness_mode()).ok()?;
    if ratio > inst.compactness_bound() + 1e-9 {
        return None;
    }
    (0..inst.days())
        .map(|d| {
            let active: Vec<usize> = members.iter().copied().filter(|&i| inst.is_active(i, d)).collect();
            best_day_route(&active, d, inst).map(|r| (d, r))
        })
        .collect()
}

/// Minimum number of territories, by enumeration of set partitions over the
/// feasible territories.
///
/// Every subset of customers is tested once (contiguity, compactness in the
/// instance's mode, and an exact routing check per day); a dynamic programme
/// over subsets then picks the cheapest partition. Ties are broken by the
/// lowest subset bitmask, so the result is deterministic.
pub fn exact_solve(inst: &Instance, limits: ExactLimits) -> Result<ExactOutcome, ExactError> {
    let n = inst.n();
    if n > ORACLE_MAX_CUSTOMERS || inst.days() > ORACLE_MAX_DAYS {
        return Err(ExactError::TooLarge { customers: n, days: inst.days() });
    }
    let full = (1usize << n) - 1;
    let mut nodes = 0u64;
    let mut routes: Vec<Option<Vec<(usize, Vec<usize>)>>> = vec![None; full + 1];
    for (mask, slot) in routes.iter_mut().enumerate().skip(1) {
        nodes += 1;
        if nodes > limits.node_cap {
            return Ok(ExactOutcome::Unknown { lower_bound: lower_bound(inst) });
        }
        *slot = territory_routes(&members_of(mask, n), inst);
    }

    let mut best = vec![usize::MAX; full + 1];
    let mut choice = vec![0usize; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask & !low;
        // subsets of `mask` that contain its lowest element
        let mut sub = rest;
        loop {
            let part = sub | low;
            nodes += 1;
            if nodes > limits.node_cap {
                return Ok(ExactOutcome::Unknown { lower_bound: lower_bound(inst) });
            }
            let remaining = mask & !part;
            if routes[part].is_some() && best[remaining] != usize::MAX {
                let value = best[remaining] + 1;
                if value < best[mask] || (value == best[mask] && part < choice[mask]) {
                    best[mask] = value;
                    choice[mask] = part;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    if n == 0 {
        return Ok(ExactOutcome::Optimal { territories: 0, solution: Solution::new(inst, Vec::new()) });
    }
    if best[full] == usize::MAX {
        return Ok(ExactOutcome::Infeasible);
    }
    let mut territories = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let part = choice[mask];
        let days = routes[part].clone().expect("chosen part is feasible");
        let t = Territory::build(territories.len(), members_of(part, n), days, inst)
            .expect("oracle routes are feasible");
        territories.push(t);
        mask &= !part;
    }
    Ok(ExactOutcome::Optimal { territories: best[full], solution: Solution::new(inst, territories) })
}

/// Capacity bound: the busiest day's demand over the vehicle capacity.
fn lower_bound(inst: &Instance) -> usize {
    (0..inst.days())
        .map(|d| {
            let q: f64 = inst.customers().map(|i| inst.demand(i, d)).sum();
            (q / inst.capacity() - 1e-9).ceil().max(0.0) as usize
        })
        .max()
        .unwrap_or(0)
        .max(usize::from(inst.n() > 0))
}

/// Outcome of comparing a solution with the oracle.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleVerdict {
    Optimal,
    Suboptimal { gap: usize },
    /// The solution breaks at least one constraint.
    Infeasible,
    /// A valid solution with fewer territories than the proven optimum, or a
    /// valid solution to an instance the oracle proves infeasible.
    Contradiction { found: usize, optimum: Option<usize> },
}

/// Validates `sol` and compares its territory count with [`exact_solve`].
pub fn verify_against_oracle(sol: &Solution, inst: &Instance) -> Result<OracleVerdict, ExactError> {
    if inst.n() > ORACLE_MAX_CUSTOMERS || inst.days() > ORACLE_MAX_DAYS {
        return Err(ExactError::TooLarge { customers: inst.n(), days: inst.days() });
    }
    match validate(inst, sol) {
        Ok(report) if report.is_feasible() => {}
        _ => return Ok(OracleVerdict::Infeasible),
    }
    let found = sol.territory_count();
    Ok(match exact_solve(inst, ExactLimits::default())? {
        ExactOutcome::Optimal { territories, .. } if found == territories => OracleVerdict::Optimal,
        ExactOutcome::Optimal { territories, .. } if found > territories => {
            OracleVerdict::Suboptimal { gap: found - territories }
        }
        ExactOutcome::Optimal { territories, .. } => {
            OracleVerdict::Contradiction { found, optimum: Some(territories) }
        }
        ExactOutcome::Infeasible => OracleVerdict::Contradiction { found, optimum: None },
        ExactOutcome::Unknown { .. } => return Err(ExactError::NodeCap),
    })
}
