use serde::{Deserialize, Serialize};

use crate::model::{route_travel, Instance, TIME_EPS};

use super::insertion::best_position;
use super::partial::PartialSolution;
use super::penalty::{route_penalty, PenaltyWeights};

const IMPROVE_EPS: f64 = 1e-9;
const TWO_OPT_MOVE_CAP: usize = 10_000;
const RELOCATE_SWEEP_CAP: usize = 1_000;

/// Objective of intra-route 2-opt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RouteObjective {
    /// Travel time; from a feasible start only feasible routes are accepted.
    TravelTime,
    /// Lexicographic (F_p, travel time).
    Penalty(PenaltyWeights),
}

/// Objective of inter-territory relocation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RelocateObjective {
    /// Total F_p; customers leave penalized territories only.
    Penalty(PenaltyWeights),
    /// Sum of compactness ratios; routes stay feasible and travel time does
    /// not grow.
    Compactness,
}

fn route_key(visits: &[usize], day: usize, inst: &Instance, objective: RouteObjective) -> (f64, f64) {
    let travel = route_travel(visits, inst);
    match objective {
        RouteObjective::TravelTime => {
            let p = route_penalty(visits, day, inst, PenaltyWeights::default());
            (if p.is_zero() { 0.0 } else { 1.0 }, travel)
        }
        RouteObjective::Penalty(w) => (route_penalty(visits, day, inst, w).total, travel),
    }
}

fn improves(new: (f64, f64), old: (f64, f64), objective: RouteObjective) -> bool {
    match objective {
        RouteObjective::TravelTime => {
            let stays_feasible = old.0 > 0.0 || new.0 == 0.0;
            stays_feasible && new.1 < old.1 - IMPROVE_EPS
        }
        RouteObjective::Penalty(_) => {
            new.0 < old.0 - IMPROVE_EPS || (new.0 <= old.0 + IMPROVE_EPS && new.1 < old.1 - IMPROVE_EPS)
        }
    }
}

/// First-improvement 2-opt: reverses the segment `i..=j` whenever that
/// strictly improves the objective, until no reversal does.
pub fn two_opt(visits: &[usize], day: usize, inst: &Instance, objective: RouteObjective) -> Vec<usize> {
    let mut route = visits.to_vec();
    let n = route.len();
    if n < 2 {
        return route;
    }
    let mut key = route_key(&route, day, inst, objective);
    let mut moves = 0;
    'search: while moves < TWO_OPT_MOVE_CAP {
        for i in 0..n - 1 {
            for j in i + 1..n {
                route[i..=j].reverse();
                let cand = route_key(&route, day, inst, objective);
                if improves(cand, key, objective) {
                    key = cand;
                    moves += 1;
                    continue 'search;
                }
                route[i..=j].reverse();
            }
        }
        break;
    }
    route
}

/// Applies [`two_opt`] to every non-empty route of the partial solution.
pub fn two_opt_all(partial: &mut PartialSolution, inst: &Instance, objective: RouteObjective) {
    for t in &mut partial.territories {
        for (d, r) in t.routes.iter_mut().enumerate() {
            if r.len() >= 2 {
                *r = two_opt(r, d, inst, objective);
            }
        }
    }
}

/// One pass of single-customer moves between adjacent territories.
///
/// A move is admissible only if the customer touches the target territory,
/// the source stays non-empty and contiguous, and both compactness ratios stay
/// within the bound. The customer moves on every active day at once. Returns
/// the number of accepted moves.
pub fn relocate_sweep(partial: &mut PartialSolution, inst: &Instance, objective: RelocateObjective) -> usize {
    let geo = inst.geometry();
    let bound = inst.compactness_bound() + IMPROVE_EPS;
    let mut owners = partial.owner_table(inst);
    let mut moved = 0;
    for s in 0..partial.territories.len() {
        if let RelocateObjective::Penalty(w) = objective {
            if partial.territories[s].penalty(inst, w).is_zero() {
                continue;
            }
        }
        let candidates = partial.territories[s].members.clone();
        for c in candidates {
            if partial.territories[s].members.len() <= 1 {
                break;
            }
            let mut targets: Vec<usize> = geo
                .neighbors(c)
                .filter_map(|j| owners[j])
                .filter(|&k| k != s)
                .collect();
            targets.sort_unstable();
            targets.dedup();
            for t in targets {
                if try_move(partial, inst, objective, c, s, t, bound) {
                    owners[c] = Some(t);
                    moved += 1;
                    break;
                }
            }
        }
    }
    moved
}

fn try_move(
    partial: &mut PartialSolution,
    inst: &Instance,
    objective: RelocateObjective,
    c: usize,
    s: usize,
    t: usize,
    bound: f64,
) -> bool {
    let (src, tgt) = (&partial.territories[s], &partial.territories[t]);
    let src_shape = src.shape_without(c, inst);
    let tgt_shape = tgt.shape_with(c, inst);
    let mode = inst.compactness_mode();
    let (src_cr, tgt_cr) = (src_shape.ratio(mode), tgt_shape.ratio(mode));
    if src_cr > bound || tgt_cr > bound {
        return false;
    }
    if objective == RelocateObjective::Compactness
        && src_cr + tgt_cr >= src.ratio(inst) + tgt.ratio(inst) - IMPROVE_EPS
    {
        return false;
    }
    let rest: Vec<usize> = src.members.iter().copied().filter(|&m| m != c).collect();
    if !inst.geometry().is_contiguous(&rest) {
        return false;
    }

    let w = match objective {
        RelocateObjective::Penalty(w) => w,
        RelocateObjective::Compactness => PenaltyWeights::default(),
    };
    let mut new_src: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut placements = Vec::new();
    let (mut old_pen, mut new_pen, mut old_travel, mut new_travel) = (0.0, 0.0, 0.0, 0.0);
    for d in inst.active_days(c) {
        let reduced: Vec<usize> = src.routes[d].iter().copied().filter(|&v| v != c).collect();
        let cand = best_position(c, &tgt.routes[d], d, inst, w);
        let reduced_pen = route_penalty(&reduced, d, inst, w);
        match objective {
            RelocateObjective::Penalty(_) => {
                old_pen += route_penalty(&src.routes[d], d, inst, w).total
                    + route_penalty(&tgt.routes[d], d, inst, w).total;
                new_pen += reduced_pen.total + w.capacity * cand.capacity_excess + w.time_window * cand.lateness;
            }
            RelocateObjective::Compactness => {
                if !cand.feasible || !reduced_pen.is_zero() {
                    return false;
                }
                old_travel += travel_or_zero(&src.routes[d], inst) + travel_or_zero(&tgt.routes[d], inst);
                let mut grown = tgt.routes[d].clone();
                grown.insert(cand.position, c);
                new_travel += travel_or_zero(&reduced, inst) + route_travel(&grown, inst);
            }
        }
        new_src.push((d, reduced));
        placements.push(cand);
    }
    let accept = match objective {
        RelocateObjective::Penalty(_) => new_pen < old_pen - IMPROVE_EPS,
        RelocateObjective::Compactness => new_travel <= old_travel + TIME_EPS,
    };
    if !accept {
        return false;
    }

    let src = &mut partial.territories[s];
    src.shape = src_shape;
    src.members.retain(|&m| m != c);
    for (d, r) in new_src {
        src.routes[d] = r;
    }
    let tgt = &mut partial.territories[t];
    tgt.shape = tgt_shape;
    let pos = tgt.members.binary_search(&c).unwrap_err();
    tgt.members.insert(pos, c);
    for cand in placements {
        tgt.routes[cand.day].insert(cand.position, c);
    }
    true
}

fn travel_or_zero(visits: &[usize], inst: &Instance) -> f64 {
    if visits.is_empty() {
        0.0
    } else {
        route_travel(visits, inst)
    }
}

/// Relocation sweeps until a sweep makes no move. Returns the total number
/// of accepted moves.
pub fn relocate(partial: &mut PartialSolution, inst: &Instance, objective: RelocateObjective) -> usize {
    let mut total = 0;
    for _ in 0..RELOCATE_SWEEP_CAP {
        let moved = relocate_sweep(partial, inst, objective);
        total += moved;
        if moved == 0 {
            break;
        }
    }
    total
}

/// Alternates penalty-driven 2-opt and relocation until the partial solution
/// is feasible or a full round brings no improvement. Returns whether it
/// ended feasible.
pub fn repair(partial: &mut PartialSolution, inst: &Instance, w: PenaltyWeights, max_rounds: usize) -> bool {
    let mut current = partial.penalty(inst, w).total;
    for _ in 0..max_rounds {
        if current <= TIME_EPS {
            return true;
        }
        for t in &mut partial.territories {
            for (d, r) in t.routes.iter_mut().enumerate() {
                if r.len() >= 2 && !route_penalty(r, d, inst, w).is_zero() {
                    *r = two_opt(r, d, inst, RouteObjective::Penalty(w));
                }
            }
        }
        relocate_sweep(partial, inst, RelocateObjective::Penalty(w));
        let next = partial.penalty(inst, w).total;
        if next >= current - IMPROVE_EPS {
            current = next;
            break;
        }
        current = next;
    }
    current <= TIME_EPS
}
