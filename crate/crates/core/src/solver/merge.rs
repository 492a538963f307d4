use std::collections::{HashSet, VecDeque};

use rand::Rng;

use crate::geometry::ShapeStats;
use crate::model::Instance;
use crate::routing::{
    best_insertion, insertion_with, repair, route_penalty, two_opt, Insertion, PartialSolution, RouteObjective,
};

use super::trace::{MergeCounters, MergeStatus, SolverObserver};
use super::{Clock, SolverParams};

const RATIO_EPS: f64 = 1e-9;

/// Unassigned basic units with their penalty counters.
#[derive(Clone, Debug, PartialEq)]
pub struct EjectionPool {
    units: Vec<usize>,
    penalty: Vec<u32>,
}

impl EjectionPool {
    /// A pool holding `units`, every counter of the `nodes` nodes set to 1.
    pub fn new(units: impl IntoIterator<Item = usize>, nodes: usize) -> Self {
        EjectionPool { units: units.into_iter().collect(), penalty: vec![1; nodes] }
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn contains(&self, unit: usize) -> bool {
        self.units.contains(&unit)
    }

    pub fn penalty(&self, unit: usize) -> u32 {
        self.penalty[unit]
    }

    pub(crate) fn bump(&mut self, unit: usize) {
        self.penalty[unit] += 1;
    }

    fn remove(&mut self, unit: usize) {
        self.units.retain(|&u| u != unit);
    }

    fn push(&mut self, unit: usize) {
        if !self.units.contains(&unit) {
            self.units.push(unit);
        }
    }
}

/// Merge of one unit into one territory at fixed insertion positions.
#[derive(Clone, Debug, PartialEq)]
pub struct MergeMove {
    /// Index into `PartialSolution::territories`.
    pub territory: usize,
    pub insertion: Insertion,
}

impl MergeMove {
    pub fn apply(&self, unit: usize, partial: &mut PartialSolution, inst: &Instance) {
        let t = &mut partial.territories[self.territory];
        t.add_member(unit, inst);
        self.insertion.apply(unit, &mut t.routes);
    }
}

/// Sorted indices of the territories with a member adjacent to `unit`.
pub fn adjacent_territories(unit: usize, partial: &PartialSolution, inst: &Instance) -> Vec<usize> {
    let owners = partial.owner_table(inst);
    let mut out: Vec<usize> = inst.geometry().neighbors(unit).filter_map(|j| owners[j]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn within_bound(shape: &ShapeStats<f64>, inst: &Instance) -> bool {
    shape.ratio(inst.compactness_mode()) <= inst.compactness_bound() + RATIO_EPS
}

/// Cheapest fully feasible merge of `v_in` with an adjacent territory.
pub fn stage1_feasible_merge(v_in: usize, partial: &PartialSolution, inst: &Instance) -> Option<MergeMove> {
    let mut best: Option<(f64, MergeMove)> = None;
    for k in adjacent_territories(v_in, partial, inst) {
        let t = &partial.territories[k];
        if !within_bound(&t.shape_with(v_in, inst), inst) {
            continue;
        }
        let insertion = best_insertion(v_in, t, inst).ok()?;
        if !insertion.is_feasible() {
            continue;
        }
        let delta = insertion.total_delta();
        if best.as_ref().is_none_or(|(d, _)| delta < *d) {
            best = Some((delta, MergeMove { territory: k, insertion }));
        }
    }
    best.map(|(_, m)| m)
}

/// Least-penalty merge with an adjacent territory, repaired by alternating
/// 2-opt and relocation. Returns the repaired partial solution when its
/// penalty reaches zero and every territory still meets the compactness
/// bound.
pub fn stage2_penalized_merge(
    v_in: usize,
    partial: &PartialSolution,
    params: &SolverParams,
    inst: &Instance,
) -> Option<PartialSolution> {
    let mut best: Option<((f64, f64), MergeMove)> = None;
    for k in adjacent_territories(v_in, partial, inst) {
        let t = &partial.territories[k];
        if !within_bound(&t.shape_with(v_in, inst), inst) {
            continue;
        }
        let insertion = insertion_with(v_in, t, inst, params.weights).ok()?;
        let key = (insertion.penalty(params.weights), insertion.total_delta());
        if best.as_ref().is_none_or(|(b, _)| key < *b) {
            best = Some((key, MergeMove { territory: k, insertion }));
        }
    }
    let (_, mv) = best?;
    let mut trial = partial.clone();
    mv.apply(v_in, &mut trial, inst);
    if !repair(&mut trial, inst, params.weights, params.repair_rounds) {
        return None;
    }
    let geo = inst.geometry();
    let sound = trial
        .territories
        .iter()
        .all(|t| within_bound(&t.shape, inst) && geo.is_contiguous(&t.members));
    sound.then_some(trial)
}

/// Result of a stage-3 step.
#[derive(Clone, Debug, PartialEq)]
pub struct EjectMerge {
    pub partial: PartialSolution,
    /// Units moved to the pool, possibly including `v_in`.
    pub ejected: Vec<usize>,
    pub territory: usize,
}

/// Merges `v_in` into a random territory at its least-penalty positions and
/// ejects at most `k_max` units to restore feasibility.
///
/// Ejection sets are ranked by the sum of their penalty counters, then by the
/// compactness ratio of the remaining territory, then lexicographically; the
/// first one leaving a non-empty, contiguous, compact territory with feasible
/// routes wins. `None` means no such set exists and nothing changed.
pub fn stage3_eject_merge<R: Rng>(
    v_in: usize,
    partial: &PartialSolution,
    pool: &EjectionPool,
    params: &SolverParams,
    inst: &Instance,
    rng: &mut R,
) -> Option<EjectMerge> {
    if partial.is_empty() {
        return None;
    }
    let adjacent = adjacent_territories(v_in, partial, inst);
    let k = if adjacent.is_empty() {
        rng.random_range(0..partial.len())
    } else {
        adjacent[rng.random_range(0..adjacent.len())]
    };
    let insertion = insertion_with(v_in, &partial.territories[k], inst, params.weights).ok()?;
    let mut merged = partial.territories[k].clone();
    merged.add_member(v_in, inst);
    insertion.apply(v_in, &mut merged.routes);

    let geo = inst.geometry();
    let members: HashSet<usize> = merged.members.iter().copied().collect();
    let exposed = |u: usize| u == v_in || geo.touches(u, |j| j != v_in && pool.contains(j));

    // units that can belong to an ejectable chain of length <= k_max
    let mut hops: Vec<(usize, usize)> = merged.members.iter().filter(|&&u| exposed(u)).map(|&u| (u, 0)).collect();
    let mut reach: HashSet<usize> = hops.iter().map(|h| h.0).collect();
    let mut queue: VecDeque<(usize, usize)> = hops.drain(..).collect();
    while let Some((u, h)) = queue.pop_front() {
        if h + 1 >= params.k_max {
            continue;
        }
        for v in geo.neighbors(u) {
            if members.contains(&v) && reach.insert(v) {
                queue.push_back((v, h + 1));
            }
        }
    }
    let mut pool_side: Vec<usize> = reach.into_iter().collect();
    pool_side.sort_unstable();

    let mut candidates: Vec<(u64, f64, Vec<usize>, ShapeStats<f64>)> = Vec::new();
    let mut set = Vec::with_capacity(params.k_max);
    enumerate_sets(&pool_side, params.k_max, 0, &mut set, &mut |e: &[usize]| {
        if e.len() >= merged.members.len() || !chain_ejectable(e, &exposed, inst) {
            return;
        }
        let shape = shape_without_set(&merged.shape, &members, e, inst);
        if !within_bound(&shape, inst) {
            return;
        }
        let p_sum = e.iter().map(|&u| pool.penalty(u) as u64).sum();
        candidates.push((p_sum, shape.ratio(inst.compactness_mode()), e.to_vec(), shape));
    });
    candidates.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .then_with(|| a.2.cmp(&b.2))
    });

    for (_, _, e, shape) in candidates {
        let rest: Vec<usize> = merged.members.iter().copied().filter(|u| !e.contains(u)).collect();
        if !geo.is_contiguous(&rest) {
            continue;
        }
        let mut routes = merged.routes.clone();
        let mut ok = true;
        for (d, r) in routes.iter_mut().enumerate() {
            r.retain(|u| !e.contains(u));
            if !route_penalty(r, d, inst, params.weights).is_zero() {
                *r = two_opt(r, d, inst, RouteObjective::Penalty(params.weights));
                if !route_penalty(r, d, inst, params.weights).is_zero() {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let mut out = partial.clone();
        let t = &mut out.territories[k];
        t.members = rest;
        t.shape = shape;
        t.routes = routes;
        return Some(EjectMerge { partial: out, ejected: e, territory: k });
    }
    None
}

fn enumerate_sets(
    items: &[usize],
    max: usize,
    from: usize,
    current: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    visit(current);
    if current.len() == max {
        return;
    }
    for i in from..items.len() {
        current.push(items[i]);
        enumerate_sets(items, max, i + 1, current, visit);
        current.pop();
    }
}

/// Every unit of `set` is exposed or linked to an exposed unit through
/// other units of `set`.
fn chain_ejectable(set: &[usize], exposed: &impl Fn(usize) -> bool, inst: &Instance) -> bool {
    let geo = inst.geometry();
    let mut ok: Vec<bool> = set.iter().map(|&u| exposed(u)).collect();
    loop {
        let mut grew = false;
        for i in 0..set.len() {
            if !ok[i] && (0..set.len()).any(|j| ok[j] && geo.are_adjacent(set[i], set[j])) {
                ok[i] = true;
                grew = true;
            }
        }
        if !grew {
            return ok.iter().all(|&b| b);
        }
    }
}

fn shape_without_set(
    shape: &ShapeStats<f64>,
    members: &HashSet<usize>,
    set: &[usize],
    inst: &Instance,
) -> ShapeStats<f64> {
    let geo = inst.geometry();
    let mut out = *shape;
    for (i, &u) in set.iter().enumerate() {
        let shared = geo.boundary_with(u, |j| j != u && members.contains(&j) && !set[..i].contains(&j));
        out = out.without_unit(geo.unit(u), shared);
    }
    out
}

/// Outcome of one merge-heuristic run.
#[derive(Clone, Debug, PartialEq)]
pub struct MergeResult {
    pub status: MergeStatus,
    /// Complete when `status` is `Success`.
    pub partial: PartialSolution,
    pub pool: EjectionPool,
    pub counters: MergeCounters,
}

/// Reinserts the pool into the partial solution.
///
/// Each step selects the pool unit with the lowest penalty counter among
/// those adjacent to some territory (smallest id on ties) and tries stages 1,
/// 2 and 3 in turn. Stops on an empty pool, a counter above `p_max`, no
/// selectable unit, the stage-3 attempt cap, or the clock.
pub fn merge_heuristic<R: Rng>(
    partial: PartialSolution,
    pool: EjectionPool,
    params: &SolverParams,
    inst: &Instance,
    rng: &mut R,
    clock: &Clock,
    observer: &mut dyn SolverObserver,
) -> MergeResult {
    let mut partial = partial;
    let mut pool = pool;
    let mut counters = MergeCounters { pool_peak: pool.len(), ..MergeCounters::default() };
    let attempt_cap = params.merge_attempt_factor * pool.len().max(1);
    let geo = inst.geometry();
    let status = loop {
        if pool.is_empty() {
            break MergeStatus::Success;
        }
        if pool.units().iter().any(|&u| pool.penalty(u) > params.p_max) {
            break MergeStatus::PenaltyCeiling;
        }
        if clock.expired() {
            break MergeStatus::Timeout;
        }
        let owners = partial.owner_table(inst);
        let Some(v_in) = pool
            .units()
            .iter()
            .copied()
            .filter(|&u| geo.touches(u, |j| owners[j].is_some()))
            .min_by_key(|&u| (pool.penalty(u), u))
        else {
            break MergeStatus::NoSelectableUnit;
        };

        if let Some(mv) = stage1_feasible_merge(v_in, &partial, inst) {
            mv.apply(v_in, &mut partial, inst);
            pool.remove(v_in);
            counters.stage1 += 1;
            observer.merge_step(&partial, &pool);
            continue;
        }
        if let Some(repaired) = stage2_penalized_merge(v_in, &partial, params, inst) {
            partial = repaired;
            pool.remove(v_in);
            counters.stage2 += 1;
            observer.merge_step(&partial, &pool);
            continue;
        }
        pool.bump(v_in);
        if counters.stage3 >= attempt_cap {
            break MergeStatus::AttemptCap;
        }
        counters.stage3 += 1;
        let others = {
            let mut p = pool.clone();
            p.remove(v_in);
            p
        };
        if let Some(step) = stage3_eject_merge(v_in, &partial, &others, params, inst, rng) {
            partial = step.partial;
            pool.remove(v_in);
            for &u in &step.ejected {
                pool.push(u);
            }
            counters.ejected += step.ejected.iter().filter(|&&u| u != v_in).count();
            counters.pool_peak = counters.pool_peak.max(pool.len());
        }
        observer.merge_step(&partial, &pool);
    };
    MergeResult { status, partial, pool, counters }
}
