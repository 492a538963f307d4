use proptest::prelude::*;

use super::*;
use crate::model::{validate, ConstraintFamily, Instance, InstanceData, TimeWindow};
use crate::Point;

fn instance(points: &[(f64, f64)], days: usize, capacity: f64, workday: f64) -> InstanceData {
    let coords = points.iter().map(|&(x, y)| Point::new(x, y)).collect();
    let mut d = InstanceData::euclidean("t", coords, days, capacity, workday);
    d.compactness_bound = 100.0;
    d
}

fn territory(id: usize, members: &[usize], routes: Vec<Vec<usize>>, inst: &Instance) -> WorkingTerritory {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    WorkingTerritory {
        id,
        shape: inst.geometry().shape_of(&sorted).unwrap(),
        members: sorted,
        routes,
    }
}

#[test]
fn insertion_into_empty_route() {
    let mut d = instance(&[(0.0, 0.0), (3.0, 4.0), (10.0, 0.0)], 1, 50.0, 100.0);
    d.demands[1][0] = 5.0;
    d.windows[1] = TimeWindow::new(8.0, 20.0);
    d.service_times[1] = 2.0;
    let inst = Instance::new(d).unwrap();
    let t = territory(0, &[2], vec![vec![]], &inst);
    let ins = best_insertion(1, &t, &inst).unwrap();
    assert_eq!(ins.candidates.len(), 1);
    let c = &ins.candidates[0];
    assert_eq!(c.position, 0);
    // leaves at 0, waits until 8, serves 2, returns 5 later
    assert!((c.delta_cost - 15.0).abs() < 1e-12);
    assert!(c.feasible && ins.is_feasible());
}

#[test]
fn collinear_insertion_has_no_detour() {
    let mut d = instance(&[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)], 1, 50.0, 100.0);
    d.demands[1][0] = 1.0;
    d.demands[2][0] = 1.0;
    let inst = Instance::new(d).unwrap();
    let t = territory(0, &[2], vec![vec![2]], &inst);
    let c = &best_insertion(1, &t, &inst).unwrap().candidates[0];
    assert_eq!(c.position, 0);
    assert!(c.delta_cost.abs() < 1e-12);
}

#[test]
fn member_insertion_rejected() {
    let mut d = instance(&[(0.0, 0.0), (5.0, 0.0)], 1, 50.0, 100.0);
    d.demands[1][0] = 1.0;
    let inst = Instance::new(d).unwrap();
    let t = territory(4, &[1], vec![vec![1]], &inst);
    assert_eq!(
        best_insertion(1, &t, &inst).unwrap_err(),
        RoutingError::AlreadyMember { customer: 1, territory: 4 }
    );
}

/// Independent forward pass returning (capacity excess, lateness + overtime, return time).
fn oracle_route(route: &[usize], day: usize, inst: &Instance) -> (f64, f64, f64) {
    let mut clock = 0.0;
    let mut at = 0;
    let mut load = 0.0;
    let mut late = 0.0;
    for &j in route {
        clock += inst.t(at, j);
        late += (clock - inst.window(j).close).max(0.0);
        clock = clock.max(inst.window(j).open) + inst.service(j);
        load += inst.demand(j, day);
        at = j;
    }
    clock += inst.t(at, 0);
    late += (clock - inst.workday()).max(0.0);
    (f64::max(load - inst.capacity(), 0.0), late, clock)
}

#[test]
fn incompatible_customer_is_infeasible_everywhere() {
    let mut d = instance(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0), (30.0, 0.0), (60.0, 0.0)], 1, 50.0, 200.0);
    for i in 1..=4 {
        d.demands[i][0] = 1.0;
    }
    d.windows[4] = TimeWindow::new(0.0, 20.0);
    let inst = Instance::new(d).unwrap();
    let t = territory(0, &[1, 2, 3], vec![vec![1, 2, 3]], &inst);
    let ins = best_insertion(4, &t, &inst).unwrap();
    assert!(!ins.is_feasible());
    let c = &ins.candidates[0];
    let oracle = (0..=3)
        .map(|p| {
            let mut r = vec![1, 2, 3];
            r.insert(p, 4);
            oracle_route(&r, 0, &inst).1
        })
        .fold(f64::INFINITY, f64::min);
    assert!((c.lateness - oracle).abs() < 1e-9);
    assert_eq!(c.lateness, 40.0);
}

#[test]
fn penalty_examples() {
    let mut d = instance(&[(0.0, 0.0), (17.0, 0.0), (18.0, 0.0)], 1, 100.0, 200.0);
    d.demands[1][0] = 60.0;
    d.demands[2][0] = 60.0;
    d.windows[1] = TimeWindow::new(0.0, 10.0);
    let inst = Instance::new(d).unwrap();
    let w = PenaltyWeights::default();
    assert!(route_penalty(&[2], 0, &inst, w).is_zero());
    let p = route_penalty(&[2, 1], 0, &inst, w);
    assert_eq!(p.capacity, 20.0);
    assert_eq!(p.time_window, 9.0);
    let alone = route_penalty(&[1], 0, &inst, w);
    assert_eq!((alone.capacity, alone.time_window, alone.total), (0.0, 7.0, 7.0));
}

#[test]
fn two_opt_fixed_points() {
    let mut d = instance(&[(0.0, 0.0), (5.0, 0.0), (5.0, 5.0), (0.0, 5.0)], 1, 100.0, 500.0);
    for i in 1..=3 {
        d.demands[i][0] = 1.0;
    }
    let inst = Instance::new(d).unwrap();
    assert_eq!(two_opt(&[1, 2], 0, &inst, RouteObjective::TravelTime), vec![1, 2]);
    assert_eq!(two_opt(&[1, 2, 3], 0, &inst, RouteObjective::TravelTime), vec![1, 2, 3]);
    // 0 -> (5,5) -> (5,0) -> (0,5) -> 0 crosses itself
    let fixed = two_opt(&[2, 1, 3], 0, &inst, RouteObjective::TravelTime);
    assert!(crate::model::route_travel(&fixed, &inst) < crate::model::route_travel(&[2, 1, 3], &inst));
}

#[test]
fn two_opt_removes_lateness_by_reversal() {
    let mut d = instance(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0), (30.0, 0.0)], 1, 100.0, 500.0);
    for i in 1..=3 {
        d.demands[i][0] = 1.0;
    }
    d.windows[1] = TimeWindow::new(0.0, 12.0);
    let inst = Instance::new(d).unwrap();
    let w = PenaltyWeights::default();
    assert!(!route_penalty(&[3, 2, 1], 0, &inst, w).is_zero());
    let fixed = two_opt(&[3, 2, 1], 0, &inst, RouteObjective::Penalty(w));
    assert_eq!(fixed, vec![1, 2, 3]);
}

/// Four customers on a row: depot cell on the left, strips to the right.
fn strip_instance() -> Instance {
    let mut d = instance(&[(0.0, 5.0), (10.0, 5.0), (20.0, 5.0), (30.0, 5.0), (40.0, 5.0)], 1, 100.0, 500.0);
    for i in 1..=4 {
        d.demands[i][0] = 1.0;
    }
    Instance::new(d).unwrap()
}

#[test]
fn relocation_lowers_compactness_sum() {
    let inst = strip_instance();
    let mut partial = PartialSolution {
        territories: vec![
            territory(0, &[1, 2, 3], vec![vec![1, 2, 3]], &inst),
            territory(1, &[4], vec![vec![4]], &inst),
        ],
    };
    let geo = inst.geometry();
    let mode = inst.compactness_mode();
    let before: f64 = [vec![1, 2, 3], vec![4]]
        .iter()
        .map(|s| geo.compactness_ratio(s, mode).unwrap())
        .sum();
    let moves = relocate(&mut partial, &inst, RelocateObjective::Compactness);
    assert!(moves >= 1);
    let after: f64 = partial
        .territories
        .iter()
        .map(|t| geo.compactness_ratio(&t.members, mode).unwrap())
        .sum();
    assert!(after < before);
    assert!((after - partial.compactness_sum(&inst)).abs() < 1e-9);
    for t in &partial.territories {
        assert!(!t.members.is_empty());
        assert!(geo.is_contiguous(&t.members));
    }
    assert!(validate(&inst, &partial.to_solution(&inst)).unwrap().is_feasible());
}

#[test]
fn relocation_never_disconnects() {
    let inst = strip_instance();
    let mut single = PartialSolution { territories: vec![territory(0, &[1, 2, 3, 4], vec![vec![1, 2, 3, 4]], &inst)] };
    assert_eq!(relocate(&mut single, &inst, RelocateObjective::Compactness), 0);

    // a T: unit 2 joins 1, 3 and 4; taking it out of {1,2,3} would split it
    let mut d = instance(&[(20.0, 40.0), (10.0, 0.0), (20.0, 0.0), (30.0, 0.0), (20.0, 10.0)], 1, 100.0, 500.0);
    for i in 1..=4 {
        d.demands[i][0] = 1.0;
    }
    let inst = Instance::new(d).unwrap();
    let geo = inst.geometry();
    assert!(!geo.is_contiguous(&[1, 3]));
    let mut partial = PartialSolution {
        territories: vec![
            territory(0, &[1, 2, 3], vec![vec![1, 2, 3]], &inst),
            territory(1, &[4], vec![vec![4]], &inst),
        ],
    };
    relocate(&mut partial, &inst, RelocateObjective::Compactness);
    for t in &partial.territories {
        assert!(!t.members.is_empty());
        assert!(geo.is_contiguous(&t.members), "{:?}", t.members);
    }
}

fn random_instance(
    pts: &[(u8, u8)],
    demand: &[u8],
    opens: &[u8],
    capacity: f64,
) -> Option<Instance> {
    let mut coords = vec![(50.0, 50.0)];
    for &(x, y) in pts {
        let p = (x as f64, y as f64);
        if coords.iter().all(|q| (q.0 - p.0).abs() + (q.1 - p.1).abs() > 0.5) {
            coords.push(p);
        }
    }
    let mut d = instance(&coords, 1, capacity, 400.0);
    for i in 1..coords.len() {
        d.demands[i][0] = 1.0 + demand[i % demand.len()] as f64;
        let open = opens[i % opens.len()] as f64;
        d.windows[i] = TimeWindow::new(open, (open + 60.0).min(400.0));
        d.service_times[i] = 5.0;
    }
    Instance::new(d).ok()
}

proptest! {
    #[test]
    fn best_insertion_matches_enumeration(
        pts in prop::collection::vec((0u8..100, 0u8..100), 2..=7),
        demand in prop::collection::vec(0u8..30, 1..8),
        opens in prop::collection::vec(0u8..200, 1..8),
    ) {
        let Some(inst) = random_instance(&pts, &demand, &opens, 80.0) else { return Ok(()); };
        let n = inst.n();
        let route: Vec<usize> = (1..n).collect();
        let members = route.clone();
        let t = territory(0, &members, vec![route.clone()], &inst);
        let ins = best_insertion(n, &t, &inst).unwrap();
        let cand = &ins.candidates[0];
        let base = oracle_route(&route, 0, &inst).2;
        let mut feasible_best: Option<(usize, f64)> = None;
        let mut min_pen = f64::INFINITY;
        for p in 0..=route.len() {
            let mut r = route.clone();
            r.insert(p, n);
            let (cap, late, ret) = oracle_route(&r, 0, &inst);
            let pen = cap + late;
            min_pen = min_pen.min(pen);
            if pen <= 1e-9 && feasible_best.map_or(true, |(_, dlt)| ret - base < dlt - 1e-9) {
                feasible_best = Some((p, ret - base));
            }
        }
        match feasible_best {
            Some((p, dlt)) => {
                prop_assert!(cand.feasible);
                prop_assert_eq!(cand.position, p);
                prop_assert!((cand.delta_cost - dlt).abs() < 1e-9);
            }
            None => {
                prop_assert!(!cand.feasible);
                prop_assert!((cand.capacity_excess + cand.lateness - min_pen).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_penalty_iff_route_families_clean(
        pts in prop::collection::vec((0u8..100, 0u8..100), 1..=6),
        demand in prop::collection::vec(0u8..60, 1..8),
        opens in prop::collection::vec(0u8..250, 1..8),
    ) {
        let Some(inst) = random_instance(&pts, &demand, &opens, 100.0) else { return Ok(()); };
        let members: Vec<usize> = inst.customers().collect();
        let t = territory(0, &members, vec![members.clone()], &inst);
        let partial = PartialSolution { territories: vec![t] };
        let report = validate(&inst, &partial.to_solution(&inst)).unwrap();
        let route_clean = report.violations.iter().all(|v| {
            !matches!(v.family, ConstraintFamily::Capacity | ConstraintFamily::Schedule)
        });
        prop_assert_eq!(partial.penalty(&inst, PenaltyWeights::default()).is_zero(), route_clean);
    }

    #[test]
    fn two_opt_never_worsens(
        pts in prop::collection::vec((0u8..100, 0u8..100), 2..=7),
        demand in prop::collection::vec(0u8..30, 1..8),
        opens in prop::collection::vec(0u8..250, 1..8),
    ) {
        let Some(inst) = random_instance(&pts, &demand, &opens, 1000.0) else { return Ok(()); };
        let route: Vec<usize> = inst.customers().collect();
        let w = PenaltyWeights::default();
        let before = route_penalty(&route, 0, &inst, w);
        let out = two_opt(&route, 0, &inst, RouteObjective::Penalty(w));
        prop_assert!(route_penalty(&out, 0, &inst, w).total <= before.total + 1e-9);
        let tt = two_opt(&route, 0, &inst, RouteObjective::TravelTime);
        prop_assert!(crate::model::route_travel(&tt, &inst) <= crate::model::route_travel(&route, &inst) + 1e-9);
        if before.is_zero() {
            prop_assert!(route_penalty(&tt, 0, &inst, w).is_zero());
        }
        let mut a = out.clone();
        a.sort_unstable();
        prop_assert_eq!(a, route);
    }
}
