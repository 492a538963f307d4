use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::{validate, InstanceData, TimeWindow};
use crate::routing::WorkingTerritory;
use crate::Point;

/// Customers on the x axis at the given abscissae, depot at the origin.
fn line(xs: &[f64], capacity: f64, workday: f64) -> InstanceData {
    let mut coords = vec![Point::new(0.0, 0.0)];
    coords.extend(xs.iter().map(|&x| Point::new(x, 0.0)));
    let mut d = InstanceData::euclidean("line", coords, 1, capacity, workday);
    d.compactness_bound = 100.0;
    for i in 1..=xs.len() {
        d.demands[i][0] = 1.0;
    }
    d
}

fn wt(id: usize, members: &[usize], route: Vec<usize>, inst: &Instance) -> WorkingTerritory {
    let mut m = members.to_vec();
    m.sort_unstable();
    WorkingTerritory { id, shape: inst.geometry().shape_of(&m).unwrap(), members: m, routes: vec![route] }
}

fn quick() -> SolverParams {
    SolverParams::default().with_ct_max(Duration::from_secs(10))
}

#[test]
fn initial_solution_is_one_territory_per_customer() {
    let inst = Instance::new(line(&[10.0, 20.0, 30.0], 10.0, 200.0)).unwrap();
    let s = initial_solution(&inst).unwrap();
    assert_eq!(s.len(), 3);
    assert!(validate(&inst, &s.to_solution(&inst)).unwrap().is_feasible());
}

#[test]
fn unreachable_customer_is_reported() {
    let mut d = line(&[10.0, 50.0], 10.0, 200.0);
    d.windows[2] = TimeWindow::new(0.0, 40.0);
    let inst = Instance::new(d).unwrap();
    assert_eq!(
        initial_solution(&inst).unwrap_err(),
        SolverError::IntrinsicallyInfeasible { customers: vec![2] }
    );
}

#[test]
fn inactive_customers_get_no_routes() {
    let mut d = line(&[10.0, 20.0], 10.0, 200.0);
    d.demands[1][0] = 0.0;
    d.demands[2][0] = 0.0;
    let inst = Instance::new(d).unwrap();
    let s = initial_solution(&inst).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s.to_solution(&inst).territories.iter().map(|t| t.routes.len()).sum::<usize>(), 0);
}

#[test]
fn two_easy_customers_share_a_territory() {
    let inst = Instance::new(line(&[10.0, 20.0], 10.0, 200.0)).unwrap();
    let res = solve(&inst, &quick()).unwrap();
    assert_eq!(res.solution.territory_count(), 1);
    assert!(validate(&inst, &res.solution).unwrap().is_feasible());
}

#[test]
fn capacity_keeps_two_territories() {
    let mut d = line(&[10.0, 20.0], 10.0, 200.0);
    d.demands[1][0] = 6.0;
    d.demands[2][0] = 6.0;
    let inst = Instance::new(d).unwrap();
    let res = solve(&inst, &quick()).unwrap();
    assert_eq!(res.solution.territory_count(), 2);
}

#[test]
fn stage1_picks_the_cheaper_territory() {
    let inst = Instance::new(line(&[10.0, 20.0, 30.0], 10.0, 200.0)).unwrap();
    let partial = PartialSolution { territories: vec![wt(0, &[1], vec![1], &inst), wt(1, &[3], vec![3], &inst)] };
    let mv = stage1_feasible_merge(2, &partial, &inst).unwrap();
    // detour 20 into {1}, none into {3}
    assert_eq!(mv.territory, 1);
    assert!(mv.insertion.total_delta().abs() < 1e-9);
}

#[test]
fn stage1_respects_compactness() {
    let inst = Instance::new(line(&[10.0, 20.0, 30.0], 10.0, 200.0)).unwrap();
    let geo = inst.geometry();
    let merged = geo.compactness_ratio(&[2, 3], inst.compactness_mode()).unwrap();
    let single = geo.compactness_ratio(&[3], inst.compactness_mode()).unwrap();
    let tight = inst.with_compactness((merged + single) / 2.0, inst.compactness_mode());
    assert!(merged > single);
    let partial = PartialSolution { territories: vec![wt(0, &[3], vec![3], &tight)] };
    assert!(stage1_feasible_merge(2, &partial, &tight).is_none());
    let partial = PartialSolution { territories: vec![wt(0, &[3], vec![3], &inst)] };
    assert!(stage1_feasible_merge(2, &partial, &inst).is_some());
}

#[test]
fn stage2_repairs_by_resequencing() {
    let mut d = line(&[10.0, 20.0, 30.0], 10.0, 75.0);
    d.windows[1] = TimeWindow::new(40.0, 75.0);
    d.windows[3] = TimeWindow::new(0.0, 35.0);
    let inst = Instance::new(d).unwrap();
    let partial = PartialSolution { territories: vec![wt(0, &[1, 2], vec![1, 2], &inst)] };
    assert!(stage1_feasible_merge(3, &partial, &inst).is_none());
    let repaired = stage2_penalized_merge(3, &partial, &SolverParams::default(), &inst).unwrap();
    assert_eq!(repaired.territories[0].routes[0], vec![3, 2, 1]);
    assert!(repaired.penalty(&inst, Default::default()).is_zero());
}

#[test]
fn stage2_gives_up_on_saturated_capacity() {
    let mut d = line(&[10.0, 20.0, 30.0], 10.0, 200.0);
    d.demands[1][0] = 8.0;
    d.demands[2][0] = 5.0;
    d.demands[3][0] = 8.0;
    let inst = Instance::new(d).unwrap();
    let partial = PartialSolution { territories: vec![wt(0, &[1], vec![1], &inst), wt(1, &[3], vec![3], &inst)] };
    assert!(stage1_feasible_merge(2, &partial, &inst).is_none());
    assert!(stage2_penalized_merge(2, &partial, &SolverParams::default(), &inst).is_none());
}

#[test]
fn stages_need_an_adjacent_territory() {
    let inst = Instance::new(line(&[10.0, 20.0, 30.0], 10.0, 200.0)).unwrap();
    let partial = PartialSolution { territories: vec![wt(0, &[3], vec![3], &inst)] };
    assert!(stage1_feasible_merge(1, &partial, &inst).is_none());
    assert!(stage2_penalized_merge(1, &partial, &SolverParams::default(), &inst).is_none());
}

fn eject_fixture() -> Instance {
    let mut d = line(&[10.0, 20.0, 30.0, 40.0, 50.0], 10.0, 500.0);
    for i in 1..=5 {
        d.demands[i][0] = 3.0;
    }
    Instance::new(d).unwrap()
}

#[test]
fn stage3_ejects_the_cheapest_set() {
    let inst = eject_fixture();
    let partial = PartialSolution { territories: vec![wt(0, &[2, 3, 4], vec![2, 3, 4], &inst)] };
    let mut pool = EjectionPool::new([5], inst.nodes());
    pool.bump(1);
    let params = SolverParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let step = stage3_eject_merge(1, &partial, &pool, &params, &inst, &mut rng).unwrap();
    assert_eq!(step.ejected, vec![4]);
    assert_eq!(step.partial.territories[0].members, vec![1, 2, 3]);

    pool.bump(4);
    pool.bump(4);
    let step = stage3_eject_merge(1, &partial, &pool, &params, &inst, &mut rng).unwrap();
    assert_eq!(step.ejected, vec![1]);
    assert_eq!(step.partial, partial);
}

#[test]
fn stage3_with_no_ejections_allowed() {
    let inst = eject_fixture();
    let partial = PartialSolution { territories: vec![wt(0, &[2, 3, 4], vec![2, 3, 4], &inst)] };
    let pool = EjectionPool::new([5], inst.nodes());
    let params = SolverParams { k_max: 0, ..SolverParams::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(stage3_eject_merge(1, &partial, &pool, &params, &inst, &mut rng).is_none());
}

#[test]
fn interior_units_are_not_ejectable() {
    let inst = eject_fixture();
    // 3 sits between 2 and 4 with no pool neighbour; ejecting it alone would
    // also split the territory
    let partial = PartialSolution { territories: vec![wt(0, &[2, 3, 4], vec![2, 3, 4], &inst)] };
    let mut pool = EjectionPool::new([5], inst.nodes());
    pool.bump(1);
    pool.bump(1);
    pool.bump(4);
    pool.bump(4);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let step = stage3_eject_merge(1, &partial, &pool, &SolverParams::default(), &inst, &mut rng).unwrap();
    assert!(!step.ejected.contains(&3));
}

fn run_merge(partial: PartialSolution, pool: EjectionPool, params: &SolverParams, inst: &Instance) -> MergeResult {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let clock = Clock::start(Duration::from_secs(10));
    merge_heuristic(partial, pool, params, inst, &mut rng, &clock, &mut NoObserver)
}

#[test]
fn merge_succeeds_through_stage1() {
    let inst = Instance::new(line(&[10.0, 20.0, 30.0], 10.0, 200.0)).unwrap();
    let partial = PartialSolution { territories: vec![wt(0, &[1], vec![1], &inst)] };
    let res = run_merge(partial, EjectionPool::new([2, 3], inst.nodes()), &SolverParams::default(), &inst);
    assert_eq!(res.status, MergeStatus::Success);
    assert_eq!(res.counters.stage1, 2);
    assert_eq!(res.partial.territories[0].members, vec![1, 2, 3]);
}

#[test]
fn merge_fails_without_selectable_unit() {
    let inst = Instance::new(line(&[10.0, 20.0, 30.0], 10.0, 200.0)).unwrap();
    let partial = PartialSolution { territories: vec![wt(0, &[1], vec![1], &inst)] };
    let res = run_merge(partial, EjectionPool::new([3], inst.nodes()), &SolverParams::default(), &inst);
    assert_eq!(res.status, MergeStatus::NoSelectableUnit);
}

#[test]
fn merge_stops_above_penalty_ceiling() {
    let mut d = line(&[10.0, 20.0], 10.0, 200.0);
    d.demands[1][0] = 8.0;
    d.demands[2][0] = 8.0;
    let inst = Instance::new(d).unwrap();
    let partial = PartialSolution { territories: vec![wt(0, &[1], vec![1], &inst)] };
    let params = SolverParams { p_max: 2, ..SolverParams::default() };
    let res = run_merge(partial, EjectionPool::new([2], inst.nodes()), &params, &inst);
    assert_eq!(res.status, MergeStatus::PenaltyCeiling);
    assert!(res.pool.penalty(2) > 2);
    assert_eq!(res.counters.stage3, 2);
}

#[test]
fn reoptimize_uncrosses_routes() {
    let mut coords = vec![Point::new(0.0, 0.0)];
    coords.extend([(5.0, 0.0), (5.0, 5.0), (0.0, 5.0)].iter().map(|&(x, y)| Point::new(x, y)));
    let mut d = InstanceData::euclidean("sq", coords, 1, 10.0, 500.0);
    d.compactness_bound = 100.0;
    for i in 1..=3 {
        d.demands[i][0] = 1.0;
    }
    let inst = Instance::new(d).unwrap();
    let mut partial = PartialSolution { territories: vec![wt(0, &[1, 2, 3], vec![2, 1, 3], &inst)] };
    let before = partial.travel_time(&inst);
    reoptimize(&mut partial, &inst);
    assert!(partial.travel_time(&inst) < before);
    let fixed = partial.clone();
    reoptimize(&mut partial, &inst);
    assert_eq!(partial, fixed);
}

#[derive(Default)]
struct Recorder {
    stack_max: usize,
    incumbents: Vec<usize>,
}

impl SolverObserver for Recorder {
    fn stack(&mut self, counts: &[usize]) {
        self.stack_max = self.stack_max.max(counts.len());
        assert!(counts.windows(2).all(|w| w[0] > w[1]));
    }

    fn incumbent(&mut self, territories: usize) {
        self.incumbents.push(territories);
    }
}

#[test]
fn search_is_deterministic_and_monotone() {
    let xs: Vec<f64> = (1..=8).map(|i| 10.0 * i as f64).collect();
    let mut d = line(&xs, 4.0, 400.0);
    for i in 1..=8 {
        d.demands[i][0] = 1.0 + (i % 3) as f64;
    }
    let inst = Instance::new(d).unwrap();
    let params = SolverParams { eta: 2, ..quick() };
    let mut rec = Recorder::default();
    let a = solve_observed(&inst, &params, &mut rec).unwrap();
    let b = solve(&inst, &params).unwrap();
    assert_eq!(a.solution, b.solution);
    assert_eq!(a.trace, b.trace);
    assert!(rec.stack_max <= 2);
    assert!(rec.incumbents.windows(2).all(|w| w[1] < w[0]));
    assert!(validate(&inst, &a.solution).unwrap().is_feasible());
}
