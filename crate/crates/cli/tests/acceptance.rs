//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Run all with `cargo test -p tddmp-cli --test acceptance`, or a subset by
//! number, e.g. `-- 1 7`. The external MILP solver for criterion 2 is taken
//! from `TDDMP_MILP_SOLVER` (a shell command with `{lp}` and `{sol}`
//! placeholders) and defaults to the bundled HiGHS script.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use tddmp::exact::{
    assignment_from_solution, emit_milp, exact_solve, run_external_solver, values_for, ExactLimits, MilpOptions,
};
use tddmp::generators::{
    make_month_pair, make_monthly_instance, make_random_small_instance, make_small_instance, parse_solomon,
    GeneratorParams, MonthlyProfile, C101_HEAD,
};
use tddmp::geometry::{regular_polygon, CompactnessMode, GeometryTable};
use tddmp::model::{route_travel, validate, ConstraintFamily, Instance, InstanceData, Solution};
use tddmp::routing::{relocate, two_opt, PartialSolution, PenaltyWeights, RelocateObjective, RouteObjective};
use tddmp::solver::{effective_instance, initial_solution, solve, solve_observed, EjectionPool, SolverObserver, SolverParams};
use tddmp::Point;
use tddmp_cli::bench::bench_one;
use tddmp_cli::next_month::{next_month, NextMonthReport};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_small(seed: u64, n: usize, days: usize, frequency: f64, capacity_factor: f64) -> Instance {
    let p = GeneratorParams {
        customer_count: n,
        horizon_days: days,
        service_frequency: frequency,
        capacity_factor,
        rng_seed: seed,
    };
    make_random_small_instance(&p).expect("generator parameters are valid")
}

fn oracle_instance(seed: u64) -> Instance {
    random_small(seed, 6, 3, 0.7, 0.5)
}

fn minute() -> SolverParams {
    SolverParams::default().with_ct_max(Duration::from_secs(60))
}

fn criterion_1() -> Outcome {
    let mut matched = 0;
    let mut below = Vec::new();
    let mut misses = Vec::new();
    for seed in 0..30 {
        let inst = oracle_instance(seed);
        let optimum = exact_solve(&inst, ExactLimits::default()).expect("within oracle limits").optimum();
        let result = solve(&inst, &minute().with_seed(seed)).expect("instance is servable");
        let found = result.solution.territory_count();
        let clean = validate(&inst, &result.solution).map(|r| r.is_feasible()).unwrap_or(false);
        match optimum {
            Some(opt) if found == opt && clean => matched += 1,
            Some(opt) if found < opt => below.push(seed),
            _ => misses.push(seed),
        }
    }
    outcome(
        matched >= 28 && below.is_empty(),
        format!("{matched}/30 match the oracle, below: {below:?}, misses: {misses:?}"),
    )
}

fn criterion_2() -> Outcome {
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts/solve_lp.py");
    let command = std::env::var("TDDMP_MILP_SOLVER")
        .unwrap_or_else(|_| format!("python3 {} {{lp}} {{sol}} 60", script.display()));
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut agree = 0;
    let mut notes = Vec::new();
    for seed in 0..10 {
        let inst = oracle_instance(seed);
        let exact = exact_solve(&inst, ExactLimits::default()).expect("within oracle limits");
        let art = emit_milp(&inst, MilpOptions::default()).expect("sum-of-sqrts instance");
        // the oracle's partition must be a feasible point of the model
        if let Some(opt_sol) = match &exact {
            tddmp::exact::ExactOutcome::Optimal { solution, .. } => Some(solution),
            _ => None,
        } {
            let point = assignment_from_solution(opt_sol, &inst, &art).expect("oracle solution maps");
            if !art.lp.violations(&point, 1e-6).is_empty() {
                notes.push(format!("seed {seed}: oracle point infeasible in the model"));
                continue;
            }
        }
        let values = match run_external_solver(&command, &art.to_lp(&inst), dir.path(), &format!("s{seed}")) {
            Ok(v) => v,
            Err(e) => {
                notes.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let x = match values_for(&art.lp, &values) {
            Ok(x) => x,
            Err(e) => {
                notes.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let milp = art.lp.objective_value(&x).round() as usize;
        let violations = art.lp.violations(&x, 1e-5).len();
        if Some(milp) == exact.optimum() && violations == 0 {
            agree += 1;
        } else {
            notes.push(format!("seed {seed}: milp {milp}, oracle {:?}, {violations} violated rows", exact.optimum()));
        }
    }
    outcome(agree == 10, format!("{agree}/10 agree exactly {notes:?}"))
}

fn criterion_3() -> Outcome {
    let solomon = parse_solomon(C101_HEAD).expect("bundled excerpt parses");
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for seed in 0..10 {
        let p = GeneratorParams::default().with_seed(seed);
        let inst = make_small_instance(&solomon, &p).expect("ten customers available");
        let started = Instant::now();
        let result = solve(&inst, &minute().with_seed(seed)).expect("servable");
        let total = started.elapsed().as_secs_f64();
        let to_best = result.stats.time_to_best;
        worst = worst.max(to_best);
        if to_best > 1.0 || !validate(&inst, &result.solution).map(|r| r.is_feasible()).unwrap_or(false) {
            failures.push((seed, to_best, total));
        }
    }
    outcome(failures.is_empty(), format!("slowest final incumbent {worst:.4} s, failures {failures:?}"))
}

fn criterion_4() -> Outcome {
    let square = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
    let sq = GeometryTable::from_polygons(vec![square]).expect("square");
    let square_cr = sq.compactness_ratio(&[0], CompactnessMode::SqrtOfSum).expect("unit exists");
    let gon = GeometryTable::from_polygons(vec![regular_polygon(Point::new(0.0, 0.0), 1.0, 64)]).expect("64-gon");
    let gon_cr = gon.compactness_ratio(&[0], CompactnessMode::SqrtOfSum).expect("unit exists");
    let circle = 2.0 * std::f64::consts::PI.sqrt();
    let rel = (gon_cr - circle).abs() / circle;
    outcome(square_cr == 4.0 && rel <= 0.005, format!("square {square_cr}, 64-gon {gon_cr:.6} ({:.4}% off 2*sqrt(pi))", rel * 100.0))
}

/// Observer checking the search invariants as they happen.
#[derive(Default)]
struct Invariants {
    eta: usize,
    customers: usize,
    incumbents: Vec<usize>,
    errors: Vec<String>,
}

impl SolverObserver for Invariants {
    fn merge_step(&mut self, partial: &PartialSolution, pool: &EjectionPool) {
        let mut seen = HashSet::new();
        let assigned = partial.territories.iter().flat_map(|t| t.members.iter().copied());
        for c in assigned.chain(pool.units().iter().copied()) {
            if !seen.insert(c) {
                self.errors.push(format!("customer {c} counted twice"));
            }
        }
        if seen.len() != self.customers {
            self.errors.push(format!("{} of {} customers accounted for", seen.len(), self.customers));
        }
    }

    fn stack(&mut self, counts: &[usize]) {
        if counts.len() > self.eta {
            self.errors.push(format!("stack of {} above eta {}", counts.len(), self.eta));
        }
    }

    fn incumbent(&mut self, territories: usize) {
        if self.incumbents.last().is_some_and(|&last| territories > last) {
            self.errors.push(format!("incumbent rose to {territories}"));
        }
        self.incumbents.push(territories);
    }
}

struct FuzzCase {
    inst: Instance,
    params: SolverParams,
}

fn fuzz_case(k: u64) -> FuzzCase {
    let n = 2 + (k % 11) as usize;
    let days = 1 + ((k / 11) % 4) as usize;
    let frequency = [0.3, 0.5, 0.7, 0.9][(k % 4) as usize];
    let capacity_factor = [0.3, 0.5, 0.8][(k % 3) as usize];
    let params = SolverParams {
        eta: 1 + (k % 5) as usize,
        p_max: 1 + (k % 7) as u32,
        k_max: (k % 4) as usize,
        seed: k.wrapping_mul(7919),
        compactness_bound: if k % 5 == 0 { Some(6.0) } else { None },
        compactness_mode: if k % 6 == 0 { Some(CompactnessMode::SqrtOfSum) } else { None },
        ..minute()
    };
    // redraw instances with a single cell beyond the compactness bound
    let inst = (0..)
        .map(|r: u64| random_small(1000 + k + r * 100_000, n, days, frequency, capacity_factor))
        .find(|inst| initial_solution(&effective_instance(inst, &params)).is_ok())
        .expect("some draw is servable");
    FuzzCase { inst, params }
}

const FUZZ_SOLVES: u64 = 900;
const FUZZ_BENCH: u64 = 50;
const FUZZ_MONTHS: u64 = 50;

fn route_level_clean(inst: &Instance, sol: &Solution) -> bool {
    validate(inst, sol).is_ok_and(|r| {
        r.of_family(ConstraintFamily::Capacity).count() == 0 && r.of_family(ConstraintFamily::Schedule).count() == 0
    })
}

fn criterion_5() -> Outcome {
    let mut clean = 0;
    let mut dirty = Vec::new();
    for k in 0..FUZZ_SOLVES {
        let case = fuzz_case(k);
        let inst = effective_instance(&case.inst, &case.params);
        let sol = solve(&case.inst, &case.params).expect("servable").solution;
        if validate(&inst, &sol).is_ok_and(|r| r.is_feasible()) {
            clean += 1;
        } else {
            dirty.push(format!("solve {k}"));
        }
    }
    for k in 0..FUZZ_BENCH {
        let case = fuzz_case(FUZZ_SOLVES + k);
        let inst = effective_instance(&case.inst, &case.params);
        let (row, result) = bench_one(&case.inst, &case.params, None).expect("servable");
        if row.feasible && validate(&inst, &result.solution).is_ok_and(|r| r.is_feasible()) {
            clean += 1;
        } else {
            dirty.push(format!("bench {k}"));
        }
    }
    for k in 0..FUZZ_MONTHS {
        let profile = MonthlyProfile { new_rate: 0.1, ..MonthlyProfile::scaled(30 + (k % 4) as usize * 10, 3) };
        let pair = make_month_pair(&profile, 500 + k).expect("valid profile");
        let sol = solve(&pair.month1, &minute().with_seed(k)).expect("servable").solution;
        let report = next_month(&sol, &pair.month2, &pair.shared).expect("consistent map");
        if validate(&pair.month1, &sol).is_ok_and(|r| r.is_feasible()) && route_level_clean(&pair.month2, &report.plan) {
            clean += 1;
        } else {
            dirty.push(format!("next-month {k}"));
        }
    }
    let total = FUZZ_SOLVES + FUZZ_BENCH + FUZZ_MONTHS;
    outcome(dirty.is_empty(), format!("{clean}/{total} solutions validator-clean, failing: {dirty:?}"))
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    for k in 0..FUZZ_SOLVES + FUZZ_BENCH {
        let case = fuzz_case(k);
        let mut obs = Invariants { eta: case.params.eta, customers: case.inst.n(), ..Invariants::default() };
        let a = solve_observed(&case.inst, &case.params, &mut obs).expect("servable");
        let b = solve(&case.inst, &case.params).expect("servable");
        if a.stats.timed_out {
            failures.push(format!("case {k}: timed out"));
        }
        if a.solution != b.solution || a.trace != b.trace {
            failures.push(format!("case {k}: seed repeat differs"));
        }
        if a.solution.territory_count() > a.stats.initial_territories {
            failures.push(format!("case {k}: final above the initial solution"));
        }
        failures.extend(obs.errors.iter().map(|e| format!("case {k}: {e}")));
    }
    let runs = FUZZ_SOLVES + FUZZ_BENCH;
    outcome(failures.is_empty(), format!("{runs} seeded runs twice, {} violations {:?}", failures.len(), failures.iter().take(5).collect::<Vec<_>>()))
}

fn criterion_7() -> Outcome {
    let profile = MonthlyProfile::scaled(300, 10);
    let inst = make_monthly_instance(&profile, 7).expect("valid profile");
    let result = solve(&inst, &minute()).expect("servable");
    let initial = result.stats.initial_territories;
    let nv = result.solution.territory_count();
    let reduction = 1.0 - nv as f64 / initial as f64;
    let max_cr = result.solution.territories.iter().map(|t| t.compactness).fold(0.0, f64::max);
    let clean = validate(&inst, &result.solution).is_ok_and(|r| r.is_feasible());
    let f = inst.compactness_bound();
    outcome(
        reduction >= 0.30 && max_cr <= f && clean,
        format!(
            "{initial} -> {nv} territories ({:.1}% fewer), max CR {max_cr:.3} (F = {f}), validator clean: {clean}, active share {:.3}",
            reduction * 100.0,
            tddmp::generators::mean_active_fraction(&inst)
        ),
    )
}

fn criterion_8() -> Outcome {
    let profile = MonthlyProfile { new_rate: 0.1, ..MonthlyProfile::scaled(300, 10) };
    let params = SolverParams::default().with_ct_max(Duration::from_secs(10));
    let mut zero = 0;
    let mut rows = Vec::new();
    let mut inconsistent = Vec::new();
    for seed in 0..10 {
        let pair = make_month_pair(&profile, seed).expect("valid profile");
        let sol = solve(&pair.month1, &params.clone().with_seed(seed)).expect("servable").solution;
        let report = next_month(&sol, &pair.month2, &pair.shared).expect("consistent map");
        let (tic, tid, iac, iatw) = NextMonthReport::recompute(&report.visits);
        let demand: f64 = report.visits.iter().map(|v| pair.month2.demand(v.customer, v.day)).sum();
        if (tic, tid) != (report.tic, report.tid)
            || (iac - report.iac).abs() > 1e-9
            || (demand - report.iac).abs() > 1e-9
            || (iatw - report.iatw).abs() > 1e-12
            || !route_level_clean(&pair.month2, &report.plan)
        {
            inconsistent.push(seed);
        }
        if report.tic == 0 {
            zero += 1;
        }
        rows.push(format!("{}/{}/{:.0}/{:.2}", report.tic, report.tid, report.iac, report.iatw));
    }
    outcome(
        zero >= 7 && inconsistent.is_empty(),
        format!("TIC = 0 in {zero}/10 pairs, TIC/TID/IAC/IATW {rows:?}, inconsistent {inconsistent:?}"),
    )
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let coords = [0.0, 10.0, 20.0, 30.0, 40.0].iter().map(|&x| Point::new(x, 0.0)).collect();
    let mut data = InstanceData::euclidean("collinear", coords, 1, 100.0, 1000.0);
    for i in 1..=4 {
        data.demands[i][0] = 1.0;
    }
    let inst = Instance::new(data).expect("valid instance");
    let perms = permutations(&[1, 2, 3, 4]);
    let optimum = perms.iter().map(|p| route_travel(p, &inst)).fold(f64::INFINITY, f64::min);
    let off = perms
        .iter()
        .filter(|p| route_travel(&two_opt(p, 0, &inst, RouteObjective::TravelTime), &inst) != optimum)
        .count();

    let mut broken = Vec::new();
    for k in 0..FUZZ_SOLVES + FUZZ_BENCH {
        let case = fuzz_case(k);
        let inst = effective_instance(&case.inst, &case.params);
        let sol = solve(&case.inst, &case.params).expect("servable").solution;
        for objective in [RelocateObjective::Compactness, RelocateObjective::Penalty(PenaltyWeights::default())] {
            let mut partial = PartialSolution::from_solution(&sol, &inst);
            relocate(&mut partial, &inst, objective);
            for t in partial.territories.iter().filter(|t| !t.members.is_empty()) {
                let geo = inst.geometry();
                let cr = geo.compactness_ratio(&t.members, inst.compactness_mode()).unwrap_or(f64::INFINITY);
                if !geo.is_contiguous(&t.members) || cr > inst.compactness_bound() + 1e-9 {
                    broken.push(k);
                }
            }
        }
    }
    outcome(
        off == 0 && broken.is_empty(),
        format!("{}/24 permutations reach the optimum {optimum}, relocation breaks shape in cases {broken:?}", 24 - off),
    )
}

/// Criteria reported but not gating the exit status unless
/// `TDDMP_ACCEPTANCE_STRICT` is set.
const NON_GATING: [usize; 1] = [8];

fn main() {
    let strict = std::env::var_os("TDDMP_ACCEPTANCE_STRICT").is_some();
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle optimality match", criterion_1),
        ("MILP/oracle agreement", criterion_2),
        ("small-instance speed", criterion_3),
        ("compactness constants", criterion_4),
        ("full-constraint feasibility", criterion_5),
        ("search invariants", criterion_6),
        ("scaled monthly shape", criterion_7),
        ("next-month rule", criterion_8),
        ("local-search soundness", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let number = k + 1;
        if !wanted.is_empty() && !wanted.contains(&number) {
            continue;
        }
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let gating = strict || !NON_GATING.contains(&number);
        if !result.pass && gating {
            failed += 1;
        }
        println!(
            "criterion {number} ({name}): {}{} [{:.1} s] {}",
            if result.pass { "PASS" } else { "FAIL" },
            if gating { "" } else { " (non-gating)" },
            started.elapsed().as_secs_f64(),
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
