//! Territory elimination with backtracking, the three-stage merge heuristic
//! and the final reoptimization.

mod eliminate;
mod merge;
mod params;
mod reoptimize;
mod trace;

use std::borrow::Cow;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, Solution};
use crate::routing::PartialSolution;

pub use self::eliminate::{elimination_order, eliminate_territories, initial_solution, Elimination, EliminationStats};
pub use self::merge::{
    adjacent_territories, merge_heuristic, stage1_feasible_merge, stage2_penalized_merge, stage3_eject_merge,
    EjectMerge, EjectionPool, MergeMove, MergeResult,
};
pub use self::params::SolverParams;
pub use self::reoptimize::reoptimize;
pub use self::trace::{trace_to_jsonl, MergeCounters, MergeStatus, NoObserver, SolverObserver, TraceEvent};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("customers {customers:?} cannot be served feasibly even on their own")]
    IntrinsicallyInfeasible { customers: Vec<usize> },
    #[error("invalid parameters: {0}")]
    Params(String),
}

/// Wall-clock budget.
#[derive(Clone, Copy, Debug)]
pub struct Clock {
    start: Instant,
    budget: Duration,
}

impl Clock {
    pub fn start(budget: Duration) -> Self {
        Clock { start: Instant::now(), budget }
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn expired(&self) -> bool {
        self.start.elapsed() >= self.budget
    }
}

/// Run summary.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub initial_territories: usize,
    pub territories: usize,
    pub attempts: usize,
    pub successes: usize,
    pub backtracks: usize,
    pub stack_peak: usize,
    pub timed_out: bool,
    /// Seconds from the start of the elimination phase to the last incumbent
    /// improvement.
    pub time_to_best: f64,
    pub elimination_secs: f64,
    pub reoptimize_secs: f64,
    pub total_secs: f64,
}

pub struct SolveResult {
    pub solution: Solution,
    pub stats: SolveStats,
    pub trace: Vec<TraceEvent>,
}

/// The instance with the parameter overrides of compactness bound and mode.
pub fn effective_instance<'a>(inst: &'a Instance, params: &SolverParams) -> Cow<'a, Instance> {
    let bound = params.compactness_bound.unwrap_or(inst.compactness_bound());
    let mode = params.compactness_mode.unwrap_or(inst.compactness_mode());
    if bound == inst.compactness_bound() && mode == inst.compactness_mode() {
        Cow::Borrowed(inst)
    } else {
        Cow::Owned(inst.with_compactness(bound, mode))
    }
}

/// Full run: singleton start, elimination, reoptimization.
pub fn solve(inst: &Instance, params: &SolverParams) -> Result<SolveResult, SolverError> {
    solve_observed(inst, params, &mut NoObserver)
}

pub fn solve_observed(
    inst: &Instance,
    params: &SolverParams,
    observer: &mut dyn SolverObserver,
) -> Result<SolveResult, SolverError> {
    params.validate()?;
    let started = Instant::now();
    let inst = effective_instance(inst, params);
    let inst = inst.as_ref();
    let start = initial_solution(inst)?;
    let mut trace = vec![TraceEvent::Start {
        instance: inst.name().to_string(),
        customers: inst.n(),
        days: inst.days(),
        territories: start.len(),
        seed: params.seed,
    }];
    let initial_territories = start.len();
    let elim = eliminate_territories(start, params, inst, observer);
    trace.extend(elim.trace);
    let mut best = elim.best;
    let reopt_started = Instant::now();
    if params.reoptimize {
        trace.push(reoptimize(&mut best, inst));
    }
    let reoptimize_secs = reopt_started.elapsed().as_secs_f64();
    let solution = finalize(best, inst);
    trace.push(TraceEvent::Finish {
        territories: solution.territory_count(),
        travel_time: solution.diagnostics.total_travel_time,
    });
    let stats = SolveStats {
        initial_territories,
        territories: solution.territory_count(),
        attempts: elim.stats.attempts,
        successes: elim.stats.successes,
        backtracks: elim.stats.backtracks,
        stack_peak: elim.stats.stack_peak,
        timed_out: elim.stats.timed_out,
        time_to_best: elim.stats.time_to_best.as_secs_f64(),
        elimination_secs: elim.stats.elapsed.as_secs_f64(),
        reoptimize_secs,
        total_secs: started.elapsed().as_secs_f64(),
    };
    Ok(SolveResult { solution, stats, trace })
}

/// Orders territories by smallest member and numbers them from zero.
pub fn finalize(mut partial: PartialSolution, inst: &Instance) -> Solution {
    partial.territories.retain(|t| !t.members.is_empty());
    partial.territories.sort_by_key(|t| t.members[0]);
    for (k, t) in partial.territories.iter_mut().enumerate() {
        t.id = k;
    }
    partial.to_solution(inst)
}

#[cfg(test)]
mod tests;
