use serde::{Deserialize, Serialize};

use crate::routing::PartialSolution;

use super::EjectionPool;

/// How a merge run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeStatus {
    Success,
    PenaltyCeiling,
    NoSelectableUnit,
    AttemptCap,
    Timeout,
}

/// Per-run counters of the merge heuristic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeCounters {
    pub stage1: usize,
    pub stage2: usize,
    pub stage3: usize,
    pub ejected: usize,
    pub pool_peak: usize,
}

/// One line of the JSONL trace. Carries no wall-clock data so that equal
/// seeds give equal traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Start {
        instance: String,
        customers: usize,
        days: usize,
        territories: usize,
        seed: u64,
    },
    Elimination {
        attempt: usize,
        territory: usize,
        territories: usize,
        pool: usize,
        status: MergeStatus,
        #[serde(flatten)]
        counters: MergeCounters,
    },
    Incumbent {
        attempt: usize,
        territories: usize,
    },
    Backtrack {
        attempt: usize,
        stack: usize,
        territories: usize,
    },
    Timeout {
        attempt: usize,
    },
    Reoptimize {
        relocations: usize,
        travel_before: f64,
        travel_after: f64,
        compactness_before: f64,
        compactness_after: f64,
    },
    Finish {
        territories: usize,
        travel_time: f64,
    },
}

/// Renders events as JSON Lines.
pub fn trace_to_jsonl(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("trace event serializes"));
        out.push('\n');
    }
    out
}

/// Hooks into the search, for instrumentation and tests.
pub trait SolverObserver {
    /// After every merge-heuristic step.
    fn merge_step(&mut self, _partial: &PartialSolution, _pool: &EjectionPool) {}
    /// After every change of the backtrack stack, with the territory count of
    /// each entry from bottom to top.
    fn stack(&mut self, _counts: &[usize]) {}
    /// When the incumbent improves.
    fn incumbent(&mut self, _territories: usize) {}
    /// Whenever a complete solution is accepted as the current one.
    fn current(&mut self, _solution: &PartialSolution) {}
}

/// Observer that ignores everything.
pub struct NoObserver;

impl SolverObserver for NoObserver {}
