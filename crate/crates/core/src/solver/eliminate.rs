use std::collections::VecDeque;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::Instance;
use crate::routing::{PartialSolution, WorkingTerritory};

use super::merge::{merge_heuristic, EjectionPool};
use super::trace::{MergeStatus, SolverObserver, TraceEvent};
use super::{Clock, SolverError, SolverParams};

/// One territory per customer, each visited alone on its active days.
///
/// Fails with the customers that cannot be served even alone, or whose own
/// cell already breaks the compactness bound.
pub fn initial_solution(inst: &Instance) -> Result<PartialSolution, SolverError> {
    let weights = Default::default();
    let mut infeasible = Vec::new();
    let mut territories = Vec::with_capacity(inst.n());
    for c in inst.customers() {
        let t = WorkingTerritory::singleton(c - 1, c, inst);
        let too_thin = t.ratio(inst) > inst.compactness_bound() + 1e-9;
        if too_thin || !t.penalty(inst, weights).is_zero() {
            infeasible.push(c);
        }
        territories.push(t);
    }
    if infeasible.is_empty() {
        Ok(PartialSolution { territories })
    } else {
        Err(SolverError::IntrinsicallyInfeasible { customers: infeasible })
    }
}

/// Territory indices by ascending active customer-days, then id, then total
/// demand.
pub fn elimination_order(sol: &PartialSolution, inst: &Instance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sol.len()).collect();
    let key = |k: usize| {
        let t = &sol.territories[k];
        (t.active_customer_days(inst), t.id, t.total_demand(inst))
    };
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0)
            .then(ka.1.cmp(&kb.1))
            .then(ka.2.partial_cmp(&kb.2).unwrap_or(std::cmp::Ordering::Equal))
    });
    order
}

struct Frame {
    solution: PartialSolution,
    order: Vec<usize>,
    cursor: usize,
}

impl Frame {
    fn new(solution: PartialSolution, inst: &Instance) -> Self {
        let order = elimination_order(&solution, inst);
        Frame { solution, order, cursor: 0 }
    }
}

/// Counters of an elimination run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EliminationStats {
    pub attempts: usize,
    pub successes: usize,
    pub backtracks: usize,
    pub stack_peak: usize,
    pub timed_out: bool,
    pub time_to_best: Duration,
    pub elapsed: Duration,
}

/// Outcome of [`eliminate_territories`].
pub struct Elimination {
    pub best: PartialSolution,
    pub stats: EliminationStats,
    pub trace: Vec<TraceEvent>,
}

/// Territory elimination with a bounded backtrack stack.
///
/// Territories of the current solution are tried in elimination order; a
/// successful merge run replaces the current solution and restarts the order.
/// Strict improvements on the incumbent are pushed onto the stack (the oldest
/// entry is dropped when it is full). When every territory of the current
/// solution has been tried, the search resumes from the top of the stack, or
/// from the entry below it when the top itself is exhausted. Stops when the
/// stack is empty or the clock runs out.
pub fn eliminate_territories(
    start: PartialSolution,
    params: &SolverParams,
    inst: &Instance,
    observer: &mut dyn SolverObserver,
) -> Elimination {
    let clock = Clock::start(params.ct_max());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trace = Vec::new();
    let mut stats = EliminationStats::default();

    let mut best = start.clone();
    let mut stack: VecDeque<Frame> = VecDeque::with_capacity(params.eta);
    stack.push_back(Frame::new(start, inst));
    let mut detached: Option<Frame> = None;
    stats.stack_peak = 1;
    observer.stack(&stack_counts(&stack));

    loop {
        if clock.expired() {
            stats.timed_out = true;
            trace.push(TraceEvent::Timeout { attempt: stats.attempts });
            break;
        }
        let frame = match detached.as_mut() {
            Some(f) => f,
            None => match stack.back_mut() {
                Some(f) => f,
                None => break,
            },
        };
        if frame.cursor >= frame.order.len() {
            if detached.take().is_none() {
                stack.pop_back();
                observer.stack(&stack_counts(&stack));
            }
            stats.backtracks += 1;
            if let Some(top) = stack.back() {
                trace.push(TraceEvent::Backtrack {
                    attempt: stats.attempts,
                    stack: stack.len(),
                    territories: top.solution.len(),
                });
            }
            continue;
        }
        let k = frame.order[frame.cursor];
        frame.cursor += 1;

        let mut partial = frame.solution.clone();
        let removed = partial.territories.remove(k);
        let territories = frame.solution.len();
        let pool = EjectionPool::new(removed.members.iter().copied(), inst.nodes());
        let pool_size = pool.len();
        stats.attempts += 1;
        let result = merge_heuristic(partial, pool, params, inst, &mut rng, &clock, observer);
        trace.push(TraceEvent::Elimination {
            attempt: stats.attempts,
            territory: removed.id,
            territories,
            pool: pool_size,
            status: result.status,
            counters: result.counters,
        });
        if result.status != MergeStatus::Success {
            continue;
        }
        stats.successes += 1;
        let next = result.partial;
        observer.current(&next);
        if next.len() < best.len() {
            best = next.clone();
            stats.time_to_best = clock.elapsed();
            trace.push(TraceEvent::Incumbent { attempt: stats.attempts, territories: best.len() });
            observer.incumbent(best.len());
            if stack.len() == params.eta {
                stack.pop_front();
            }
            stack.push_back(Frame::new(next, inst));
            stats.stack_peak = stats.stack_peak.max(stack.len());
            observer.stack(&stack_counts(&stack));
            detached = None;
        } else {
            detached = Some(Frame::new(next, inst));
        }
    }
    stats.elapsed = clock.elapsed();
    Elimination { best, stats, trace }
}

fn stack_counts(stack: &VecDeque<Frame>) -> Vec<usize> {
    stack.iter().map(|f| f.solution.len()).collect()
}
