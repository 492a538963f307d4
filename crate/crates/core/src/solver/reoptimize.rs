use crate::model::Instance;
use crate::routing::{relocate, two_opt_all, PartialSolution, RelocateObjective, RouteObjective};

use super::trace::TraceEvent;

const ROUND_CAP: usize = 100;

/// Alternates compactness-driven relocation and travel-time 2-opt until
/// neither changes anything.
///
/// The territory count is unchanged, total travel time and the sum of
/// compactness ratios never increase, and feasibility is kept.
pub fn reoptimize(partial: &mut PartialSolution, inst: &Instance) -> TraceEvent {
    let travel_before = partial.travel_time(inst);
    let compactness_before = partial.compactness_sum(inst);
    let mut relocations = 0;
    for _ in 0..ROUND_CAP {
        let moved = relocate(partial, inst, RelocateObjective::Compactness);
        relocations += moved;
        let before = partial.travel_time(inst);
        two_opt_all(partial, inst, RouteObjective::TravelTime);
        let improved = partial.travel_time(inst) < before - 1e-9;
        if moved == 0 && !improved {
            break;
        }
    }
    TraceEvent::Reoptimize {
        relocations,
        travel_before,
        travel_after: partial.travel_time(inst),
        compactness_before,
        compactness_after: partial.compactness_sum(inst),
    }
}
