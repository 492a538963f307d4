//! Per-day route manipulation: insertion, penalties and local search.

mod insertion;
mod local_search;
mod partial;
mod penalty;

use thiserror::Error;

pub use self::insertion::{best_insertion, best_position, completion_time, insertion_with, Insertion, InsertionCandidate};
pub use self::local_search::{
    relocate, relocate_sweep, repair, two_opt, two_opt_all, RelocateObjective, RouteObjective,
};
pub use self::partial::{PartialSolution, WorkingTerritory};
pub use self::penalty::{penalty, route_penalty, PenaltyBreakdown, PenaltyWeights};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("customer {customer} already belongs to territory {territory}")]
    AlreadyMember { customer: usize, territory: usize },
    #[error("unknown customer {0}")]
    UnknownCustomer(usize),
}

#[cfg(test)]
mod tests;
