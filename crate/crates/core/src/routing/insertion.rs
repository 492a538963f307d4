use serde::{Deserialize, Serialize};

use crate::model::{simulate, Instance, TIME_EPS};

use super::partial::WorkingTerritory;
use super::penalty::{route_penalty, PenaltyWeights};
use super::RoutingError;

/// Best position for a customer on one day's route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsertionCandidate {
    pub day: usize,
    /// Index in the visit sequence the customer is inserted before.
    pub position: usize,
    /// Increase of the depot return time, minutes.
    pub delta_cost: f64,
    pub feasible: bool,
    /// Capacity excess of the resulting route, kg.
    pub capacity_excess: f64,
    /// Lateness plus overtime of the resulting route, minutes.
    pub lateness: f64,
}

/// Insertion of one customer into a territory over all its active days.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Insertion {
    pub candidates: Vec<InsertionCandidate>,
}

impl Insertion {
    /// True iff every active day has a feasible position.
    pub fn is_feasible(&self) -> bool {
        self.candidates.iter().all(|c| c.feasible)
    }

    pub fn total_delta(&self) -> f64 {
        self.candidates.iter().map(|c| c.delta_cost).sum()
    }

    /// Combined penalty of the resulting routes.
    pub fn penalty(&self, w: PenaltyWeights) -> f64 {
        self.candidates
            .iter()
            .map(|c| w.capacity * c.capacity_excess + w.time_window * c.lateness)
            .sum()
    }

    /// Writes the customer into the chosen positions.
    pub fn apply(&self, customer: usize, routes: &mut [Vec<usize>]) {
        for c in &self.candidates {
            routes[c.day].insert(c.position, customer);
        }
    }
}

/// Depot return time of a route; an empty route returns when it leaves.
pub fn completion_time(visits: &[usize], day: usize, inst: &Instance) -> f64 {
    if visits.is_empty() {
        inst.window(0).open
    } else {
        simulate(visits, day, inst).return_time
    }
}

/// Best position for `customer` on one route.
///
/// Positions are ranked by the penalty of the resulting route, then by the
/// completion-time increase, then by index. When a feasible position exists
/// this is the cheapest feasible one.
pub fn best_position(
    customer: usize,
    visits: &[usize],
    day: usize,
    inst: &Instance,
    w: PenaltyWeights,
) -> InsertionCandidate {
    let base = completion_time(visits, day, inst);
    let mut trial = Vec::with_capacity(visits.len() + 1);
    let mut best: Option<(f64, InsertionCandidate)> = None;
    for pos in 0..=visits.len() {
        trial.clear();
        trial.extend_from_slice(&visits[..pos]);
        trial.push(customer);
        trial.extend_from_slice(&visits[pos..]);
        let sim = simulate(&trial, day, inst);
        let p = route_penalty(&trial, day, inst, w);
        let cand = InsertionCandidate {
            day,
            position: pos,
            delta_cost: sim.return_time - base,
            feasible: p.is_zero(),
            capacity_excess: p.capacity,
            lateness: p.time_window,
        };
        let key = if p.is_zero() { 0.0 } else { p.total };
        let better = match &best {
            None => true,
            Some((bk, b)) => key < *bk || (key == *bk && cand.delta_cost < b.delta_cost - TIME_EPS),
        };
        if better {
            best = Some((key, cand));
        }
    }
    best.expect("at least one position").1
}

/// Per-day best insertion of `customer` into `territory`.
pub fn best_insertion(
    customer: usize,
    territory: &WorkingTerritory,
    inst: &Instance,
) -> Result<Insertion, RoutingError> {
    insertion_with(customer, territory, inst, PenaltyWeights::default())
}

/// As [`best_insertion`] with explicit penalty weights for ranking
/// infeasible positions.
pub fn insertion_with(
    customer: usize,
    territory: &WorkingTerritory,
    inst: &Instance,
    w: PenaltyWeights,
) -> Result<Insertion, RoutingError> {
    if customer == 0 || customer > inst.n() {
        return Err(RoutingError::UnknownCustomer(customer));
    }
    if territory.contains(customer) {
        return Err(RoutingError::AlreadyMember { customer, territory: territory.id });
    }
    let candidates = inst
        .active_days(customer)
        .map(|d| best_position(customer, &territory.routes[d], d, inst, w))
        .collect();
    Ok(Insertion { candidates })
}
