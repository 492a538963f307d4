use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Instance;

/// Slack below which lateness, overtime and capacity excess count as zero.
pub const TIME_EPS: f64 = 1e-9;

/// A day's route with its earliest-start schedule. The depot is implicit at
/// both ends of `visits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub day: usize,
    pub visits: Vec<usize>,
    pub starts: Vec<f64>,
    #[serde(default)]
    pub waits: Vec<f64>,
}

impl Route {
    pub fn travel_time(&self, inst: &Instance) -> f64 {
        route_travel(&self.visits, inst)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("customer {customer} is not active on day {day}")]
    InactiveCustomer { customer: usize, day: usize },
    #[error("unknown customer {0}")]
    UnknownCustomer(usize),
    #[error("window missed at customer {customer} by {by}")]
    WindowMissed { customer: usize, by: f64 },
    #[error("depot return exceeds the workday by {by}")]
    LateReturn { by: f64 },
}

/// Outcome of a forward pass that records violations instead of stopping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Simulation {
    pub starts: Vec<f64>,
    pub waits: Vec<f64>,
    /// Per-visit `max(0, arrival - b)`.
    pub lateness: Vec<f64>,
    pub load: f64,
    pub return_time: f64,
    pub travel: f64,
}

impl Simulation {
    pub fn total_lateness(&self) -> f64 {
        self.lateness.iter().sum()
    }

    pub fn overtime(&self, inst: &Instance) -> f64 {
        (self.return_time - inst.workday()).max(0.0)
    }

    pub fn capacity_excess(&self, inst: &Instance) -> f64 {
        (self.load - inst.capacity()).max(0.0)
    }
}

/// Earliest-start pass: leave the depot at `a_0`, start each visit at
/// `max(a_j, arrival)`. A late arrival starts immediately and is recorded.
pub fn simulate(visits: &[usize], day: usize, inst: &Instance) -> Simulation {
    let mut sim = Simulation {
        starts: Vec::with_capacity(visits.len()),
        waits: Vec::with_capacity(visits.len()),
        lateness: Vec::with_capacity(visits.len()),
        ..Simulation::default()
    };
    let mut prev = 0usize;
    let mut ready = inst.window(0).open;
    for &j in visits {
        let leg = inst.t(prev, j);
        sim.travel += leg;
        let arrival = ready + leg;
        let w = inst.window(j);
        let start = arrival.max(w.open);
        sim.starts.push(start);
        sim.waits.push(start - arrival);
        sim.lateness.push((arrival - w.close).max(0.0));
        sim.load += inst.demand(j, day);
        ready = start + inst.service(j);
        prev = j;
    }
    let back = inst.t(prev, 0);
    sim.travel += back;
    sim.return_time = ready + back;
    sim
}

/// Sum of arc times of the closed tour depot → visits → depot.
pub fn route_travel(visits: &[usize], inst: &Instance) -> f64 {
    let mut prev = 0;
    let mut total = 0.0;
    for &j in visits {
        total += inst.t(prev, j);
        prev = j;
    }
    total + inst.t(prev, 0)
}

/// Strict earliest-start schedule of a visit sequence.
pub fn propagate_schedule(visits: &[usize], day: usize, inst: &Instance) -> Result<Route, ScheduleError> {
    for &j in visits {
        if j == 0 || j > inst.n() {
            return Err(ScheduleError::UnknownCustomer(j));
        }
        if !inst.is_active(j, day) {
            return Err(ScheduleError::InactiveCustomer { customer: j, day });
        }
    }
    let sim = simulate(visits, day, inst);
    if let Some(k) = sim.lateness.iter().position(|&l| l > TIME_EPS) {
        return Err(ScheduleError::WindowMissed { customer: visits[k], by: sim.lateness[k] });
    }
    if sim.return_time > inst.workday() + TIME_EPS {
        return Err(ScheduleError::LateReturn { by: sim.return_time - inst.workday() });
    }
    Ok(Route { day, visits: visits.to_vec(), starts: sim.starts, waits: sim.waits })
}

/// Earliest-start schedule without feasibility checks.
pub fn earliest_route(visits: &[usize], day: usize, inst: &Instance) -> Route {
    let sim = simulate(visits, day, inst);
    Route { day, visits: visits.to_vec(), starts: sim.starts, waits: sim.waits }
}
