use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::model::{simulate, Instance, TIME_EPS};

/// Weights λ_c (per kg) and λ_tw (per minute) of the combined penalty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub capacity: f64,
    pub time_window: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        PenaltyWeights { capacity: 1.0, time_window: 1.0 }
    }
}

/// Capacity excess and time-window violation of a set of routes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PenaltyBreakdown {
    /// P_c, kg over capacity summed over routes.
    pub capacity: f64,
    /// P_tw, minutes of lateness plus depot overtime.
    pub time_window: f64,
    /// Overtime share of `time_window`.
    pub overtime: f64,
    /// F_p = λ_c·P_c + λ_tw·P_tw.
    pub total: f64,
}

impl PenaltyBreakdown {
    pub fn is_zero(&self) -> bool {
        self.total <= TIME_EPS
    }
}

impl Add for PenaltyBreakdown {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        PenaltyBreakdown {
            capacity: self.capacity + o.capacity,
            time_window: self.time_window + o.time_window,
            overtime: self.overtime + o.overtime,
            total: self.total + o.total,
        }
    }
}

impl Sum for PenaltyBreakdown {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(PenaltyBreakdown::default(), Add::add)
    }
}

/// Relaxed penalty of one day's visit sequence.
pub fn route_penalty(visits: &[usize], day: usize, inst: &Instance, w: PenaltyWeights) -> PenaltyBreakdown {
    if visits.is_empty() {
        return PenaltyBreakdown::default();
    }
    let sim = simulate(visits, day, inst);
    let capacity = sim.capacity_excess(inst);
    let overtime = sim.overtime(inst);
    let time_window = sim.total_lateness() + overtime;
    PenaltyBreakdown {
        capacity,
        time_window,
        overtime,
        total: w.capacity * capacity + w.time_window * time_window,
    }
}

/// Penalty of a collection of `(day, visits)` routes.
pub fn penalty<'a>(
    routes: impl IntoIterator<Item = (usize, &'a [usize])>,
    inst: &Instance,
    w: PenaltyWeights,
) -> PenaltyBreakdown {
    routes.into_iter().map(|(d, r)| route_penalty(r, d, inst, w)).sum()
}
