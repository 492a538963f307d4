//! Instance and solution data model, schedules and the constraint validator.

mod instance;
mod schedule;
mod solution;
mod validate;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use self::instance::{euclidean_matrix, Instance, InstanceData, TimeWindow, BOX_MARGIN, SCHEMA};
pub use self::schedule::{
    earliest_route, propagate_schedule, route_travel, simulate, Route, ScheduleError, Simulation, TIME_EPS,
};
pub use self::solution::{solution_cost, Diagnostics, Solution, SolutionCost, Territory};
pub use self::validate::{validate, ConstraintFamily, StructuralError, ValidationReport, Violation};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema `{0}`")]
    Schema(String),
    #[error("inconsistent dimensions: {0}")]
    Shape(String),
    #[error("invalid travel time t[{from}][{to}] = {value}")]
    TravelTime { from: usize, to: usize, value: f64 },
    #[error("invalid demand {value} for node {customer} on day {day}")]
    Demand { customer: usize, day: usize, value: f64 },
    #[error("invalid time window [{open}, {close}] at node {node}")]
    Window { node: usize, open: f64, close: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl InstanceData {
    /// Euclidean instance skeleton: no demand, windows `[0, workday]`, zero
    /// service times, compactness bound 10 with [`CompactnessMode::SqrtOfSum`].
    ///
    /// [`CompactnessMode::SqrtOfSum`]: crate::geometry::CompactnessMode::SqrtOfSum
    pub fn euclidean(name: &str, coords: Vec<crate::Point>, days: usize, capacity: f64, workday: f64) -> Self {
        let nodes = coords.len();
        InstanceData {
            name: name.to_string(),
            days,
            travel_times: euclidean_matrix(&coords),
            coords,
            demands: vec![vec![0.0; days]; nodes],
            service_times: vec![0.0; nodes],
            windows: vec![TimeWindow::new(0.0, workday); nodes],
            capacity,
            workday,
            compactness_bound: 10.0,
            compactness_mode: crate::geometry::CompactnessMode::SqrtOfSum,
            geometry: None,
        }
    }
}
