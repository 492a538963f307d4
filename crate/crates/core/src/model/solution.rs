use serde::{Deserialize, Serialize};

use super::schedule::{propagate_schedule, Route, ScheduleError};
use super::{Instance, ModelError, SCHEMA};

/// A territory: a set of customers served by one driver on every day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Territory {
    pub id: usize,
    /// Sorted customer ids.
    pub members: Vec<usize>,
    pub perimeter: f64,
    pub area: f64,
    pub compactness: f64,
    /// One route per day with at least one active member.
    pub routes: Vec<Route>,
}

impl Territory {
    /// Builds a territory from members and per-day visit orders, computing the
    /// shape aggregates and the earliest-start schedule of every route.
    pub fn build(
        id: usize,
        mut members: Vec<usize>,
        day_visits: Vec<(usize, Vec<usize>)>,
        inst: &Instance,
    ) -> Result<Self, ScheduleError> {
        members.sort_unstable();
        let (perimeter, area, compactness) = match inst.geometry().shape_of(&members) {
            Ok(s) => (s.perimeter, s.area, s.ratio(inst.compactness_mode())),
            Err(_) => (0.0, 0.0, 0.0),
        };
        let routes = day_visits
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(day, visits)| propagate_schedule(&visits, day, inst))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Territory { id, members, perimeter, area, compactness, routes })
    }

    pub fn travel_time(&self, inst: &Instance) -> f64 {
        self.routes.iter().map(|r| r.travel_time(inst)).sum()
    }

    pub fn active_customer_days(&self, inst: &Instance) -> usize {
        self.members
            .iter()
            .filter(|&&i| i >= 1 && i <= inst.n())
            .map(|&i| inst.active_day_count(i))
            .sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Minutes, summed over every route of every day.
    pub total_travel_time: f64,
    pub compactness: Vec<f64>,
    pub active_customer_days: usize,
}

/// A partition of the customers into territories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub instance: String,
    pub territories: Vec<Territory>,
    pub objective: usize,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    schema: String,
    #[serde(flatten)]
    solution: Solution,
}

impl Solution {
    pub fn new(inst: &Instance, territories: Vec<Territory>) -> Self {
        let diagnostics = Diagnostics {
            total_travel_time: territories.iter().map(|t| t.travel_time(inst)).sum(),
            compactness: territories.iter().map(|t| t.compactness).collect(),
            active_customer_days: territories.iter().map(|t| t.active_customer_days(inst)).sum(),
        };
        Solution {
            instance: inst.name().to_string(),
            objective: territories.iter().filter(|t| !t.members.is_empty()).count(),
            territories,
            diagnostics,
        }
    }

    pub fn territory_count(&self) -> usize {
        self.territories.iter().filter(|t| !t.members.is_empty()).count()
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: SolutionFile = serde_json::from_str(text)?;
        if file.schema != SCHEMA {
            return Err(ModelError::Schema(file.schema));
        }
        Ok(file.solution)
    }

    pub fn to_json(&self) -> String {
        let file = SolutionFile { schema: SCHEMA.to_string(), solution: self.clone() };
        serde_json::to_string_pretty(&file).expect("solution serializes")
    }
}

/// Headline numbers of a solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionCost {
    pub territories: usize,
    pub travel_time_hours: f64,
    /// Mean compactness ratio over non-empty territories.
    pub average_compactness: Option<f64>,
}

/// Territory count, total travel time in hours and average compactness.
pub fn solution_cost(inst: &Instance, sol: &Solution) -> SolutionCost {
    let used: Vec<&Territory> = sol.territories.iter().filter(|t| !t.members.is_empty()).collect();
    let minutes: f64 = used.iter().map(|t| t.travel_time(inst)).sum();
    let average_compactness = if used.is_empty() {
        None
    } else {
        let ratios: Vec<f64> = used
            .iter()
            .map(|t| {
                inst.geometry()
                    .compactness_ratio(&t.members, inst.compactness_mode())
                    .unwrap_or(f64::NAN)
            })
            .collect();
        Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
    };
    SolutionCost { territories: used.len(), travel_time_hours: minutes / 60.0, average_compactness }
}
