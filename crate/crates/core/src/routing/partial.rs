use crate::geometry::ShapeStats;
use crate::model::{earliest_route, Instance, Solution, Territory};

use super::penalty::{route_penalty, PenaltyBreakdown, PenaltyWeights};

/// A territory under construction: members, cached shape aggregates and one
/// visit sequence per day (empty on days without active members).
#[derive(Clone, Debug, PartialEq)]
pub struct WorkingTerritory {
    pub id: usize,
    /// Sorted customer ids.
    pub members: Vec<usize>,
    pub shape: ShapeStats<f64>,
    pub routes: Vec<Vec<usize>>,
}

impl WorkingTerritory {
    /// The territory made of one customer, visited alone on each active day.
    pub fn singleton(id: usize, customer: usize, inst: &Instance) -> Self {
        let g = inst.geometry().unit(customer);
        let shape = ShapeStats { perimeter: g.perimeter, area: g.area, sqrt_area_sum: g.sqrt_area };
        let routes = (0..inst.days())
            .map(|d| if inst.is_active(customer, d) { vec![customer] } else { Vec::new() })
            .collect();
        WorkingTerritory { id, members: vec![customer], shape, routes }
    }

    pub fn from_territory(t: &Territory, inst: &Instance) -> Self {
        let mut routes = vec![Vec::new(); inst.days()];
        for r in &t.routes {
            routes[r.day] = r.visits.clone();
        }
        let shape = inst.geometry().shape_of(&t.members).unwrap_or_default();
        WorkingTerritory { id: t.id, members: t.members.clone(), shape, routes }
    }

    pub fn contains(&self, customer: usize) -> bool {
        self.members.binary_search(&customer).is_ok()
    }

    pub fn ratio(&self, inst: &Instance) -> f64 {
        self.shape.ratio(inst.compactness_mode())
    }

    /// Boundary length `customer` shares with the members.
    pub fn shared_with(&self, customer: usize, inst: &Instance) -> f64 {
        inst.geometry()
            .boundary_with(customer, |j| j != customer && self.contains(j))
    }

    pub fn is_adjacent_to(&self, customer: usize, inst: &Instance) -> bool {
        inst.geometry().touches(customer, |j| j != customer && self.contains(j))
    }

    /// Shape after adding `customer`.
    pub fn shape_with(&self, customer: usize, inst: &Instance) -> ShapeStats<f64> {
        self.shape
            .with_unit(inst.geometry().unit(customer), self.shared_with(customer, inst))
    }

    /// Shape after removing the member `customer`.
    pub fn shape_without(&self, customer: usize, inst: &Instance) -> ShapeStats<f64> {
        self.shape
            .without_unit(inst.geometry().unit(customer), self.shared_with(customer, inst))
    }

    /// Adds a member without touching the routes.
    pub fn add_member(&mut self, customer: usize, inst: &Instance) {
        self.shape = self.shape_with(customer, inst);
        let pos = self.members.binary_search(&customer).unwrap_err();
        self.members.insert(pos, customer);
    }

    /// Removes a member and its visits.
    pub fn remove_member(&mut self, customer: usize, inst: &Instance) {
        self.shape = self.shape_without(customer, inst);
        if let Ok(pos) = self.members.binary_search(&customer) {
            self.members.remove(pos);
        }
        for r in &mut self.routes {
            r.retain(|&c| c != customer);
        }
    }

    pub fn penalty(&self, inst: &Instance, w: PenaltyWeights) -> PenaltyBreakdown {
        self.routes
            .iter()
            .enumerate()
            .map(|(d, r)| route_penalty(r, d, inst, w))
            .sum()
    }

    pub fn travel_time(&self, inst: &Instance) -> f64 {
        self.routes
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| crate::model::route_travel(r, inst))
            .sum()
    }

    pub fn active_customer_days(&self, inst: &Instance) -> usize {
        self.members.iter().map(|&c| inst.active_day_count(c)).sum()
    }

    pub fn total_demand(&self, inst: &Instance) -> f64 {
        self.members.iter().map(|&c| inst.total_demand(c)).sum()
    }

    /// Materializes the territory with earliest-start schedules.
    pub fn to_territory(&self, inst: &Instance) -> Territory {
        let routes = self
            .routes
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(|(d, r)| earliest_route(r, d, inst))
            .collect();
        Territory {
            id: self.id,
            members: self.members.clone(),
            perimeter: self.shape.perimeter,
            area: self.shape.area,
            compactness: self.ratio(inst),
            routes,
        }
    }
}

/// A set of territories that need not cover every customer.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartialSolution {
    pub territories: Vec<WorkingTerritory>,
}

impl PartialSolution {
    pub fn from_solution(sol: &Solution, inst: &Instance) -> Self {
        PartialSolution {
            territories: sol.territories.iter().map(|t| WorkingTerritory::from_territory(t, inst)).collect(),
        }
    }

    pub fn to_solution(&self, inst: &Instance) -> Solution {
        Solution::new(inst, self.territories.iter().map(|t| t.to_territory(inst)).collect())
    }

    pub fn len(&self) -> usize {
        self.territories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.territories.is_empty()
    }

    /// Index of the territory holding `customer`.
    pub fn owner(&self, customer: usize) -> Option<usize> {
        self.territories.iter().position(|t| t.contains(customer))
    }

    /// Owner index of every node (`None` for the depot and unassigned units).
    pub fn owner_table(&self, inst: &Instance) -> Vec<Option<usize>> {
        let mut owners = vec![None; inst.nodes()];
        for (k, t) in self.territories.iter().enumerate() {
            for &c in &t.members {
                owners[c] = Some(k);
            }
        }
        owners
    }

    pub fn penalty(&self, inst: &Instance, w: PenaltyWeights) -> PenaltyBreakdown {
        self.territories.iter().map(|t| t.penalty(inst, w)).sum()
    }

    pub fn travel_time(&self, inst: &Instance) -> f64 {
        self.territories.iter().map(|t| t.travel_time(inst)).sum()
    }

    pub fn compactness_sum(&self, inst: &Instance) -> f64 {
        self.territories.iter().map(|t| t.ratio(inst)).sum()
    }
}
