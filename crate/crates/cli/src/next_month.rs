use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use tddmp::model::{Instance, Solution, Territory};
use tddmp::routing::{best_position, two_opt, PenaltyWeights, RouteObjective};

#[derive(Debug, Error, PartialEq)]
pub enum NextMonthError {
    #[error("shared map entry ({0}, {1}) is out of range")]
    OutOfRange(usize, usize),
    #[error("customer {0} appears twice in the shared map")]
    Duplicate(usize),
    #[error("month-1 customer {0} is not in any territory of the solution")]
    Unassigned(usize),
    #[error("no customer is shared between the months")]
    NoSharedCustomers,
}

/// One customer-day the driver's route cannot absorb.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleVisit {
    /// Month-2 id.
    pub customer: usize,
    pub day: usize,
    /// True for customers absent from month 1.
    pub new: bool,
    pub demand: f64,
    /// Lateness plus overtime at the least-penalized insertion, minutes.
    pub lateness: f64,
    /// Capacity excess at that insertion, kg.
    pub capacity_excess: f64,
}

/// Operational evaluation of month-1 territories on month-2 orders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NextMonthReport {
    pub instance: String,
    /// New customers with at least one infeasible day.
    pub tic: usize,
    /// Days with at least one infeasible new customer.
    pub tid: usize,
    /// Demand of the infeasible new customer-days, kg.
    pub iac: f64,
    /// Mean lateness of the infeasible new customer-days, hours.
    pub iatw: f64,
    /// New customer-days the driver cannot add to the old customers' routes.
    pub visits: Vec<InfeasibleVisit>,
    /// Old customer-days that do not fit even without the new customers.
    pub overflow: Vec<InfeasibleVisit>,
    /// Driver (month-1 territory index) of every month-2 customer; index 0
    /// is the depot.
    pub driver: Vec<Option<usize>>,
    /// Month-2 routes of the served customer-days.
    pub plan: Solution,
}

impl NextMonthReport {
    /// `(tic, tid, iac, iatw)` recomputed from `visits`.
    pub fn recompute(visits: &[InfeasibleVisit]) -> (usize, usize, f64, f64) {
        let tic = visits.iter().filter(|v| v.new).map(|v| v.customer).collect::<BTreeSet<_>>().len();
        let tid = visits.iter().map(|v| v.day).collect::<BTreeSet<_>>().len();
        let iac = visits.iter().fold(0.0, |acc, v| acc + v.demand);
        let iatw = if visits.is_empty() {
            0.0
        } else {
            visits.iter().fold(0.0, |acc, v| acc + v.lateness) / visits.len() as f64 / 60.0
        };
        (tic, tid, iac, iatw)
    }
}

/// Month-2 driver of every customer: shared customers keep their territory,
/// new customers follow their nearest shared customer by travel time
/// (ties by smaller id).
pub fn assign_drivers(
    month1: &Solution,
    month2: &Instance,
    shared: &[(usize, usize)],
) -> Result<Vec<Option<usize>>, NextMonthError> {
    let mut owner1: HashMap<usize, usize> = HashMap::new();
    for (k, t) in month1.territories.iter().filter(|t| !t.members.is_empty()).enumerate() {
        for &c in &t.members {
            owner1.insert(c, k);
        }
    }
    let mut driver = vec![None; month2.nodes()];
    let mut seen1 = BTreeSet::new();
    for &(a, b) in shared {
        if a == 0 || b == 0 || b > month2.n() {
            return Err(NextMonthError::OutOfRange(a, b));
        }
        if !seen1.insert(a) {
            return Err(NextMonthError::Duplicate(a));
        }
        if driver[b].is_some() {
            return Err(NextMonthError::Duplicate(b));
        }
        driver[b] = Some(*owner1.get(&a).ok_or(NextMonthError::Unassigned(a))?);
    }
    let old: Vec<usize> = month2.customers().filter(|&c| driver[c].is_some()).collect();
    if old.is_empty() {
        return Err(NextMonthError::NoSharedCustomers);
    }
    for c in month2.customers() {
        if driver[c].is_none() {
            let nearest = old
                .iter()
                .copied()
                .min_by(|&a, &b| month2.t(c, a).total_cmp(&month2.t(c, b)).then(a.cmp(&b)))
                .expect("non-empty");
            driver[c] = driver[nearest];
        }
    }
    Ok(driver)
}

/// Extends `route` by cheapest feasible insertion followed by travel-time
/// 2-opt, with one retry after the 2-opt; customers without a feasible
/// position are returned with their least-penalized insertion
/// `(customer, lateness, capacity excess)`.
pub fn extend_route(
    mut route: Vec<usize>,
    customers: &[usize],
    day: usize,
    inst: &Instance,
) -> (Vec<usize>, Vec<(usize, f64, f64)>) {
    let w = PenaltyWeights::default();
    let mut pending: Vec<usize> = customers.to_vec();
    pending.sort_unstable();
    for pass in 0..2 {
        loop {
            let best = pending
                .iter()
                .enumerate()
                .map(|(k, &c)| (k, best_position(c, &route, day, inst, w)))
                .filter(|(_, cand)| cand.feasible)
                .min_by(|a, b| a.1.delta_cost.total_cmp(&b.1.delta_cost));
            let Some((k, cand)) = best else { break };
            route.insert(cand.position, pending.remove(k));
        }
        route = two_opt(&route, day, inst, RouteObjective::TravelTime);
        if pending.is_empty() || pass == 1 {
            break;
        }
    }
    let rejected = pending
        .into_iter()
        .map(|c| {
            let cand = best_position(c, &route, day, inst, w);
            (c, cand.lateness, cand.capacity_excess)
        })
        .collect();
    (route, rejected)
}

fn infeasible(rejected: Vec<(usize, f64, f64)>, day: usize, new: bool, inst: &Instance) -> Vec<InfeasibleVisit> {
    rejected
        .into_iter()
        .map(|(customer, lateness, capacity_excess)| InfeasibleVisit {
            customer,
            day,
            new,
            demand: inst.demand(customer, day),
            lateness,
            capacity_excess,
        })
        .collect()
}

/// Routes month 2 with the month-1 territories and reports the new
/// customer-days that do not fit.
///
/// Each driver-day first routes its old customers, then inserts its new
/// customers into that plan; a new customer-day without a feasible insertion
/// is infeasible.
pub fn next_month(
    month1: &Solution,
    month2: &Instance,
    shared: &[(usize, usize)],
) -> Result<NextMonthReport, NextMonthError> {
    let driver = assign_drivers(month1, month2, shared)?;
    let mut is_new = vec![true; month2.nodes()];
    for &(_, b) in shared {
        is_new[b] = false;
    }
    let drivers = driver.iter().flatten().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); drivers];
    for c in month2.customers() {
        members[driver[c].expect("every customer assigned")].push(c);
    }
    let mut visits = Vec::new();
    let mut overflow = Vec::new();
    let mut territories = Vec::with_capacity(drivers);
    for (k, group) in members.iter().enumerate() {
        let mut days = Vec::new();
        for d in 0..month2.days() {
            let active: Vec<usize> = group.iter().copied().filter(|&c| month2.is_active(c, d)).collect();
            let (route, rejected) = extend_route(Vec::new(), &active, d, month2);
            let (new, old): (Vec<_>, Vec<_>) = rejected.into_iter().partition(|r| is_new[r.0]);
            overflow.extend(infeasible(old, d, false, month2));
            visits.extend(infeasible(new, d, true, month2));
            days.push((d, route));
        }
        let t = Territory::build(k, group.clone(), days, month2).expect("routes built from feasible insertions");
        territories.push(t);
    }
    visits.sort_by_key(|v| (v.day, v.customer));
    overflow.sort_by_key(|v| (v.day, v.customer));
    let (tic, tid, iac, iatw) = NextMonthReport::recompute(&visits);
    Ok(NextMonthReport {
        instance: month2.name().to_string(),
        tic,
        tid,
        iac,
        iatw,
        visits,
        overflow,
        driver,
        plan: Solution::new(month2, territories),
    })
}
