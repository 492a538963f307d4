use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::schedule::{simulate, TIME_EPS};
use super::{Instance, Solution};

/// Constraint families of the territory design model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintFamily {
    /// Every customer in exactly one non-empty territory.
    Partition,
    /// Vehicle capacity per route.
    Capacity,
    /// Compactness ratio at most F.
    Compactness,
    /// Territory contiguity.
    Contiguity,
    /// Routes visit exactly the territory's active customers.
    Consistency,
    /// Schedule, time windows and depot return.
    Schedule,
}

impl ConstraintFamily {
    pub fn label(self) -> &'static str {
        match self {
            ConstraintFamily::Partition => "partition",
            ConstraintFamily::Capacity => "capacity",
            ConstraintFamily::Compactness => "compactness",
            ConstraintFamily::Contiguity => "contiguity",
            ConstraintFamily::Consistency => "consistency",
            ConstraintFamily::Schedule => "schedule",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub territory: Option<usize>,
    pub day: Option<usize>,
    pub customer: Option<usize>,
    /// kg for capacity, minutes for schedule, ratio excess for compactness,
    /// extra components for contiguity, counts otherwise.
    pub magnitude: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn of_family(&self, family: ConstraintFamily) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.family == family)
    }
}

/// The solution references something that does not exist in the instance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructuralError {
    #[error("territory {territory} references unknown customer {customer}")]
    UnknownCustomer { territory: usize, customer: usize },
    #[error("territory {territory} has a route on unknown day {day}")]
    UnknownDay { territory: usize, day: usize },
}

const START_TOL: f64 = 1e-6;
const RATIO_TOL: f64 = 1e-9;

/// Checks a solution against every constraint family.
pub fn validate(inst: &Instance, sol: &Solution) -> Result<ValidationReport, StructuralError> {
    for t in &sol.territories {
        let bad_member = t.members.iter().find(|&&c| c == 0 || c > inst.n());
        let bad_visit = t.routes.iter().flat_map(|r| r.visits.iter()).find(|&&c| c == 0 || c > inst.n());
        if let Some(&customer) = bad_member.or(bad_visit) {
            return Err(StructuralError::UnknownCustomer { territory: t.id, customer });
        }
        if let Some(r) = t.routes.iter().find(|r| r.day >= inst.days()) {
            return Err(StructuralError::UnknownDay { territory: t.id, day: r.day });
        }
    }

    let mut out = Vec::new();
    let mut push = |family, territory, day, customer, magnitude, detail: String| {
        out.push(Violation { family, territory, day, customer, magnitude, detail })
    };

    let mut owners: HashMap<usize, Vec<usize>> = HashMap::new();
    for t in &sol.territories {
        for &c in &t.members {
            owners.entry(c).or_default().push(t.id);
        }
    }
    for c in inst.customers() {
        match owners.get(&c).map(Vec::len).unwrap_or(0) {
            1 => {}
            0 => push(ConstraintFamily::Partition, None, None, Some(c), 1.0, format!("customer {c} is unassigned")),
            k => push(
                ConstraintFamily::Partition,
                None,
                None,
                Some(c),
                (k - 1) as f64,
                format!("customer {c} belongs to {k} territories"),
            ),
        }
    }

    let geo = inst.geometry();
    for t in &sol.territories {
        let tid = Some(t.id);
        if t.members.is_empty() {
            push(ConstraintFamily::Partition, tid, None, None, 1.0, format!("territory {} is empty", t.id));
            continue;
        }
        let members: HashSet<usize> = t.members.iter().copied().collect();
        if members.len() != t.members.len() {
            push(ConstraintFamily::Partition, tid, None, None, (t.members.len() - members.len()) as f64, "repeated member".into());
        }
        let parts = geo.components(&members);
        if parts > 1 {
            push(
                ConstraintFamily::Contiguity,
                tid,
                None,
                None,
                (parts - 1) as f64,
                format!("territory {} splits into {parts} pieces", t.id),
            );
        }
        let ratio = geo
            .compactness_ratio(&t.members, inst.compactness_mode())
            .expect("ids checked above");
        if ratio > inst.compactness_bound() + RATIO_TOL {
            push(
                ConstraintFamily::Compactness,
                tid,
                None,
                None,
                ratio - inst.compactness_bound(),
                format!("compactness ratio {ratio:.4} exceeds {}", inst.compactness_bound()),
            );
        }

        let mut routes_by_day: HashMap<usize, usize> = HashMap::new();
        for r in &t.routes {
            *routes_by_day.entry(r.day).or_default() += 1;
        }
        for (&day, &count) in &routes_by_day {
            if count > 1 {
                push(ConstraintFamily::Consistency, tid, Some(day), None, (count - 1) as f64, format!("{count} routes on one day"));
            }
        }
        for day in 0..inst.days() {
            let visited: HashSet<usize> = t
                .routes
                .iter()
                .filter(|r| r.day == day)
                .flat_map(|r| r.visits.iter().copied())
                .collect();
            for &c in &t.members {
                if inst.is_active(c, day) && !visited.contains(&c) {
                    push(ConstraintFamily::Consistency, tid, Some(day), Some(c), 1.0, format!("active customer {c} not visited"));
                }
            }
        }

        for r in &t.routes {
            let day = Some(r.day);
            let mut seen = HashSet::new();
            for &c in &r.visits {
                if !seen.insert(c) {
                    push(ConstraintFamily::Consistency, tid, day, Some(c), 1.0, format!("customer {c} visited twice"));
                }
                if !members.contains(&c) {
                    push(ConstraintFamily::Consistency, tid, day, Some(c), 1.0, format!("customer {c} served by a foreign driver"));
                }
                if !inst.is_active(c, r.day) {
                    push(ConstraintFamily::Consistency, tid, day, Some(c), 1.0, format!("customer {c} visited without demand"));
                }
            }
            let sim = simulate(&r.visits, r.day, inst);
            let excess = sim.capacity_excess(inst);
            if excess > TIME_EPS {
                push(ConstraintFamily::Capacity, tid, day, None, excess, format!("load {} exceeds capacity", sim.load));
            }
            for (k, &late) in sim.lateness.iter().enumerate() {
                if late > TIME_EPS {
                    let c = r.visits[k];
                    push(ConstraintFamily::Schedule, tid, day, Some(c), late, format!("window missed at customer {c} by {late}"));
                }
            }
            let overtime = sim.overtime(inst);
            if overtime > TIME_EPS {
                push(ConstraintFamily::Schedule, tid, day, None, overtime, format!("returns {overtime} after the workday"));
            }
            if r.starts.len() != r.visits.len() {
                push(ConstraintFamily::Schedule, tid, day, None, 1.0, "start times missing".into());
            } else {
                for (k, (&given, &expected)) in r.starts.iter().zip(&sim.starts).enumerate() {
                    let gap = (given - expected).abs();
                    if gap > START_TOL {
                        let c = r.visits[k];
                        push(ConstraintFamily::Schedule, tid, day, Some(c), gap, format!("start at customer {c} off by {gap}"));
                    }
                }
            }
        }
    }
    Ok(ValidationReport { violations: out })
}
