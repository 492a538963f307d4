use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::geometry::CompactnessMode;
use crate::model::{simulate, Instance, Solution};

use super::ExactError;

/// A variable of the territory design MILP, by index tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKey {
    /// Arc `(i, j)` driven by vehicle `k` on day `d`.
    X { i: usize, j: usize, k: usize, d: usize },
    /// Customer `i` served by vehicle `k` on day `d`.
    Y { i: usize, k: usize, d: usize },
    /// Vehicle `k` used.
    Z { k: usize },
    /// Customer `i` in territory `k`.
    Zh { i: usize, k: usize },
    /// Customers `i` and `j` both in territory `k`.
    Zb { i: usize, j: usize, k: usize },
    /// Unit `i` is the flow sink of territory `k`.
    W { i: usize, k: usize },
    /// Service start of customer `i` on day `d` (the depot leaves at `s_0_d`).
    S { i: usize, d: usize },
    /// Waiting time before serving `j` on day `d`.
    E { j: usize, d: usize },
    /// Contiguity flow from `i` to its neighbour `j` in territory `k`.
    U { i: usize, j: usize, k: usize },
}

impl VarKey {
    pub fn is_binary(self) -> bool {
        !matches!(self, VarKey::S { .. } | VarKey::E { .. } | VarKey::U { .. })
    }

    /// Name prefix: `x`, `y`, `z`, `zh`, `zb`, `w`, `s`, `e` or `u`.
    pub fn prefix(self) -> &'static str {
        match self {
            VarKey::X { .. } => "x",
            VarKey::Y { .. } => "y",
            VarKey::Z { .. } => "z",
            VarKey::Zh { .. } => "zh",
            VarKey::Zb { .. } => "zb",
            VarKey::W { .. } => "w",
            VarKey::S { .. } => "s",
            VarKey::E { .. } => "e",
            VarKey::U { .. } => "u",
        }
    }

    /// Inverse of the `Display` form, e.g. `x_0_3_1_2`.
    pub fn parse(name: &str) -> Option<VarKey> {
        let mut parts = name.split('_');
        let head = parts.next()?;
        let idx: Vec<usize> = parts.map(str::parse).collect::<Result<_, _>>().ok()?;
        Some(match (head, idx.as_slice()) {
            ("x", &[i, j, k, d]) => VarKey::X { i, j, k, d },
            ("y", &[i, k, d]) => VarKey::Y { i, k, d },
            ("z", &[k]) => VarKey::Z { k },
            ("zh", &[i, k]) => VarKey::Zh { i, k },
            ("zb", &[i, j, k]) => VarKey::Zb { i, j, k },
            ("w", &[i, k]) => VarKey::W { i, k },
            ("s", &[i, d]) => VarKey::S { i, d },
            ("e", &[j, d]) => VarKey::E { j, d },
            ("u", &[i, j, k]) => VarKey::U { i, j, k },
            _ => return None,
        })
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarKey::X { i, j, k, d } => write!(f, "x_{i}_{j}_{k}_{d}"),
            VarKey::Y { i, k, d } => write!(f, "y_{i}_{k}_{d}"),
            VarKey::Z { k } => write!(f, "z_{k}"),
            VarKey::Zh { i, k } => write!(f, "zh_{i}_{k}"),
            VarKey::Zb { i, j, k } => write!(f, "zb_{i}_{j}_{k}"),
            VarKey::W { i, k } => write!(f, "w_{i}_{k}"),
            VarKey::S { i, d } => write!(f, "s_{i}_{d}"),
            VarKey::E { j, d } => write!(f, "e_{j}_{d}"),
            VarKey::U { i, j, k } => write!(f, "u_{i}_{j}_{k}"),
        }
    }
}

/// Constraint families, in model order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// Each active customer-day is served by exactly one vehicle.
    Demand,
    /// Daily load within capacity.
    Capacity,
    /// A vehicle serving a customer is used.
    Usage,
    /// Service on a day implies territory membership.
    DayLink,
    /// Territory membership implies service on some day.
    AssignLink,
    /// Pair indicator below the first membership.
    PairFirst,
    /// Pair indicator below the second membership.
    PairSecond,
    /// Pair indicator forced by both memberships.
    PairBoth,
    /// Perimeter at most F times the summed square roots of the areas.
    Compactness,
    /// Net outflow of every member except the sink.
    FlowBalance,
    /// One sink per vehicle.
    Sink,
    /// Flow enters members only.
    FlowCapacity,
    /// In- and out-degree of a served customer equal one.
    Degree,
    /// Depot departures and returns.
    DepotFlow,
    /// Same vehicle on every active day.
    PersonConsistency,
    /// Start times increase along arcs.
    ScheduleLower,
    /// Start times follow arcs up to waiting.
    ScheduleUpper,
    /// Depot return within the workday.
    Return,
    /// Start times inside time windows.
    Window,
    /// Optional `z_k >= z_{k+1}`.
    Symmetry,
}

impl Family {
    pub fn prefix(self) -> &'static str {
        match self {
            Family::Demand => "demand",
            Family::Capacity => "cap",
            Family::Usage => "use",
            Family::DayLink => "daylink",
            Family::AssignLink => "assign",
            Family::PairFirst => "pair1",
            Family::PairSecond => "pair2",
            Family::PairBoth => "pair3",
            Family::Compactness => "compact",
            Family::FlowBalance => "flow",
            Family::Sink => "sink",
            Family::FlowCapacity => "flowcap",
            Family::Degree => "deg",
            Family::DepotFlow => "depot",
            Family::PersonConsistency => "consist",
            Family::ScheduleLower => "sched_lo",
            Family::ScheduleUpper => "sched_hi",
            Family::Return => "ret",
            Family::Window => "tw",
            Family::Symmetry => "sym",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Family::Demand => "each active customer-day is served by exactly one vehicle",
            Family::Capacity => "daily load within capacity",
            Family::Usage => "a vehicle serving a customer is used",
            Family::DayLink => "service on a day implies territory membership",
            Family::AssignLink => "territory membership implies service on some day",
            Family::PairFirst => "pair indicator below the first membership",
            Family::PairSecond => "pair indicator below the second membership",
            Family::PairBoth => "pair indicator forced by both memberships",
            Family::Compactness => "perimeter at most F times the summed square roots of the areas",
            Family::FlowBalance => "contiguity: net outflow of every member except the sink",
            Family::Sink => "contiguity: one sink per vehicle",
            Family::FlowCapacity => "contiguity: flow enters members only",
            Family::Degree => "served customers have one predecessor and one successor",
            Family::DepotFlow => "depot departures and returns",
            Family::PersonConsistency => "same vehicle on every active day",
            Family::ScheduleLower => "start times increase along used arcs",
            Family::ScheduleUpper => "start times follow used arcs up to waiting",
            Family::Return => "depot return within the workday",
            Family::Window => "start times inside time windows",
            Family::Symmetry => "symmetry breaking between vehicles",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub key: VarKey,
    pub lower: f64,
    pub upper: Option<f64>,
}

/// A mixed-integer linear programme held in memory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<Row>,
    index: HashMap<VarKey, usize>,
}

/// Row whose left-hand side misses its right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct RowViolation {
    pub row: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl LinearProgram {
    fn add_var(&mut self, key: VarKey, lower: f64, upper: Option<f64>) -> usize {
        let id = self.variables.len();
        self.variables.push(Variable { key, lower, upper });
        self.index.insert(key, id);
        id
    }

    pub fn var(&self, key: VarKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    fn v(&self, key: VarKey) -> usize {
        self.index[&key]
    }

    fn row(&mut self, family: Family, suffix: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        let name = format!("{}_{}", family.prefix(), suffix);
        self.rows.push(Row { name, family, terms, sense, rhs });
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Rows, bounds and integrality requirements broken by `values` beyond
    /// `tol`.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<RowViolation> {
        let mut out = Vec::new();
        for row in &self.rows {
            let lhs: f64 = row.terms.iter().map(|&(v, c)| c * values[v]).sum();
            let bad = match row.sense {
                Sense::Le => lhs > row.rhs + tol,
                Sense::Ge => lhs < row.rhs - tol,
                Sense::Eq => (lhs - row.rhs).abs() > tol,
            };
            if bad {
                out.push(RowViolation { row: row.name.clone(), lhs, rhs: row.rhs });
            }
        }
        for (v, var) in self.variables.iter().enumerate() {
            let x = values[v];
            let out_of_bounds = x < var.lower - tol || var.upper.is_some_and(|u| x > u + tol);
            let fractional = var.key.is_binary() && (x - x.round()).abs() > tol;
            if out_of_bounds || fractional {
                out.push(RowViolation { row: format!("bound_{}", var.key), lhs: x, rhs: var.lower });
            }
        }
        out
    }

    /// CPLEX-style LP text.
    pub fn to_lp(&self, header: &[String]) -> String {
        let mut out = String::new();
        for line in header {
            let _ = writeln!(out, "\\ {line}");
        }
        out.push_str("Minimize\n obj:");
        self.write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            let _ = write!(out, " {}:", row.name);
            if row.terms.is_empty() {
                let _ = write!(out, " 0 {}", self.variables[0].key);
            }
            self.write_terms(&mut out, &row.terms);
            let _ = writeln!(out, " {} {}", row.sense.symbol(), num(row.rhs));
        }
        out.push_str("Bounds\n");
        for var in &self.variables {
            if var.key.is_binary() {
                continue;
            }
            match var.upper {
                Some(u) => {
                    let _ = writeln!(out, " {} <= {} <= {}", num(var.lower), var.key, num(u));
                }
                None if var.lower != 0.0 => {
                    let _ = writeln!(out, " {} >= {}", var.key, num(var.lower));
                }
                None => {}
            }
        }
        out.push_str("Binary\n");
        for (k, var) in self.variables.iter().filter(|v| v.key.is_binary()).enumerate() {
            let _ = write!(out, " {}", var.key);
            if k % 10 == 9 {
                out.push('\n');
            }
        }
        out.push_str("\nEnd\n");
        out
    }

    fn write_terms(&self, out: &mut String, terms: &[(usize, f64)]) {
        for (k, &(v, c)) in terms.iter().enumerate() {
            if k > 0 && k % 8 == 0 {
                out.push_str("\n   ");
            }
            let sign = if c < 0.0 { '-' } else { '+' };
            let a = c.abs();
            if a == 1.0 {
                let _ = write!(out, " {sign} {}", self.variables[v].key);
            } else {
                let _ = write!(out, " {sign} {} {}", num(a), self.variables[v].key);
            }
        }
    }
}

fn num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MilpOptions {
    /// Adds `z_k >= z_{k+1}` rows.
    pub symmetry_breaking: bool,
    /// Every used vehicle leaves the depot on every day, instead of at most
    /// once per day.
    pub literal_depot_flow: bool,
    /// Replaces the computed big-M when larger.
    pub big_m: Option<f64>,
}

/// The emitted model with its registries.
#[derive(Clone, Debug)]
pub struct MilpArtifacts {
    pub lp: LinearProgram,
    /// Big-M of the scheduling rows.
    pub big_m: f64,
    pub vehicles: usize,
    pub options: MilpOptions,
    /// Row indices per family.
    pub families: BTreeMap<Family, Vec<usize>>,
}

impl MilpArtifacts {
    pub fn row_count(&self, family: Family) -> usize {
        self.families.get(&family).map_or(0, Vec::len)
    }

    /// Number of variables with the given name prefix.
    pub fn variable_count(&self, prefix: &str) -> usize {
        self.lp.variables.iter().filter(|v| v.key.prefix() == prefix).count()
    }

    pub fn to_lp(&self, inst: &Instance) -> String {
        let mut header = vec![
            format!("territory design model for instance {}", inst.name()),
            format!(
                "{} customers, {} days, {} vehicles, big-M {}",
                inst.n(),
                inst.days(),
                self.vehicles,
                num(self.big_m)
            ),
            "row families:".to_string(),
        ];
        for (f, rows) in &self.families {
            header.push(format!("  {}_*  ({} rows): {}", f.prefix(), rows.len(), f.description()));
        }
        self.lp.to_lp(&header)
    }
}

fn o(inst: &Instance, i: usize, d: usize) -> f64 {
    if i > 0 && inst.is_active(i, d) {
        1.0
    } else {
        0.0
    }
}

/// Builds the full territory design MILP with one vehicle per customer.
///
/// Requires [`CompactnessMode::SumOfSqrts`]. The products of arc variables
/// and waiting times in the scheduling rows are linearised with the big-M:
/// `s_i - s_j + (T + g_i + t_ij) x <= T` and
/// `s_j - s_i - e_j + (T - g_i - t_ij) x <= T`. Waiting times are bounded by
/// the window opening.
pub fn emit_milp(inst: &Instance, options: MilpOptions) -> Result<MilpArtifacts, ExactError> {
    if inst.compactness_mode() != CompactnessMode::SumOfSqrts {
        return Err(ExactError::CompactnessMode);
    }
    let n = inst.n();
    let nv = inst.nodes();
    let days = inst.days();
    let kk = n;
    let cust = 1..=n;
    let geo = inst.geometry();
    let f = inst.compactness_bound();
    let max_g = (0..nv).map(|i| inst.service(i)).fold(0.0, f64::max);
    let max_t = (0..nv).flat_map(|i| (0..nv).map(move |j| (i, j))).map(|(i, j)| inst.t(i, j)).fold(0.0, f64::max);
    let big_m = (inst.workday() + max_g + max_t).max(options.big_m.unwrap_or(0.0));
    let neighbours: Vec<Vec<usize>> =
        (0..nv).map(|i| if i == 0 { Vec::new() } else { geo.neighbors(i).filter(|&j| j != 0).collect() }).collect();

    let mut lp = LinearProgram::default();
    for d in 0..days {
        for k in 0..kk {
            for i in 0..nv {
                for j in 0..nv {
                    if i != j {
                        lp.add_var(VarKey::X { i, j, k, d }, 0.0, Some(1.0));
                    }
                }
            }
        }
    }
    for d in 0..days {
        for k in 0..kk {
            for i in cust.clone() {
                lp.add_var(VarKey::Y { i, k, d }, 0.0, Some(1.0));
            }
        }
    }
    for k in 0..kk {
        lp.add_var(VarKey::Z { k }, 0.0, Some(1.0));
    }
    for k in 0..kk {
        for i in cust.clone() {
            lp.add_var(VarKey::Zh { i, k }, 0.0, Some(1.0));
        }
    }
    for k in 0..kk {
        for i in cust.clone() {
            for j in cust.clone() {
                if i != j {
                    lp.add_var(VarKey::Zb { i, j, k }, 0.0, Some(1.0));
                }
            }
        }
    }
    for k in 0..kk {
        for i in cust.clone() {
            lp.add_var(VarKey::W { i, k }, 0.0, Some(1.0));
        }
    }
    for d in 0..days {
        for i in 0..nv {
            lp.add_var(VarKey::S { i, d }, 0.0, None);
        }
    }
    for d in 0..days {
        for j in cust.clone() {
            lp.add_var(VarKey::E { j, d }, 0.0, Some(inst.window(j).open));
        }
    }
    for k in 0..kk {
        for i in cust.clone() {
            for &j in &neighbours[i] {
                lp.add_var(VarKey::U { i, j, k }, 0.0, None);
            }
        }
    }
    lp.objective = (0..kk).map(|k| (lp.v(VarKey::Z { k }), 1.0)).collect();

    for i in cust.clone() {
        for d in 0..days {
            let terms = (0..kk).map(|k| (lp.v(VarKey::Y { i, k, d }), 1.0)).collect();
            lp.row(Family::Demand, format!("{i}_{d}"), terms, Sense::Eq, o(inst, i, d));
        }
    }
    for k in 0..kk {
        for d in 0..days {
            let terms = cust
                .clone()
                .filter(|&i| inst.demand(i, d) != 0.0)
                .map(|i| (lp.v(VarKey::Y { i, k, d }), inst.demand(i, d)))
                .collect();
            lp.row(Family::Capacity, format!("{k}_{d}"), terms, Sense::Le, inst.capacity());
        }
    }
    for i in cust.clone() {
        for k in 0..kk {
            let terms = vec![(lp.v(VarKey::Z { k }), 1.0), (lp.v(VarKey::Zh { i, k }), -1.0)];
            lp.row(Family::Usage, format!("{i}_{k}"), terms, Sense::Ge, 0.0);
        }
    }
    for i in cust.clone() {
        for k in 0..kk {
            for d in 0..days {
                let terms = vec![(lp.v(VarKey::Zh { i, k }), 1.0), (lp.v(VarKey::Y { i, k, d }), -1.0)];
                lp.row(Family::DayLink, format!("{i}_{k}_{d}"), terms, Sense::Ge, 0.0);
            }
        }
    }
    for i in cust.clone() {
        for k in 0..kk {
            let mut terms = vec![(lp.v(VarKey::Zh { i, k }), 1.0)];
            terms.extend((0..days).map(|d| (lp.v(VarKey::Y { i, k, d }), -1.0)));
            lp.row(Family::AssignLink, format!("{i}_{k}"), terms, Sense::Le, 0.0);
        }
    }
    for (family, first) in [(Family::PairFirst, true), (Family::PairSecond, false)] {
        for i in cust.clone() {
            for j in cust.clone() {
                if i == j {
                    continue;
                }
                for k in 0..kk {
                    let member = if first { VarKey::Zh { i, k } } else { VarKey::Zh { i: j, k } };
                    let terms = vec![(lp.v(VarKey::Zb { i, j, k }), 1.0), (lp.v(member), -1.0)];
                    lp.row(family, format!("{i}_{j}_{k}"), terms, Sense::Le, 0.0);
                }
            }
        }
    }
    for i in cust.clone() {
        for j in cust.clone() {
            if i == j {
                continue;
            }
            for k in 0..kk {
                let terms = vec![
                    (lp.v(VarKey::Zh { i, k }), 1.0),
                    (lp.v(VarKey::Zh { i: j, k }), 1.0),
                    (lp.v(VarKey::Zb { i, j, k }), -1.0),
                ];
                lp.row(Family::PairBoth, format!("{i}_{j}_{k}"), terms, Sense::Le, 1.0);
            }
        }
    }
    for k in 0..kk {
        let mut terms: Vec<(usize, f64)> = cust
            .clone()
            .map(|i| (lp.v(VarKey::Zh { i, k }), geo.unit(i).perimeter - f * geo.unit(i).sqrt_area))
            .collect();
        for i in cust.clone() {
            for j in cust.clone() {
                let shared = if i == j { 0.0 } else { geo.shared_boundary(i, j) };
                if shared != 0.0 {
                    terms.push((lp.v(VarKey::Zb { i, j, k }), -shared));
                }
            }
        }
        lp.row(Family::Compactness, format!("{k}"), terms, Sense::Le, 0.0);
    }
    let cap = (nv - 1) as f64;
    for i in cust.clone() {
        for k in 0..kk {
            let mut terms: Vec<(usize, f64)> = neighbours[i].iter().map(|&j| (lp.v(VarKey::U { i, j, k }), 1.0)).collect();
            terms.extend(neighbours[i].iter().map(|&j| (lp.v(VarKey::U { i: j, j: i, k }), -1.0)));
            terms.push((lp.v(VarKey::Zh { i, k }), -1.0));
            terms.push((lp.v(VarKey::W { i, k }), cap));
            lp.row(Family::FlowBalance, format!("{i}_{k}"), terms, Sense::Ge, 0.0);
        }
    }
    for k in 0..kk {
        let terms = cust.clone().map(|i| (lp.v(VarKey::W { i, k }), 1.0)).collect();
        lp.row(Family::Sink, format!("{k}"), terms, Sense::Eq, 1.0);
    }
    for i in cust.clone() {
        for k in 0..kk {
            let mut terms: Vec<(usize, f64)> =
                neighbours[i].iter().map(|&j| (lp.v(VarKey::U { i: j, j: i, k }), 1.0)).collect();
            terms.push((lp.v(VarKey::Zh { i, k }), -cap));
            lp.row(Family::FlowCapacity, format!("{i}_{k}"), terms, Sense::Le, 0.0);
        }
    }
    for j in cust.clone() {
        for k in 0..kk {
            for d in 0..days {
                let y = lp.v(VarKey::Y { i: j, k, d });
                let mut into: Vec<(usize, f64)> =
                    (0..nv).filter(|&i| i != j).map(|i| (lp.v(VarKey::X { i, j, k, d }), 1.0)).collect();
                into.push((y, -1.0));
                lp.row(Family::Degree, format!("in_{j}_{k}_{d}"), into, Sense::Eq, 0.0);
                let mut out: Vec<(usize, f64)> =
                    (0..nv).filter(|&i| i != j).map(|i| (lp.v(VarKey::X { i: j, j: i, k, d }), 1.0)).collect();
                out.push((y, -1.0));
                lp.row(Family::Degree, format!("out_{j}_{k}_{d}"), out, Sense::Eq, 0.0);
            }
        }
    }
    for k in 0..kk {
        for d in 0..days {
            let z = lp.v(VarKey::Z { k });
            let leave: Vec<(usize, f64)> = cust.clone().map(|j| (lp.v(VarKey::X { i: 0, j, k, d }), 1.0)).collect();
            let enter: Vec<(usize, f64)> = cust.clone().map(|i| (lp.v(VarKey::X { i, j: 0, k, d }), 1.0)).collect();
            if options.literal_depot_flow {
                let mut a = leave;
                a.push((z, -1.0));
                lp.row(Family::DepotFlow, format!("out_{k}_{d}"), a, Sense::Eq, 0.0);
                let mut b = enter;
                b.push((z, -1.0));
                lp.row(Family::DepotFlow, format!("in_{k}_{d}"), b, Sense::Eq, 0.0);
            } else {
                let mut a = leave.clone();
                a.push((z, -1.0));
                lp.row(Family::DepotFlow, format!("out_{k}_{d}"), a, Sense::Le, 0.0);
                let mut b = leave;
                b.extend(enter.into_iter().map(|(v, _)| (v, -1.0)));
                lp.row(Family::DepotFlow, format!("in_{k}_{d}"), b, Sense::Eq, 0.0);
            }
        }
    }
    for i in cust.clone() {
        for k in 0..kk {
            for alpha in 0..days {
                for beta in 0..days {
                    if alpha == beta {
                        continue;
                    }
                    let terms =
                        vec![(lp.v(VarKey::Y { i, k, d: alpha }), 1.0), (lp.v(VarKey::Y { i, k, d: beta }), -1.0)];
                    let rhs = o(inst, i, alpha) + o(inst, i, beta) - 2.0;
                    lp.row(Family::PersonConsistency, format!("{i}_{k}_{alpha}_{beta}"), terms, Sense::Ge, rhs);
                }
            }
        }
    }
    for (family, lower) in [(Family::ScheduleLower, true), (Family::ScheduleUpper, false)] {
        for i in 0..nv {
            for j in cust.clone() {
                if i == j {
                    continue;
                }
                let step = inst.service(i) + inst.t(i, j);
                for k in 0..kk {
                    for d in 0..days {
                        let si = lp.v(VarKey::S { i, d });
                        let sj = lp.v(VarKey::S { i: j, d });
                        let x = lp.v(VarKey::X { i, j, k, d });
                        let terms = if lower {
                            vec![(si, 1.0), (sj, -1.0), (x, big_m + step)]
                        } else {
                            vec![(sj, 1.0), (si, -1.0), (lp.v(VarKey::E { j, d }), -1.0), (x, big_m - step)]
                        };
                        lp.row(family, format!("{i}_{j}_{k}_{d}"), terms, Sense::Le, big_m);
                    }
                }
            }
        }
    }
    for i in cust.clone() {
        for d in 0..days {
            let terms = vec![(lp.v(VarKey::S { i, d }), 1.0)];
            let rhs = inst.workday() - inst.service(i) - inst.t(i, 0);
            lp.row(Family::Return, format!("{i}_{d}"), terms, Sense::Le, rhs);
        }
    }
    for i in 0..nv {
        for d in 0..days {
            let s = lp.v(VarKey::S { i, d });
            let w = inst.window(i);
            lp.row(Family::Window, format!("lo_{i}_{d}"), vec![(s, 1.0)], Sense::Ge, w.open * o(inst, i, d));
            lp.row(Family::Window, format!("hi_{i}_{d}"), vec![(s, 1.0)], Sense::Le, w.close * o(inst, i, d));
        }
    }
    if options.symmetry_breaking {
        for k in 0..kk.saturating_sub(1) {
            let terms = vec![(lp.v(VarKey::Z { k }), 1.0), (lp.v(VarKey::Z { k: k + 1 }), -1.0)];
            lp.row(Family::Symmetry, format!("{k}"), terms, Sense::Ge, 0.0);
        }
    }

    let mut families: BTreeMap<Family, Vec<usize>> = BTreeMap::new();
    for (r, row) in lp.rows.iter().enumerate() {
        families.entry(row.family).or_default().push(r);
    }
    Ok(MilpArtifacts { lp, big_m, vehicles: kk, options, families })
}

/// A complete MILP assignment built from a solution: vehicle `k` is the
/// `k`-th non-empty territory, arcs and start times follow the routes'
/// earliest-start schedules, and the contiguity flow runs along a
/// breadth-first tree towards each territory's smallest member.
pub fn assignment_from_solution(sol: &Solution, inst: &Instance, art: &MilpArtifacts) -> Result<Vec<f64>, ExactError> {
    let lp = &art.lp;
    let mut x = vec![0.0; lp.variables.len()];
    let used: Vec<_> = sol.territories.iter().filter(|t| !t.members.is_empty()).collect();
    if used.len() > art.vehicles {
        return Err(ExactError::Mapping("more territories than vehicles".into()));
    }
    let set = |x: &mut Vec<f64>, key: VarKey, value: f64| -> Result<(), ExactError> {
        let v = lp.var(key).ok_or_else(|| ExactError::Mapping(format!("no variable {key}")))?;
        x[v] = value;
        Ok(())
    };
    for k in used.len()..art.vehicles {
        set(&mut x, VarKey::W { i: 1, k }, 1.0)?;
    }
    for (k, t) in used.iter().enumerate() {
        set(&mut x, VarKey::Z { k }, 1.0)?;
        for &i in &t.members {
            set(&mut x, VarKey::Zh { i, k }, 1.0)?;
            for &j in &t.members {
                if i != j {
                    set(&mut x, VarKey::Zb { i, j, k }, 1.0)?;
                }
            }
        }
        for route in &t.routes {
            let d = route.day;
            let sim = simulate(&route.visits, d, inst);
            let mut prev = 0;
            for (pos, &j) in route.visits.iter().enumerate() {
                set(&mut x, VarKey::Y { i: j, k, d }, 1.0)?;
                set(&mut x, VarKey::X { i: prev, j, k, d }, 1.0)?;
                set(&mut x, VarKey::S { i: j, d }, sim.starts[pos])?;
                set(&mut x, VarKey::E { j, d }, sim.waits[pos])?;
                prev = j;
            }
            if prev != 0 {
                set(&mut x, VarKey::X { i: prev, j: 0, k, d }, 1.0)?;
            }
        }
        let sink = t.members[0];
        set(&mut x, VarKey::W { i: sink, k }, 1.0)?;
        for (child, parent, flow) in flow_tree(&t.members, sink, inst)? {
            set(&mut x, VarKey::U { i: child, j: parent, k }, flow)?;
        }
    }
    Ok(x)
}

/// `(child, parent, subtree size)` for a breadth-first tree rooted at `root`.
fn flow_tree(members: &[usize], root: usize, inst: &Instance) -> Result<Vec<(usize, usize, f64)>, ExactError> {
    let geo = inst.geometry();
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for v in geo.neighbors(u) {
            if v != root && members.binary_search(&v).is_ok() && !parent.contains_key(&v) {
                parent.insert(v, u);
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    if order.len() != members.len() {
        return Err(ExactError::Mapping(format!("territory with sink {root} is not contiguous")));
    }
    let mut size: HashMap<usize, f64> = members.iter().map(|&m| (m, 1.0)).collect();
    let mut arcs = Vec::new();
    for &v in order.iter().rev().filter(|&&v| v != root) {
        let p = parent[&v];
        let s = size[&v];
        *size.get_mut(&p).expect("member") += s;
        arcs.push((v, p, s));
    }
    Ok(arcs)
}
