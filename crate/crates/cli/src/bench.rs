use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use tddmp::model::{solution_cost, validate, Instance, Solution};
use tddmp::solver::{solve, SolveResult, SolverError, SolverParams};

use crate::next_month::NextMonthReport;

/// One solved instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub class: String,
    pub seed: u64,
    /// Territories (vehicles).
    pub nv: usize,
    /// Total travel time, hours.
    pub tt: f64,
    /// Mean compactness ratio of the territories.
    pub acr: f64,
    /// Wall-clock seconds of the whole run.
    pub cpu: f64,
    /// Wall-clock seconds until the final incumbent.
    pub time_to_best: f64,
    pub feasible: bool,
    pub timed_out: bool,
    /// Travel-time improvement over the baseline plan, percent.
    pub delta_tt: Option<f64>,
}

/// Averages of one instance class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: String,
    pub instances: usize,
    pub anv: f64,
    pub att: f64,
    pub acr: f64,
    pub acpu: f64,
    pub delta_tt: Option<f64>,
}

/// Next-month metrics of one month pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NextMonthRow {
    pub instance: String,
    pub tic: usize,
    pub tid: usize,
    pub iac: f64,
    pub iatw: f64,
    /// Old customer-days that did not fit.
    pub overflow: usize,
}

impl From<&NextMonthReport> for NextMonthRow {
    fn from(r: &NextMonthReport) -> Self {
        NextMonthRow {
            instance: r.instance.clone(),
            tic: r.tic,
            tid: r.tid,
            iac: r.iac,
            iatw: r.iatw,
            overflow: r.overflow.len(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub classes: Vec<ClassSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub next_month: Vec<NextMonthRow>,
}

impl BenchReport {
    pub fn from_rows(rows: Vec<BenchRow>) -> Self {
        let classes = aggregate(&rows);
        BenchReport { rows, classes, next_month: Vec::new() }
    }

    pub fn from_next_month(rows: Vec<NextMonthRow>) -> Self {
        BenchReport { rows: Vec::new(), classes: Vec::new(), next_month: rows }
    }

    /// Row CSV; the next-month table when there are no solver rows.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() && !self.next_month.is_empty() {
            for r in &self.next_month {
                w.serialize(r)?;
            }
        } else {
            for r in &self.rows {
                w.serialize(r)?;
            }
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    pub fn classes_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.classes {
            w.serialize(c)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }
}

/// Class label of an instance name: the Solomon family and series
/// (`C101...` gives `C1`, `RC204...` gives `RC2`), otherwise the text before
/// the first `-`.
pub fn instance_class(name: &str) -> String {
    let letters: String = name.chars().take_while(|c| c.is_ascii_uppercase()).collect();
    let rest = &name[letters.len()..];
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    if matches!(letters.as_str(), "C" | "R" | "RC") && digits.len() == 3 {
        return format!("{letters}{}", &digits[..1]);
    }
    name.split('-').next().unwrap_or(name).to_string()
}

/// Per-class means, classes in name order.
pub fn aggregate(rows: &[BenchRow]) -> Vec<ClassSummary> {
    let mut groups: BTreeMap<&str, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(&r.class).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(class, rs)| {
            let k = rs.len() as f64;
            let mean = |f: &dyn Fn(&BenchRow) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / k;
            let deltas: Vec<f64> = rs.iter().filter_map(|r| r.delta_tt).collect();
            ClassSummary {
                class: class.to_string(),
                instances: rs.len(),
                anv: mean(&|r| r.nv as f64),
                att: mean(&|r| r.tt),
                acr: mean(&|r| r.acr),
                acpu: mean(&|r| r.cpu),
                delta_tt: (deltas.len() == rs.len()).then(|| deltas.iter().sum::<f64>() / k),
            }
        })
        .collect()
}

/// Travel-time improvement of `tt` over `baseline`, percent.
pub fn delta_tt(baseline: f64, tt: f64) -> Option<f64> {
    (baseline > 0.0).then(|| 100.0 * (baseline - tt) / baseline)
}

/// Baseline travel times in hours, keyed by instance name.
pub fn baseline_index(solutions: &[(Solution, Instance)]) -> HashMap<String, f64> {
    solutions
        .iter()
        .map(|(s, i)| (s.instance.clone(), solution_cost(i, s).travel_time_hours))
        .collect()
}

/// Solves one instance and measures it.
pub fn bench_one(
    inst: &Instance,
    params: &SolverParams,
    baseline: Option<&HashMap<String, f64>>,
) -> Result<(BenchRow, SolveResult), SolverError> {
    let started = Instant::now();
    let result = solve(inst, params)?;
    let cpu = started.elapsed().as_secs_f64();
    let cost = solution_cost(inst, &result.solution);
    let feasible = validate(inst, &result.solution).map(|r| r.is_feasible()).unwrap_or(false);
    let row = BenchRow {
        instance: inst.name().to_string(),
        class: instance_class(inst.name()),
        seed: params.seed,
        nv: cost.territories,
        tt: cost.travel_time_hours,
        acr: cost.average_compactness.unwrap_or(0.0),
        cpu,
        time_to_best: result.stats.time_to_best,
        feasible,
        timed_out: result.stats.timed_out,
        delta_tt: baseline.and_then(|b| b.get(inst.name())).and_then(|&b| delta_tt(b, cost.travel_time_hours)),
    };
    Ok((row, result))
}
