use serde::{Deserialize, Serialize};

use crate::geometry::{build_voronoi, BoundingBox, CompactnessMode};
use crate::{Geometry, Point};

use super::ModelError;

/// Schema tag carried by every instance and solution file.
pub const SCHEMA: &str = "tddmp-1";

/// Hull inflation used to close the outer Voronoi cells.
pub const BOX_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub open: f64,
    pub close: f64,
}

impl TimeWindow {
    pub fn new(open: f64, close: f64) -> Self {
        TimeWindow { open, close }
    }
}

/// Raw instance data, before invariant checks. Node 0 is the depot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceData {
    pub name: String,
    pub days: usize,
    pub coords: Vec<Point>,
    /// Full matrix over all nodes, minutes.
    pub travel_times: Vec<Vec<f64>>,
    /// `demands[node][day]`, kg. The depot row is all zeros.
    pub demands: Vec<Vec<f64>>,
    pub service_times: Vec<f64>,
    pub windows: Vec<TimeWindow>,
    pub capacity: f64,
    /// Length of the working day `h`, minutes.
    pub workday: f64,
    pub compactness_bound: f64,
    pub compactness_mode: CompactnessMode,
    /// Basic-unit cells; built from `coords` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    schema: String,
    #[serde(flatten)]
    data: InstanceData,
}

/// A validated problem instance. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    name: String,
    days: usize,
    coords: Vec<Point>,
    travel: Vec<f64>,
    demands: Vec<Vec<f64>>,
    service_times: Vec<f64>,
    windows: Vec<TimeWindow>,
    capacity: f64,
    workday: f64,
    compactness_bound: f64,
    compactness_mode: CompactnessMode,
    geometry: Geometry,
}

impl Instance {
    pub fn new(data: InstanceData) -> Result<Self, ModelError> {
        let nodes = data.coords.len();
        if nodes == 0 {
            return Err(ModelError::Shape("at least the depot node is required".into()));
        }
        let shape = |what: &str, got: usize| {
            if got != nodes {
                Err(ModelError::Shape(format!("{what} has {got} rows, expected {nodes}")))
            } else {
                Ok(())
            }
        };
        shape("travel_times", data.travel_times.len())?;
        shape("demands", data.demands.len())?;
        shape("service_times", data.service_times.len())?;
        shape("windows", data.windows.len())?;
        if !(data.capacity > 0.0) || !(data.workday > 0.0) {
            return Err(ModelError::Shape("capacity and workday must be positive".into()));
        }
        if !(data.compactness_bound > 0.0) {
            return Err(ModelError::Shape("compactness bound must be positive".into()));
        }

        let mut travel = Vec::with_capacity(nodes * nodes);
        for (i, row) in data.travel_times.iter().enumerate() {
            if row.len() != nodes {
                return Err(ModelError::Shape(format!("travel_times row {i} has {} entries", row.len())));
            }
            for (j, &t) in row.iter().enumerate() {
                if !t.is_finite() || t < 0.0 || (i == j && t != 0.0) {
                    return Err(ModelError::TravelTime { from: i, to: j, value: t });
                }
            }
            travel.extend_from_slice(row);
        }
        for (i, row) in data.demands.iter().enumerate() {
            if row.len() != data.days {
                return Err(ModelError::Shape(format!("demands row {i} has {} days, expected {}", row.len(), data.days)));
            }
            for (d, &q) in row.iter().enumerate() {
                let bad = !q.is_finite() || q < 0.0 || q > data.capacity || (i == 0 && q != 0.0);
                if bad {
                    return Err(ModelError::Demand { customer: i, day: d, value: q });
                }
            }
        }
        for (i, w) in data.windows.iter().enumerate() {
            if !(w.open >= 0.0 && w.open <= w.close && w.close <= data.workday) {
                return Err(ModelError::Window { node: i, open: w.open, close: w.close });
            }
        }
        if let Some(i) = data.service_times.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(ModelError::Shape(format!("service time of node {i} is invalid")));
        }

        let geometry = match data.geometry {
            Some(g) => {
                if g.len() != nodes {
                    return Err(ModelError::Shape(format!("geometry has {} cells, expected {nodes}", g.len())));
                }
                g
            }
            None => {
                let bbox = BoundingBox::around(&data.coords, BOX_MARGIN).expect("non-empty");
                build_voronoi(&data.coords, bbox)?
            }
        };

        let inst = Instance {
            name: data.name,
            days: data.days,
            coords: data.coords,
            travel,
            demands: data.demands,
            service_times: data.service_times,
            windows: data.windows,
            capacity: data.capacity,
            workday: data.workday,
            compactness_bound: data.compactness_bound,
            compactness_mode: data.compactness_mode,
            geometry,
        };
        if inst.nodes() <= TRIANGLE_CHECK_LIMIT {
            let bad = inst.triangle_violations(1e-6);
            if let Some(&(i, k, j, excess)) = bad.first() {
                log::warn!(
                    "{}: {} triangle inequality violations, e.g. t[{i}][{j}] exceeds t[{i}][{k}]+t[{k}][{j}] by {excess}",
                    inst.name,
                    bad.len()
                );
            }
        }
        Ok(inst)
    }

    pub fn data(&self) -> InstanceData {
        let nodes = self.nodes();
        InstanceData {
            name: self.name.clone(),
            days: self.days,
            coords: self.coords.clone(),
            travel_times: self.travel.chunks(nodes).map(<[f64]>::to_vec).collect(),
            demands: self.demands.clone(),
            service_times: self.service_times.clone(),
            windows: self.windows.clone(),
            capacity: self.capacity,
            workday: self.workday,
            compactness_bound: self.compactness_bound,
            compactness_mode: self.compactness_mode,
            geometry: Some(self.geometry.clone()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.schema != SCHEMA {
            return Err(ModelError::Schema(file.schema));
        }
        Instance::new(file.data)
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile { schema: SCHEMA.to_string(), data: self.data() };
        serde_json::to_string(&file).expect("instance serializes")
    }

    /// Same instance with a different compactness bound and mode.
    pub fn with_compactness(&self, bound: f64, mode: CompactnessMode) -> Self {
        let mut out = self.clone();
        out.compactness_bound = bound;
        out.compactness_mode = mode;
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of customers `n`.
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    /// Number of nodes including the depot.
    pub fn nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn customers(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n()
    }

    pub fn days(&self) -> usize {
        self.days
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    #[inline]
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.travel[i * self.coords.len() + j]
    }

    #[inline]
    pub fn demand(&self, i: usize, day: usize) -> f64 {
        self.demands[i][day]
    }

    #[inline]
    pub fn is_active(&self, i: usize, day: usize) -> bool {
        self.demands[i][day] > 0.0
    }

    pub fn active_days(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.days).filter(move |&d| self.is_active(i, d))
    }

    pub fn active_day_count(&self, i: usize) -> usize {
        self.active_days(i).count()
    }

    pub fn total_demand(&self, i: usize) -> f64 {
        self.demands[i].iter().sum()
    }

    #[inline]
    pub fn service(&self, i: usize) -> f64 {
        self.service_times[i]
    }

    #[inline]
    pub fn window(&self, i: usize) -> TimeWindow {
        self.windows[i]
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn workday(&self) -> f64 {
        self.workday
    }

    pub fn compactness_bound(&self) -> f64 {
        self.compactness_bound
    }

    pub fn compactness_mode(&self) -> CompactnessMode {
        self.compactness_mode
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Triples `(i, k, j, excess)` with `t[i][j] > t[i][k] + t[k][j] + tol`.
    pub fn triangle_violations(&self, tol: f64) -> Vec<(usize, usize, usize, f64)> {
        let v = self.nodes();
        let mut out = Vec::new();
        for i in 0..v {
            for k in 0..v {
                let tik = self.t(i, k);
                for j in 0..v {
                    let excess = self.t(i, j) - (tik + self.t(k, j));
                    if excess > tol {
                        out.push((i, k, j, excess));
                    }
                }
            }
        }
        out
    }
}

const TRIANGLE_CHECK_LIMIT: usize = 400;

/// Euclidean travel-time matrix over `coords`.
pub fn euclidean_matrix(coords: &[Point]) -> Vec<Vec<f64>> {
    coords
        .iter()
        .map(|a| coords.iter().map(|b| a.dist(*b)).collect())
        .collect()
}
