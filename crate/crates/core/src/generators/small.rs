use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::CompactnessMode;
use crate::model::{Instance, InstanceData, TimeWindow};
use crate::Point;

use super::solomon::SolomonFile;
use super::GeneratorError;

/// Parameters of the small instance generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub customer_count: usize,
    pub horizon_days: usize,
    /// Probability that a customer needs service on a given day.
    pub service_frequency: f64,
    pub capacity_factor: f64,
    pub rng_seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams { customer_count: 10, horizon_days: 5, service_frequency: 0.7, capacity_factor: 0.5, rng_seed: 0 }
    }
}

impl GeneratorParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn check(&self) -> Result<(), GeneratorError> {
        if self.customer_count == 0 || self.horizon_days == 0 {
            return Err(GeneratorError::Params("customer_count and horizon_days must be positive".into()));
        }
        if !(self.service_frequency > 0.0 && self.service_frequency <= 1.0) {
            return Err(GeneratorError::Params(format!("service_frequency {} outside (0, 1]", self.service_frequency)));
        }
        if !(self.capacity_factor > 0.0) {
            return Err(GeneratorError::Params("capacity_factor must be positive".into()));
        }
        Ok(())
    }
}

/// Day-by-day Bernoulli activity, `active[i][d]`. A customer drawn inactive
/// on every day is given one uniformly chosen day.
fn draw_activity(n: usize, days: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<bool>> {
    let coin = Bernoulli::new(p).expect("probability checked");
    let mut active = vec![vec![false; days]; n];
    for d in 0..days {
        for row in active.iter_mut() {
            row[d] = coin.sample(rng);
        }
    }
    for row in active.iter_mut() {
        if !row.contains(&true) {
            row[rng.random_range(0..days)] = true;
        }
    }
    active
}

/// First `customer_count` customers of a Solomon file over a multi-day
/// horizon, with halved (by default) vehicle capacity. Compactness uses the
/// sum of the units' square-root areas.
pub fn make_small_instance(solomon: &SolomonFile, params: &GeneratorParams) -> Result<Instance, GeneratorError> {
    params.check()?;
    let n = params.customer_count;
    if n > solomon.customer_count() {
        return Err(GeneratorError::Params(format!(
            "{} customers requested, {} has {}",
            n,
            solomon.name,
            solomon.customer_count()
        )));
    }
    let rows = &solomon.rows[..=n];
    let coords: Vec<Point> = rows.iter().map(|r| Point::new(r.x, r.y)).collect();
    let capacity = (params.capacity_factor * solomon.capacity).floor();
    let workday = solomon.depot().due;
    let name = format!("{}-n{}-d{}-s{}", solomon.name, n, params.horizon_days, params.rng_seed);
    let mut data = InstanceData::euclidean(&name, coords, params.horizon_days, capacity, workday);
    data.compactness_mode = CompactnessMode::SumOfSqrts;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let active = draw_activity(n, params.horizon_days, params.service_frequency, &mut rng);
    for (k, r) in rows.iter().enumerate() {
        data.windows[k] = TimeWindow::new(r.ready, r.due);
        data.service_times[k] = r.service;
        if k > 0 {
            for d in 0..params.horizon_days {
                data.demands[k][d] = if active[k - 1][d] { r.demand } else { 0.0 };
            }
        }
    }
    Ok(Instance::new(data)?)
}

/// Workday of [`make_random_small_instance`].
pub const RANDOM_SMALL_WORKDAY: f64 = 480.0;

/// Solomon-like random instance: integer coordinates in a 100 x 100 square
/// around a central depot, demands 5..=40, service time 10, windows 30 to 180
/// wide. Every customer is reachable on its own. Capacity is
/// `capacity_factor * 200`; compactness as in [`make_small_instance`].
pub fn make_random_small_instance(params: &GeneratorParams) -> Result<Instance, GeneratorError> {
    params.check()?;
    let n = params.customer_count;
    if n > 5000 {
        return Err(GeneratorError::Params("at most 5000 customers".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut coords = vec![Point::new(50.0, 50.0)];
    while coords.len() <= n {
        let p = Point::new(rng.random_range(0..=100) as f64, rng.random_range(0..=100) as f64);
        if !coords.contains(&p) {
            coords.push(p);
        }
    }
    let h = RANDOM_SMALL_WORKDAY;
    let service = 10.0;
    let capacity = (params.capacity_factor * 200.0).floor();
    let name = format!("rand-n{}-d{}-s{}", n, params.horizon_days, params.rng_seed);
    let mut data = InstanceData::euclidean(&name, coords, params.horizon_days, capacity, h);
    data.compactness_mode = CompactnessMode::SumOfSqrts;
    for i in 1..=n {
        data.service_times[i] = service;
        let reach = data.travel_times[0][i].ceil();
        let latest = (h - service - reach).floor();
        let width = rng.random_range(30..=180) as f64;
        let close = rng.random_range(reach as i64..=latest as i64) as f64;
        data.windows[i] = TimeWindow::new((close - width).max(0.0), close);
    }
    let active = draw_activity(n, params.horizon_days, params.service_frequency, &mut rng);
    for i in 1..=n {
        let q = rng.random_range(5..=40).min(capacity as i64) as f64;
        for d in 0..params.horizon_days {
            data.demands[i][d] = if active[i - 1][d] { q } else { 0.0 };
        }
    }
    Ok(Instance::new(data)?)
}
