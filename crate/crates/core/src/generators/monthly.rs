use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::model::{Instance, InstanceData, TimeWindow};
use crate::Point;

use super::GeneratorError;

/// Summary statistics of a month of orders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonthlyProfile {
    pub days: usize,
    pub customers: usize,
    /// Mean share of customers active on a day.
    pub active_fraction: f64,
    /// Day-to-day standard deviation of the active share.
    pub active_std: f64,
    /// Share of customers replaced from one month to the next.
    pub new_rate: f64,
    /// Vehicle capacity, kg.
    pub capacity: f64,
    /// Workday, minutes.
    pub workday: f64,
    /// Side of the square service region, in travel minutes.
    pub region: f64,
    /// Service time per stop, minutes.
    pub service_time: f64,
    /// Median order size, kg.
    pub order_median: f64,
    /// Share of customers drawn from the clusters rather than uniformly.
    pub clustered_share: f64,
    pub compactness_bound: f64,
}

impl Default for MonthlyProfile {
    fn default() -> Self {
        MonthlyProfile::table2_average()
    }
}

impl MonthlyProfile {
    /// Average month of the reference fleet: 23 days, 1784 customers, 19.2%
    /// daily activity (std 3.9 points), 11.5% new customers, 5 t vehicles.
    pub fn table2_average() -> Self {
        MonthlyProfile {
            days: 23,
            customers: 1784,
            active_fraction: 0.192,
            active_std: 0.039,
            new_rate: 0.115,
            capacity: 5000.0,
            workday: 600.0,
            region: 60.0,
            service_time: 10.0,
            order_median: 150.0,
            clustered_share: 0.6,
            compactness_bound: 10.0,
        }
    }

    /// Same statistics at a different size.
    pub fn scaled(customers: usize, days: usize) -> Self {
        MonthlyProfile { customers, days, ..MonthlyProfile::table2_average() }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |m: &str| Err(GeneratorError::Params(m.to_string()));
        if self.days == 0 || self.customers == 0 {
            return bad("days and customers must be positive");
        }
        if !(self.active_fraction > 0.0 && self.active_fraction <= 1.0) {
            return bad("active_fraction must lie in (0, 1]");
        }
        if !(self.active_std >= 0.0) || !(0.0..1.0).contains(&self.new_rate) {
            return bad("active_std must be non-negative and new_rate in [0, 1)");
        }
        if !(self.clustered_share >= 0.0 && self.clustered_share <= 1.0) {
            return bad("clustered_share must lie in [0, 1]");
        }
        let reach = self.region * std::f64::consts::FRAC_1_SQRT_2;
        if !(self.region > 0.0 && self.capacity > 0.0 && self.order_median > 0.0 && self.service_time >= 0.0) {
            return bad("region, capacity and order_median must be positive");
        }
        if self.workday < 2.0 * reach + self.service_time || self.workday * 0.4 + self.service_time + reach > self.workday {
            return bad("workday too short for the region");
        }
        if !(self.compactness_bound > 0.0) {
            return bad("compactness_bound must be positive");
        }
        Ok(())
    }

    /// Shift windows: full day, morning, afternoon.
    fn shift(&self, rng: &mut ChaCha8Rng) -> TimeWindow {
        let h = self.workday;
        match rng.random_range(0..4) {
            0 => TimeWindow::new(0.0, 0.5 * h),
            1 => TimeWindow::new(0.4 * h, h),
            _ => TimeWindow::new(0.0, h),
        }
    }
}

/// Gaussian clusters over a uniform background in `[0, region]^2`; the
/// cluster count is `ceil(n / 150)`.
#[derive(Clone, Debug)]
struct Layout {
    region: f64,
    centers: Vec<Point>,
    spread: Normal<f64>,
    clustered_share: f64,
}

impl Layout {
    fn new(profile: &MonthlyProfile, rng: &mut ChaCha8Rng) -> Self {
        let r = profile.region;
        let k = profile.customers.div_ceil(150);
        let centers = (0..k)
            .map(|_| Point::new(rng.random_range(0.15 * r..0.85 * r), rng.random_range(0.15 * r..0.85 * r)))
            .collect();
        Layout {
            region: r,
            centers,
            spread: Normal::new(0.0, r / 12.0).expect("positive spread"),
            clustered_share: profile.clustered_share,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Point {
        let r = self.region;
        let (x, y) = if rng.random_bool(self.clustered_share) {
            let c = self.centers[rng.random_range(0..self.centers.len())];
            (c.x + self.spread.sample(rng), c.y + self.spread.sample(rng))
        } else {
            (rng.random_range(0.0..r), rng.random_range(0.0..r))
        };
        let snap = |v: f64| (v.clamp(0.0, r) * 100.0).round() / 100.0;
        Point::new(snap(x), snap(y))
    }

    /// A fresh point not in `taken` and not on the depot.
    fn sample_new(&self, taken: &std::collections::HashSet<(u64, u64)>, rng: &mut ChaCha8Rng) -> Point {
        loop {
            let p = self.sample(rng);
            if !taken.contains(&key(p)) {
                return p;
            }
        }
    }
}

fn key(p: Point) -> (u64, u64) {
    (p.x.to_bits(), p.y.to_bits())
}

/// Month-invariant customer attributes.
#[derive(Clone, Debug)]
struct Customer {
    pos: Point,
    window: TimeWindow,
    /// Median order size, kg.
    size: f64,
    /// Probability of ordering on an average day.
    rate: f64,
}

/// Customer order rates: Beta with mean `active_fraction` and concentration 6.
fn rate_law(profile: &MonthlyProfile) -> Option<Beta<f64>> {
    let f = profile.active_fraction;
    (f < 1.0).then(|| Beta::new(f * 6.0, (1.0 - f) * 6.0).expect("fraction in (0, 1)"))
}

fn draw_customers(
    count: usize,
    layout: &Layout,
    taken: &mut std::collections::HashSet<(u64, u64)>,
    profile: &MonthlyProfile,
    rng: &mut ChaCha8Rng,
) -> Vec<Customer> {
    let size = LogNormal::new(profile.order_median.ln(), 0.6).expect("valid log-normal");
    let rates = rate_law(profile);
    (0..count)
        .map(|_| {
            let pos = layout.sample_new(taken, rng);
            taken.insert(key(pos));
            let window = profile.shift(rng);
            let size = size.sample(rng);
            let rate = rates.map_or(1.0, |law| law.sample(rng));
            Customer { pos, window, size, rate }
        })
        .collect()
}

/// Activity matrix `active[i][d]` from the customer rates and a common day
/// factor. Customers left without any active day get one, taken over from
/// another customer on the same day so that the number of customer-days is
/// unchanged.
fn draw_activity(rate: &[f64], profile: &MonthlyProfile, rng: &mut ChaCha8Rng) -> Vec<Vec<bool>> {
    let n = rate.len();
    let days = profile.days;
    let f = profile.active_fraction;
    if f >= 1.0 {
        return vec![vec![true; days]; n];
    }
    let day_factor = Normal::new(1.0, profile.active_std / f).expect("finite std");
    let factor: Vec<f64> = (0..days).map(|_| day_factor.sample(rng).clamp(0.3, 1.7)).collect();
    let mut active = vec![vec![false; days]; n];
    for (d, m) in factor.iter().enumerate() {
        for (i, row) in active.iter_mut().enumerate() {
            row[d] = rng.random_bool((rate[i] * m).min(1.0));
        }
    }
    let mut counts: Vec<usize> = active.iter().map(|r| r.iter().filter(|&&a| a).count()).collect();
    for i in 0..n {
        if counts[i] > 0 {
            continue;
        }
        let d = rng.random_range(0..days);
        active[i][d] = true;
        counts[i] = 1;
        let donors: Vec<usize> = (0..n).filter(|&j| active[j][d] && counts[j] >= 2).collect();
        if !donors.is_empty() {
            let j = donors[rng.random_range(0..donors.len())];
            active[j][d] = false;
            counts[j] -= 1;
        }
    }
    active
}

fn build(
    name: String,
    depot: Point,
    customers: &[Customer],
    profile: &MonthlyProfile,
    rng: &mut ChaCha8Rng,
) -> Result<Instance, GeneratorError> {
    let mut coords = vec![depot];
    coords.extend(customers.iter().map(|c| c.pos));
    let mut data = InstanceData::euclidean(&name, coords, profile.days, profile.capacity, profile.workday);
    data.compactness_bound = profile.compactness_bound;
    let rates: Vec<f64> = customers.iter().map(|c| c.rate).collect();
    let active = draw_activity(&rates, profile, rng);
    let noise = LogNormal::new(0.0, 0.3).expect("valid log-normal");
    for (k, c) in customers.iter().enumerate() {
        let i = k + 1;
        data.windows[i] = c.window;
        data.service_times[i] = profile.service_time;
        for d in 0..profile.days {
            if active[k][d] {
                let q = (c.size * noise.sample(rng)).round();
                data.demands[i][d] = q.clamp(1.0, profile.capacity);
            }
        }
    }
    Ok(Instance::new(data)?)
}

/// Synthetic month with the activity statistics of `profile`.
pub fn make_monthly_instance(profile: &MonthlyProfile, seed: u64) -> Result<Instance, GeneratorError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = Layout::new(profile, &mut rng);
    let depot = Point::new(profile.region / 2.0, profile.region / 2.0);
    let mut taken = [key(depot)].into_iter().collect();
    let customers = draw_customers(profile.customers, &layout, &mut taken, profile, &mut rng);
    let name = format!("month-n{}-d{}-s{}", profile.customers, profile.days, seed);
    build(name, depot, &customers, profile, &mut rng)
}

/// Two consecutive months over the same region.
#[derive(Clone, Debug)]
pub struct MonthPair {
    pub month1: Instance,
    pub month2: Instance,
    /// `(month1 id, month2 id)` for every customer present in both months,
    /// ascending.
    pub shared: Vec<(usize, usize)>,
}

/// Month pair: the second month keeps `round((1 - new_rate) n)` customers of
/// the first (same coordinates, window, order size and order rate; ids
/// `1..=kept` in their original order) and adds new ones from the same
/// process. Daily orders are drawn independently for each month.
pub fn make_month_pair(profile: &MonthlyProfile, seed: u64) -> Result<MonthPair, GeneratorError> {
    profile.validate()?;
    let n = profile.customers;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = Layout::new(profile, &mut rng);
    let depot = Point::new(profile.region / 2.0, profile.region / 2.0);
    let mut taken = [key(depot)].into_iter().collect();
    let first = draw_customers(n, &layout, &mut taken, profile, &mut rng);

    let kept = ((1.0 - profile.new_rate) * n as f64).round() as usize;
    let mut keep = index::sample(&mut rng, n, kept).into_vec();
    keep.sort_unstable();
    let mut second: Vec<Customer> = keep.iter().map(|&k| first[k].clone()).collect();
    second.extend(draw_customers(n - kept, &layout, &mut taken, profile, &mut rng));
    let shared = keep.iter().enumerate().map(|(k2, &k1)| (k1 + 1, k2 + 1)).collect();

    let base = format!("month-n{}-d{}-s{}", n, profile.days, seed);
    let month1 = build(format!("{base}-m1"), depot, &first, profile, &mut rng)?;
    let month2 = build(format!("{base}-m2"), depot, &second, profile, &mut rng)?;
    Ok(MonthPair { month1, month2, shared })
}

/// Mean over days of the share of customers with positive demand.
pub fn mean_active_fraction(inst: &Instance) -> f64 {
    let n = inst.n() as f64;
    let total: usize = (0..inst.days()).map(|d| inst.customers().filter(|&i| inst.is_active(i, d)).count()).sum();
    total as f64 / (n * inst.days() as f64)
}
