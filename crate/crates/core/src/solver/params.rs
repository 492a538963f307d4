use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::geometry::CompactnessMode;
use crate::routing::PenaltyWeights;

use super::SolverError;

/// Tuning parameters of the heuristic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Backtrack stack capacity η.
    pub eta: usize,
    /// Penalty ceiling p_max.
    pub p_max: u32,
    /// Largest ejection set in stage 3.
    pub k_max: usize,
    /// Budget of the elimination phase, seconds.
    pub ct_max_secs: f64,
    pub seed: u64,
    /// Overrides the instance's compactness bound.
    pub compactness_bound: Option<f64>,
    /// Overrides the instance's compactness mode.
    pub compactness_mode: Option<CompactnessMode>,
    pub weights: PenaltyWeights,
    /// Stage-3 attempts per merge run are capped at this multiple of the
    /// initial pool size.
    pub merge_attempt_factor: usize,
    /// Cap on 2-opt/relocation alternations in stage 2.
    pub repair_rounds: usize,
    /// Run the final relocation/2-opt pass.
    pub reoptimize: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            eta: 5,
            p_max: 5,
            k_max: 3,
            ct_max_secs: 60.0,
            seed: 0,
            compactness_bound: None,
            compactness_mode: None,
            weights: PenaltyWeights::default(),
            merge_attempt_factor: 50,
            repair_rounds: 50,
            reoptimize: true,
        }
    }
}

impl SolverParams {
    pub fn ct_max(&self) -> Duration {
        Duration::from_secs_f64(self.ct_max_secs)
    }

    pub fn with_ct_max(mut self, budget: Duration) -> Self {
        self.ct_max_secs = budget.as_secs_f64();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::Params(what.to_string()));
        if self.eta < 1 {
            return bad("eta must be at least 1");
        }
        if self.p_max < 1 {
            return bad("p_max must be at least 1");
        }
        if !(self.ct_max_secs > 0.0) || !self.ct_max_secs.is_finite() {
            return bad("ct_max must be positive");
        }
        if let Some(f) = self.compactness_bound {
            if !(f > 0.0) {
                return bad("compactness bound must be positive");
            }
        }
        if self.merge_attempt_factor < 1 {
            return bad("merge_attempt_factor must be at least 1");
        }
        Ok(())
    }
}
