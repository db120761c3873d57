//! Budget-metered access to the ground-truth power model: the offline
//! learning phase may only observe the real models through this oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Configuration, GroundTruthModelPair};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryBudget {
    pub limit: u32,
    pub used: u32,
}

impl QueryBudget {
    pub fn new(limit: u32) -> Self {
        Self { limit, used: 0 }
    }

    pub fn remaining(&self) -> u32 {
        self.limit - self.used
    }
}

/// Optional Gaussian measurement noise, relative to the true value.
#[derive(Debug, Clone, Copy)]
pub struct NoiseParams {
    pub relative_std: f64,
    pub seed: u64,
}

/// Meters queries against the actual power model pair.
pub struct MeteredOracle<'a> {
    truth: &'a GroundTruthModelPair,
    budget: QueryBudget,
    noise: Option<(f64, ChaCha8Rng)>,
}

impl<'a> MeteredOracle<'a> {
    pub fn new(truth: &'a GroundTruthModelPair, budget: QueryBudget) -> Self {
        Self { truth, budget, noise: None }
    }

    pub fn with_noise(truth: &'a GroundTruthModelPair, budget: QueryBudget, noise: NoiseParams) -> Self {
        Self {
            truth,
            budget,
            noise: Some((noise.relative_std, ChaCha8Rng::seed_from_u64(noise.seed))),
        }
    }

    pub fn budget(&self) -> QueryBudget {
        self.budget
    }

    /// One metered measurement of (discharge rate mWh/s, speed m/s).
    pub fn query_true_power(&mut self, config: &Configuration) -> Result<(f64, f64), SimError> {
        if self.budget.used >= self.budget.limit {
            return Err(SimError::BudgetExhausted { limit: self.budget.limit });
        }
        self.budget.used += 1;
        let mut discharge = self.truth.discharge_model.evaluate(config)?;
        let mut speed = self.truth.speed_model.evaluate(config)?;
        if let Some((std, rng)) = &mut self.noise {
            discharge *= 1.0 + *std * gaussian(rng);
            speed *= 1.0 + *std * gaussian(rng);
        }
        Ok((discharge, speed))
    }
}

/// Standard normal via Box-Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
