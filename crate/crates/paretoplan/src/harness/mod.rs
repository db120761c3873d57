//! Batch runner for A/B/Challenge test triples: deterministic mission and
//! perturbation generation, verdict assignment, crash-safe campaign
//! persistence, and the planning-time scaling benchmark.

mod bench;
mod campaign;
mod stage;
mod verdict;

pub use bench::{planning_benchmark, render_csv, synthetic_pareto_pool, BenchOutcome, BenchParams, BenchRecord};
pub use campaign::{
    expand_campaign, run_campaign, CampaignFile, CampaignSummary, GenerateStanza, KindCounts,
};
pub use stage::{
    default_suite, run_stage, run_triple, HarnessContext, HarnessParams, Stage, StageRecord,
    TripleResult, DEFAULT_SUITE_SEED,
};
pub use verdict::{verdict, TripleScores, Validity, Verdict};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which perturbation family a test exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationClass {
    Obstacle,
    Battery,
}

/// One test triple's parameters. All randomness downstream derives from
/// `seed`, so a spec fully determines its three stage runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub seed: u64,
    pub n_tasks: usize,
    pub power_model_id: u32,
    pub learning_budget: u32,
    pub perturbation_kind: PerturbationClass,
    pub n_perturbations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_file: Option<PathBuf>,
    pub dimension: usize,
}

impl TestSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_tasks < 1 {
            return Err(HarnessError::InvalidSpec("n_tasks must be at least 1".into()));
        }
        if self.dimension < 2 {
            return Err(HarnessError::InvalidSpec("dimension must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid test spec: {0}")]
    InvalidSpec(String),
    #[error("model id {0} not in the suite")]
    UnknownModel(u32),
    #[error("could not generate a baseline-feasible mission for seed {seed}")]
    MissionGeneration { seed: u64 },
    #[error("campaign file: {0}")]
    Campaign(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Plan(#[from] crate::planner::PlanError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Learn(#[from] crate::learner::LearnError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}
