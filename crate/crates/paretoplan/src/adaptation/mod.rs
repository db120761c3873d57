//! The MAPE-K loop: monitoring records from probes, analyzers that decide
//! whether the mission is still on track and energetically feasible, and
//! controllers that swap instruction graphs in response (reactive
//! battery-threshold diversion, or full quantitative replanning over the
//! learned models).

mod analyzers;
mod controllers;

pub use analyzers::{energy_predictor, mission_analyzer, Knowledge, PlannerSettings};
pub use controllers::{
    plan_through_tasks, reactive_policy, shortest_hop_plan, QuantitativeController,
    ReactiveController,
};

use serde::{Deserialize, Serialize};

use crate::planner::Heading;
use crate::sim::{InstructionStatus, Position};

/// One probe sample of the running robot.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRecord {
    pub t: f64,
    pub position: Position,
    pub heading: Heading,
    pub battery: f64,
    pub config_id: String,
    pub last_status: InstructionStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FindingKind {
    Nominal,
    MissionOffTrack,
    EnergyInsufficient,
}

/// Analyzer output: one finding per analyzer per record.
#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub kind: FindingKind,
    pub detail: String,
}

impl Finding {
    pub fn nominal() -> Self {
        Self { kind: FindingKind::Nominal, detail: String::new() }
    }

    pub fn is_nominal(&self) -> bool {
        self.kind == FindingKind::Nominal
    }
}

/// How a mission run responds to findings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AdaptationMode {
    /// Baseline A: the instruction stream is never modified.
    None,
    /// Baseline B: threshold-based diversion to the nearest charger.
    Reactive { threshold: f64 },
    /// Challenge: analyzers plus quantitative replanning.
    Quantitative,
}
