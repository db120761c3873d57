//! World-state types, the event trace, and mission scoring.

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::planner::EnvironmentMap;

/// Where the robot is: at a node or partway along a directed arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Position {
    Node { location: usize },
    Arc { from: usize, to: usize, progress_m: f64 },
}

impl Position {
    pub fn node(&self) -> Option<usize> {
        match self {
            Position::Node { location } => Some(*location),
            Position::Arc { .. } => None,
        }
    }
}

/// Status of the most recent instruction handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstructionStatus {
    Idle,
    Rotating,
    Moving,
    Charging,
    ObstacleDetected,
    Rejected,
    Done,
}

impl InstructionStatus {
    pub fn is_failure(self) -> bool {
        matches!(self, InstructionStatus::ObstacleDetected | InstructionStatus::Rejected)
    }
}

/// An ordered list of task locations the robot must visit in sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mission {
    pub tasks: Vec<String>,
}

impl Mission {
    pub fn new(tasks: Vec<String>) -> Self {
        Self { tasks }
    }

    pub fn resolve(&self, map: &EnvironmentMap) -> Result<Vec<usize>, SimError> {
        self.tasks
            .iter()
            .map(|name| {
                map.location_index(name)
                    .ok_or_else(|| SimError::InvalidMission(format!("unknown task location {name:?}")))
            })
            .collect()
    }
}

/// One trace line. Serialized to JSONL with a monotone `t` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Start { location: String, battery: f64, config: String },
    PerturbationApplied { description: String },
    ObstacleDetected { from: String, to: String },
    InstructionRejected { reason: String },
    Arrived { from: String, location: String },
    TaskCompleted { location: String, index: usize },
    ConfigChanged { config: String },
    ChargeStarted { to_level: f64 },
    ChargeCompleted { level: f64 },
    FindingRaised { finding: String, detail: String },
    PlanInstalled { instructions: usize, reason: String },
    PlanRejected { reason: String },
    BatteryDepleted,
    Stalled { awaiting_secs: f64 },
    MissionCompleted,
    RunEnded { score: f64, completed: usize, total: usize },
}

/// Energy bookkeeping over a whole run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTotals {
    pub initial_battery: f64,
    pub final_battery: f64,
    pub drained: f64,
    pub charged: f64,
    /// Net effect of battery perturbations (set-battery jumps).
    pub perturbation_delta: f64,
}

/// The full record of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub score: f64,
    pub completed_tasks: usize,
    pub total_tasks: usize,
    pub totals: EnergyTotals,
}

impl Trace {
    /// One JSON object per line, events only.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Vec<TraceEvent>, serde_json::Error> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect()
    }

    pub fn count(&self, pred: impl Fn(&EventKind) -> bool) -> usize {
        self.events.iter().filter(|e| pred(&e.kind)).count()
    }
}

/// Fraction of mission tasks hit in order: a task counts when the robot
/// enters its location while it is the next pending task (the starting
/// location counts for leading tasks). Out-of-order visits do not count
/// until the pending pointer catches up. An empty mission scores 1.0.
pub fn mission_score(events: &[TraceEvent], mission: &Mission) -> f64 {
    if mission.tasks.is_empty() {
        return 1.0;
    }
    let mut pending = 0usize;
    let mut visit = |location: &str| {
        while pending < mission.tasks.len() && mission.tasks[pending] == location {
            pending += 1;
        }
    };
    for event in events {
        match &event.kind {
            EventKind::Start { location, .. } => visit(location),
            EventKind::Arrived { location, .. } => visit(location),
            _ => {}
        }
    }
    pending as f64 / mission.tasks.len() as f64
}
