//! Deterministic discrete-event execution of instruction graphs against
//! ground-truth models, with battery and obstacle perturbations and
//! budget-metered power-model queries.

mod budget;
mod run;
mod schedule;
mod world;

pub use budget::{MeteredOracle, NoiseParams, QueryBudget};
pub use run::{
    run, ControlOutput, InitialState, MissionController, MissionSim, NoneController, SimParams,
    WorldView,
};
pub use schedule::{PerturbationKind, PerturbationSchedule, ScheduledEvent};
pub use world::{
    mission_score, EnergyTotals, EventKind, InstructionStatus, Mission, Position, Trace,
    TraceEvent,
};

use thiserror::Error;

/// Errors raised by simulation operations.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("query budget exhausted ({limit} queries)")]
    BudgetExhausted { limit: u32 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid mission: {0}")]
    InvalidMission(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}
