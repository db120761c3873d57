//! Mission planning: environment maps, configuration catalogs, the
//! guarded-command planning model and its text format, minimum-time plan
//! synthesis, and plan replay.

mod catalog;
mod instruction;
pub mod map;
mod problem;
mod synthesize;
pub mod text;
mod translate;

pub use catalog::{move_cost, move_energy_mwh, CatalogEntry, ConfigCatalog, MoveCost};
pub use instruction::{plan_totals, Instruction, InstructionGraph, PlanTotals};
pub use map::{demo_grid, demo_map, rotation_time, EnvironmentMap, Heading, Location, MapArc, MapFile};
pub use problem::{PlanningProblem, ProblemSpec, DEFAULT_CHARGE_RATE, DEFAULT_MAX_BATTERY};
pub use synthesize::{synthesize, synthesize_with_deadline};
pub use text::{parse_model, serialize_model, PlanningModel};
pub use translate::translate;

use thiserror::Error;

/// Errors raised by planning operations. `NoFeasiblePlan` is the expected
/// outcome for unreachable or battery-infeasible missions, distinct from
/// malformed inputs.
#[derive(Debug, Error)]
pub enum PlanError {
    #[error("no feasible plan: the target is unreachable under the battery and obstacle constraints")]
    NoFeasiblePlan,
    #[error("synthesis interrupted by deadline")]
    Interrupted,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("semantic error: {0}")]
    Semantic(String),
}
