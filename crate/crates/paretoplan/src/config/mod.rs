//! Binary configuration spaces, performance-influence models, synthetic
//! ground-truth suites, and Pareto-front extraction.

mod model;
mod pareto;
mod space;
mod suite;

pub use model::{InfluenceModel, Term};
pub use pareto::{pareto_front, pareto_optimal_configs, ObjectivePoint, Sense};
pub use space::{sample_configs, Configuration, ConfigurationSpace};
pub use suite::{
    class_quotas, complexity_class, generate_model_suite, generate_model_suite_with, Complexity,
    GroundTruthModelPair, SuiteParams,
};

use thiserror::Error;

/// Errors raised by configuration-space and model operations.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("dimension mismatch: model expects {expected} options, configuration has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("configuration space must have at least one option")]
    EmptySpace,
    #[error("duplicate option name: {0}")]
    DuplicateOption(String),
    #[error("term option index {index} out of range for dimension {dimension}")]
    TermIndexOutOfRange { index: usize, dimension: usize },
    #[error("term with empty option set (the intercept is stored separately)")]
    EmptyTerm,
    #[error("duplicate term over options {0:?}")]
    DuplicateTerm(Vec<usize>),
    #[error("cannot sample {requested} distinct configurations from a space of {available}")]
    SampleTooLarge { requested: u128, available: u128 },
    #[error("enumeration of 2^{dimension} configurations exceeds the limit {limit}")]
    EnumerationTooLarge { dimension: usize, limit: u64 },
    #[error("objective point arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("invalid bit character {0:?} in configuration string")]
    InvalidBitChar(char),
}
