//! Learn–prune–plan–adapt toolkit for highly configurable robots.
//!
//! The crate is organised as a pipeline:
//!
//! 1. [`config`] — binary configuration spaces, performance-influence
//!    models, synthetic ground-truth model suites, and Pareto-front
//!    extraction.
//! 2. [`learner`] — stepwise linear regression with F-test term
//!    selection, a CART regression-tree baseline, and evaluation
//!    metrics (MAPE, Spearman rank correlation).
//! 3. [`planner`] — aggregates an environment map, a configuration
//!    catalog, and mission parameters into a planning model; serializes
//!    it in a guarded-command text format; synthesizes minimum-time,
//!    battery-feasible plans.
//! 4. [`sim`] — deterministic discrete-event execution of instruction
//!    graphs against ground-truth models, with battery and obstacle
//!    perturbations and budget-metered power-model queries.
//! 5. [`adaptation`] — a MAPE-K loop tying monitoring probes to
//!    analyzers, the planner, or a threshold-based reactive policy.
//! 6. [`harness`] — batch runner for A/B/Challenge test triples,
//!    verdict assignment, campaign persistence, and the planning-time
//!    scaling benchmark.
//!
//! Each major capability has a runnable example under `examples/`; the
//! `paretoplan` binary is a thin subcommand wrapper over the same
//! library calls.

pub mod adaptation;
pub mod config;
pub mod harness;
pub mod learner;
pub mod planner;
pub mod sim;
