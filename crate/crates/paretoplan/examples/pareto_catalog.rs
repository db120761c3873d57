//! Prune a configuration space to its Pareto front.
//!
//! Learns discharge and speed models from budget-limited queries against
//! the ground truth, enumerates the full space through the learned pair,
//! and keeps only the configurations where no other is both faster and
//! more frugal — the catalog later handed to the planner.
//!
//! Run with: `cargo run --example pareto_catalog`

use paretoplan::config::{
    generate_model_suite, pareto_optimal_configs, sample_configs, ConfigurationSpace, Sense,
};
use paretoplan::learner::{fit_stepwise, Observation, StepwiseParams};
use paretoplan::sim::{MeteredOracle, QueryBudget};

fn main() {
    let dimension = 14;
    let suite = generate_model_suite(100, dimension, 7);
    let truth = &suite[40];

    // measure 150 configurations through the metered oracle
    let space = ConfigurationSpace::with_dimension(dimension).unwrap();
    let sample = sample_configs(&space, 150, 9).unwrap();
    let mut oracle = MeteredOracle::new(truth, QueryBudget::new(150));
    let mut discharge_obs = Vec::new();
    let mut speed_obs = Vec::new();
    for config in sample {
        let (discharge, speed) = oracle.query_true_power(&config).unwrap();
        discharge_obs.push(Observation::new(config.clone(), discharge));
        speed_obs.push(Observation::new(config, speed));
    }
    println!("queries used: {}/{}", oracle.budget().used, oracle.budget().limit);

    let params = StepwiseParams::default();
    let discharge = fit_stepwise(&discharge_obs, &params).unwrap().model;
    let speed = fit_stepwise(&speed_obs, &params).unwrap().model;

    let front = pareto_optimal_configs(
        &space,
        &[(discharge, Sense::Minimize), (speed, Sense::Maximize)],
        1 << 22,
    )
    .unwrap();

    println!(
        "{} of {} configurations are Pareto-optimal:",
        front.len(),
        1u64 << dimension
    );
    println!("{:<16} {:>12} {:>10}", "configuration", "discharge", "speed");
    for (config, point) in front.iter().take(12) {
        println!("{:<16} {:>12.2} {:>10.3}", config.bit_string(), point.values[0], point.values[1]);
    }
    if front.len() > 12 {
        println!("... and {} more", front.len() - 12);
    }
}
