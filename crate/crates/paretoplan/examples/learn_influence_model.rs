//! Learn a performance-influence model from a handful of measurements.
//!
//! Draws a synthetic ground-truth power model, samples 100 random
//! configurations, fits a stepwise regression and a CART baseline on the
//! same data, and compares their held-out accuracy.
//!
//! Run with: `cargo run --example learn_influence_model`

use paretoplan::config::{generate_model_suite, sample_configs, ConfigurationSpace};
use paretoplan::learner::{
    fit_cart, fit_stepwise, mean_abs_pct_error, spearman, CartParams, Observation, StepwiseParams,
};

fn main() {
    let dimension = 20;
    let suite = generate_model_suite(100, dimension, 7);
    // a Hard model: 15+ interaction terms
    let truth = suite.iter().find(|p| p.id == 80).unwrap();
    println!(
        "ground truth #{}: {:?}, {} terms ({} interactions)",
        truth.id,
        truth.complexity,
        truth.discharge_model.terms.len(),
        truth.discharge_model.interaction_count(),
    );

    let space = ConfigurationSpace::with_dimension(dimension).unwrap();
    let train = sample_configs(&space, 100, 42).unwrap();
    let observations: Vec<Observation> = train
        .into_iter()
        .map(|c| {
            let value = truth.discharge_model.evaluate(&c).unwrap();
            Observation::new(c, value)
        })
        .collect();

    let fit = fit_stepwise(&observations, &StepwiseParams::default()).unwrap();
    println!(
        "stepwise selected {} terms in {} steps, rss {:.3e}",
        fit.model.terms.len(),
        fit.iterations,
        fit.rss
    );
    let cart = fit_cart(&observations, &CartParams::default()).unwrap();

    let held_out = sample_configs(&space, 10_000, 4711).unwrap();
    let stepwise_mape = mean_abs_pct_error(&fit.model, &truth.discharge_model, &held_out).unwrap();
    let cart_mape = mean_abs_pct_error(&cart, &truth.discharge_model, &held_out).unwrap();

    let truth_values: Vec<f64> = held_out
        .iter()
        .map(|c| truth.discharge_model.evaluate(c).unwrap())
        .collect();
    let predicted: Vec<f64> = held_out.iter().map(|c| fit.model.evaluate(c).unwrap()).collect();
    let rank = spearman(&truth_values, &predicted).unwrap();

    println!("held-out MAPE: stepwise {:.4}%, CART {:.2}%", stepwise_mape.percent, cart_mape.percent);
    println!("Spearman rank correlation (stepwise vs truth): {rank:.6}");
    for term in fit.model.terms.iter().take(5) {
        println!("  term {:?} -> {:+.3}", term.options, term.coef);
    }
}
