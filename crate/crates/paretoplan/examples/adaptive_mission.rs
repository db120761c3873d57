//! A full test triple: Baseline A, Baseline B, and the Challenge stage.
//!
//! The same seeded mission runs three times on the 4x4 grid: unperturbed
//! without adaptation, perturbed with reactive charging only, and
//! perturbed with the MAPE loop replanning over the learned Pareto
//! catalog. The verdict grades the Challenge against the baselines.
//!
//! Run with: `cargo run --release --example adaptive_mission`

use paretoplan::harness::{run_triple, HarnessContext, PerturbationClass, TestSpec};

fn main() {
    let spec = TestSpec {
        seed: 1,
        n_tasks: 3,
        power_model_id: 5,
        learning_budget: 120,
        perturbation_kind: PerturbationClass::Obstacle,
        n_perturbations: 2,
        map_file: None,
        dimension: 12,
    };
    let ctx = HarnessContext::default_for_dimension(spec.dimension);

    println!(
        "spec: seed {}, {} tasks, model #{}, budget {}, {:?} x{}",
        spec.seed,
        spec.n_tasks,
        spec.power_model_id,
        spec.learning_budget,
        spec.perturbation_kind,
        spec.n_perturbations
    );
    let result = run_triple(&spec, &ctx, None);

    for record in [&result.a, &result.b, &result.challenge] {
        println!(
            "{:<10?} score {:.3} ({}/{}) in {:>8.1} ms{}",
            record.stage,
            record.score,
            record.completed_tasks,
            record.total_tasks,
            record.wall_time_ms,
            record.error.as_deref().map(|e| format!("  error: {e}")).unwrap_or_default()
        );
    }
    println!("validity {:?}, verdict {:?}", result.validity, result.verdict);
}
