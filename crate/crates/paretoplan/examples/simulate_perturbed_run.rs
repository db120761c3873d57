//! Execute an instruction graph against ground truth with perturbations.
//!
//! Runs a fixed three-leg mission while an obstacle appears on the second
//! corridor mid-run, and prints the resulting event trace in the JSONL
//! format the CLI writes.
//!
//! Run with: `cargo run --example simulate_perturbed_run`

use paretoplan::config::{Complexity, GroundTruthModelPair, InfluenceModel};
use paretoplan::planner::{demo_map, Instruction, InstructionGraph};
use paretoplan::sim::{
    run, InitialState, Mission, NoneController, PerturbationKind, PerturbationSchedule,
    ScheduledEvent, SimParams,
};

fn main() {
    // constant dynamics: 41.65 mWh/s at 0.58333 m/s in every configuration
    let truth = GroundTruthModelPair {
        id: 0,
        discharge_model: InfluenceModel::intercept_only(2, 41.65),
        speed_model: InfluenceModel::intercept_only(2, 0.58333),
        complexity: Complexity::Easy,
        seed: 0,
    };
    let map = demo_map();
    let mission = Mission::new(vec!["l2".into(), "l5".into()]);
    let plan = InstructionGraph {
        instructions: vec![
            Instruction::MoveTo { location: "l2".into() },
            Instruction::MoveTo { location: "l5".into() },
        ],
        predicted_time: 0.0,
        predicted_energy: 0.0,
    };
    let schedule = PerturbationSchedule::new(vec![ScheduledEvent {
        t: 10.0,
        kind: PerturbationKind::Obstacle { arc: ("l2".into(), "l5".into()) },
    }])
    .unwrap();
    let initial = InitialState {
        location: "l1".into(),
        heading: paretoplan::planner::Heading::South,
        battery: 32_560.0,
        config_id: "00".into(),
    };

    let trace = run(
        &map,
        &truth,
        &mission,
        &initial,
        &SimParams::default(),
        &schedule,
        &plan,
        &mut NoneController,
    )
    .unwrap();

    println!("score {:.2} ({}/{} tasks)", trace.score, trace.completed_tasks, trace.total_tasks);
    println!(
        "energy: drained {:.1} mWh, final battery {:.1} mWh",
        trace.totals.drained, trace.totals.final_battery
    );
    println!("--- trace (JSONL) ---");
    print!("{}", trace.to_jsonl());
}
