//! Synthesize a minimum-time, battery-feasible plan.
//!
//! Builds the bundled five-location demo map and a two-entry catalog,
//! asks for the fastest way from l1 to l5 under a tight battery, and
//! replays the plan to show the predicted battery trace. Also writes the
//! map, catalog, and plan files in the formats the CLI consumes.
//!
//! Run with: `cargo run --example plan_mission`

use paretoplan::planner::{
    demo_map, plan_totals, synthesize, CatalogEntry, ConfigCatalog, Heading, PlanningProblem,
};

fn main() {
    let catalog = ConfigCatalog::new(vec![
        CatalogEntry { config_id: "half".into(), speed: 0.58333, discharge_rate: 41.65 },
        CatalogEntry { config_id: "full".into(), speed: 1.1333, discharge_rate: 84.0 },
    ])
    .unwrap();
    let problem = PlanningProblem {
        map: demo_map(),
        catalog,
        start: "l1".into(),
        initial_heading: Heading::South,
        initial_config: "half".into(),
        initial_battery: 1_100.0,
        max_battery: 32_560.0,
        min_battery: 100.0,
        target: "l5".into(),
        max_reconfigs: 2,
        charge_rate: 50.0,
    };

    let plan = synthesize(&problem).expect("the demo mission is feasible");
    println!(
        "{} instructions, predicted {:.3} s and {:.0} mWh:",
        plan.len(),
        plan.predicted_time,
        plan.predicted_energy
    );
    for instruction in &plan.instructions {
        println!("  {instruction:?}");
    }

    let totals = plan_totals(&plan, &problem).unwrap();
    println!("battery trace (mWh): {:?}", totals.battery_trace);

    let dir = std::env::temp_dir().join("paretoplan_demo");
    std::fs::create_dir_all(&dir).unwrap();
    let map_path = dir.join("map.json");
    let catalog_path = dir.join("catalog.json");
    let plan_path = dir.join("plan.json");
    std::fs::write(&map_path, serde_json::to_string_pretty(&problem.map.to_map_file()).unwrap())
        .unwrap();
    std::fs::write(&catalog_path, serde_json::to_string_pretty(&problem.catalog).unwrap())
        .unwrap();
    std::fs::write(&plan_path, serde_json::to_string_pretty(&plan).unwrap()).unwrap();
    println!("wrote {}, {}, {}", map_path.display(), catalog_path.display(), plan_path.display());
}
