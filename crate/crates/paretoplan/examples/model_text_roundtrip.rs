//! The guarded-command planning-model text format.
//!
//! Translates a small planning problem into its product model, prints the
//! text serialization, parses it back (structural identity), and shows
//! the positioned errors malformed input produces.
//!
//! Run with: `cargo run --example model_text_roundtrip`

use paretoplan::planner::{
    demo_map, parse_model, serialize_model, translate, CatalogEntry, ConfigCatalog, Heading,
    PlanningProblem,
};

fn main() {
    let problem = PlanningProblem {
        map: demo_map(),
        catalog: ConfigCatalog::new(vec![
            CatalogEntry { config_id: "half".into(), speed: 0.58333, discharge_rate: 41.65 },
            CatalogEntry { config_id: "full".into(), speed: 1.1333, discharge_rate: 84.0 },
        ])
        .unwrap(),
        start: "l1".into(),
        initial_heading: Heading::South,
        initial_config: "half".into(),
        initial_battery: 32_560.0,
        max_battery: 32_560.0,
        min_battery: 200.0,
        target: "l5".into(),
        max_reconfigs: 1,
        charge_rate: 50.0,
    };

    let model = translate(&problem).unwrap();
    println!(
        "product state space: {} states, {} commands",
        model.state_space_size(),
        model.commands.len()
    );
    let text = serialize_model(&model);
    for line in text.lines().take(8) {
        println!("| {line}");
    }
    println!("| ... ({} lines total)", text.lines().count());

    let parsed = parse_model(&text).unwrap();
    assert_eq!(parsed, model);
    println!("parse(serialize(model)) is structurally identical");

    for bad in [
        "module m\nx:[0..1] init 0;\n",                        // missing endmodule
        "module m\nx:[0..oops] init 0;\nendmodule",            // bad range bound
        "module m\nx:[0..1] init 0;\n[go] (y=1) -> (x'=1);\nendmodule\nrewards \"t\"\nendrewards", // undeclared y
    ] {
        let err = parse_model(bad).unwrap_err();
        println!("rejected: {err}");
    }
}
