//! How synthesis time scales with catalog size and reconfiguration
//! budget: the reason the planner is fed a pruned Pareto catalog rather
//! than the whole configuration space.
//!
//! Run with: `cargo run --release --example planning_scaling`

use std::time::Duration;

use paretoplan::harness::{planning_benchmark, render_csv, BenchParams};

fn main() {
    let params = BenchParams {
        seed: 1,
        repetitions: 3,
        time_limit: Duration::from_secs(60),
        ..BenchParams::default()
    };
    let records =
        planning_benchmark(&[10, 60, 120], &[1, 2], None, &params).expect("benchmark runs");
    print!("{}", render_csv(&records, &params));
}
