//! Planning-time scaling benchmark: synthesis wall time as a function of
//! catalog size and reconfiguration budget on the bundled demo map.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::planner::{
    demo_map, synthesize_with_deadline, CatalogEntry, ConfigCatalog, EnvironmentMap, Heading,
    PlanError, PlanningProblem,
};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchOutcome {
    Solved,
    Timeout,
    OutOfMemory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n_configs: usize,
    pub reconfig_budget: u32,
    /// Median over the repetition runs; for timeouts, the limit itself.
    pub wall_time_ms: f64,
    pub outcome: BenchOutcome,
}

#[derive(Debug, Clone)]
pub struct BenchParams {
    pub seed: u64,
    /// Pool size the catalogs are sampled from.
    pub pool_size: usize,
    /// Timed repetitions per (n, k) cell; the median is reported.
    pub repetitions: usize,
    pub time_limit: Duration,
    /// Free-form note recorded in the output header.
    pub memory_note: String,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self {
            seed: 1,
            pool_size: 256,
            repetitions: 5,
            time_limit: Duration::from_secs(60),
            memory_note: "in-process search, no external memory cap".into(),
        }
    }
}

/// A synthetic pool of mutually non-dominated catalog entries: speeds
/// ascend with discharge rates, so every prefix sample is a plausible
/// Pareto set.
pub fn synthetic_pareto_pool(size: usize, seed: u64) -> Vec<CatalogEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rate = 30.0;
    (0..size)
        .map(|i| {
            let f = i as f64 / (size.max(2) - 1) as f64;
            let speed = 0.3 + 1.2 * f;
            rate += rng.gen_range(0.5..4.0) + 460.0 / size as f64 * rng.gen_range(0.2..1.0);
            CatalogEntry { config_id: format!("p{i:04}"), speed, discharge_rate: rate }
        })
        .collect()
}

fn evenly_spaced(pool: &[CatalogEntry], n: usize) -> Vec<CatalogEntry> {
    assert!(n >= 1 && n <= pool.len());
    if n == 1 {
        return vec![pool[pool.len() / 2].clone()];
    }
    (0..n).map(|i| pool[i * (pool.len() - 1) / (n - 1)].clone()).collect()
}

fn bench_problem(map: &EnvironmentMap, catalog: ConfigCatalog, budget: u32) -> PlanningProblem {
    let mid = catalog.entries()[catalog.len() / 2].config_id.clone();
    PlanningProblem {
        map: map.clone(),
        catalog,
        start: "l1".into(),
        initial_heading: Heading::South,
        initial_config: mid,
        initial_battery: 32_560.0,
        max_battery: 32_560.0,
        min_battery: 200.0,
        target: "l5".into(),
        max_reconfigs: budget,
        charge_rate: 50.0,
    }
}

/// Times synthesis for every (catalog size, reconfiguration budget) cell.
/// Wall time is measured with a monotonic clock around synthesis only
/// (model translation and I/O excluded); a run that exceeds the limit is
/// recorded as a timeout, not a failure.
pub fn planning_benchmark(
    config_counts: &[usize],
    reconfig_budgets: &[u32],
    map: Option<&EnvironmentMap>,
    params: &BenchParams,
) -> Result<Vec<BenchRecord>, HarnessError> {
    let default_map = demo_map();
    let map = map.unwrap_or(&default_map);
    let pool_size = params.pool_size.max(config_counts.iter().copied().max().unwrap_or(1));
    let pool = synthetic_pareto_pool(pool_size, params.seed);
    let mut records = Vec::new();
    for &n in config_counts {
        if n < 1 || n > pool.len() {
            return Err(HarnessError::InvalidSpec(format!(
                "benchmark catalog size {n} outside 1..={}",
                pool.len()
            )));
        }
        for &k in reconfig_budgets {
            let catalog = ConfigCatalog::new(evenly_spaced(&pool, n))?;
            let problem = bench_problem(map, catalog, k);
            let mut times = Vec::with_capacity(params.repetitions);
            let mut outcome = BenchOutcome::Solved;
            for _ in 0..params.repetitions.max(1) {
                let deadline = Instant::now() + params.time_limit;
                let started = Instant::now();
                match synthesize_with_deadline(&problem, Some(deadline)) {
                    Ok(_) => times.push(started.elapsed().as_secs_f64() * 1e3),
                    Err(PlanError::Interrupted) => {
                        outcome = BenchOutcome::Timeout;
                        times.push(params.time_limit.as_secs_f64() * 1e3);
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            times.sort_by(f64::total_cmp);
            let median = times[times.len() / 2];
            records.push(BenchRecord {
                n_configs: n,
                reconfig_budget: k,
                wall_time_ms: median,
                outcome,
            });
        }
    }
    Ok(records)
}

/// CSV rendering with the measurement-policy header.
pub fn render_csv(records: &[BenchRecord], params: &BenchParams) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    writeln!(out, "# wall time: monotonic clock around synthesis only (translation and I/O excluded)").unwrap();
    writeln!(out, "# memory: {}", params.memory_note).unwrap();
    writeln!(out, "n_configs,reconfig_budget,median_ms,outcome").unwrap();
    for r in records {
        writeln!(
            out,
            "{},{},{:.3},{}",
            r.n_configs,
            r.reconfig_budget,
            r.wall_time_ms,
            match r.outcome {
                BenchOutcome::Solved => "solved",
                BenchOutcome::Timeout => "timeout",
                BenchOutcome::OutOfMemory => "out_of_memory",
            }
        )
        .unwrap();
    }
    out
}
