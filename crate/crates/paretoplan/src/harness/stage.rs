//! Stage execution: deterministic mission, initial-configuration, and
//! perturbation generation from a test spec's seed, then one simulated
//! run per stage (A: unperturbed and unadaptive; B: perturbed and
//! reactive; Challenge: perturbed with learned-model quantitative
//! planning).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adaptation::{
    plan_through_tasks, Knowledge, PlannerSettings, QuantitativeController, ReactiveController,
};
use crate::config::{
    generate_model_suite, sample_configs, ConfigurationSpace, GroundTruthModelPair, Sense,
};
use crate::learner::{fit_stepwise, Observation, StepwiseParams};
use crate::planner::{
    demo_grid, move_cost, rotation_time, CatalogEntry, ConfigCatalog, EnvironmentMap, Heading,
    Instruction, InstructionGraph, PlanningProblem,
};
use crate::sim::{
    run as sim_run, InitialState, MeteredOracle, Mission, NoneController, PerturbationKind,
    PerturbationSchedule, QueryBudget, ScheduledEvent, SimParams, Trace,
};

use super::verdict::{verdict, TripleScores, Validity, Verdict};
use super::{HarnessError, PerturbationClass, TestSpec};

pub const DEFAULT_SUITE_SEED: u64 = 7;
pub const DEFAULT_SUITE_SIZE: usize = 100;

/// The default synthetic suite for a given option dimension.
pub fn default_suite(dimension: usize) -> Vec<GroundTruthModelPair> {
    generate_model_suite(DEFAULT_SUITE_SIZE, dimension, DEFAULT_SUITE_SEED)
}

/// Harness-wide constants. Everything a triple needs beyond its spec.
#[derive(Debug, Clone)]
pub struct HarnessParams {
    /// Battery floor the planner must stay above (mWh).
    pub min_battery: f64,
    /// Reconfiguration budget per planned leg.
    pub max_reconfigs: u32,
    /// Largest catalog handed to the planner; bigger Pareto sets are
    /// downsampled evenly along the speed axis.
    pub catalog_cap: usize,
    /// Reactive threshold as a fraction of battery capacity.
    pub reactive_fraction: f64,
    /// Full-enumeration guard for Pareto extraction.
    pub enum_limit: u64,
    pub sim: SimParams,
}

impl Default for HarnessParams {
    fn default() -> Self {
        Self {
            min_battery: 200.0,
            max_reconfigs: 2,
            catalog_cap: 60,
            reactive_fraction: 0.2,
            enum_limit: 1 << 22,
            sim: SimParams::default(),
        }
    }
}

/// Shared inputs for running triples: the ground-truth suite and the map.
pub struct HarnessContext {
    pub suite: Vec<GroundTruthModelPair>,
    pub map: EnvironmentMap,
    pub params: HarnessParams,
}

impl HarnessContext {
    pub fn new(suite: Vec<GroundTruthModelPair>, map: EnvironmentMap) -> Self {
        Self { suite, map, params: HarnessParams::default() }
    }

    /// Default context: the bundled 4x4 grid and the default suite.
    pub fn default_for_dimension(dimension: usize) -> Self {
        Self::new(default_suite(dimension), demo_grid(4, 4))
    }

    fn truth(&self, id: u32) -> Result<&GroundTruthModelPair, HarnessError> {
        self.suite
            .iter()
            .find(|p| p.id == id)
            .ok_or(HarnessError::UnknownModel(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    A,
    B,
    Challenge,
}

/// Serialized outcome of one stage run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub score: f64,
    pub completed_tasks: usize,
    pub total_tasks: usize,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<String>,
}

/// A stage record together with its in-memory trace.
pub struct StageOutcome {
    pub record: StageRecord,
    pub trace: Option<Trace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleResult {
    pub spec: TestSpec,
    pub a: StageRecord,
    pub b: StageRecord,
    pub challenge: StageRecord,
    pub validity: Validity,
    pub verdict: Verdict,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ salt)
}

const SALT_CONFIG: u64 = 0x11;
const SALT_MISSION: u64 = 0x22;
const SALT_OBSTACLE: u64 = 0x33;
const SALT_BATTERY: u64 = 0x44;
const SALT_LEARN: u64 = 0x55;

/// Deterministic shared setup of a triple: mission, initial state,
/// baseline plan, and the perturbation schedule B and Challenge face.
struct TripleSetup {
    mission: Mission,
    initial: InitialState,
    baseline_plan: InstructionGraph,
    schedule: PerturbationSchedule,
}

/// The factory configuration of the robot for one ground-truth model:
/// the probed config with the median energy-per-meter.
fn pick_initial_config(truth: &GroundTruthModelPair, dimension: usize) -> String {
    let space = ConfigurationSpace::with_dimension(dimension).expect("dimension >= 2");
    let n = 256.min(space.size()) as usize;
    let probes = sample_configs(&space, n, derive_seed(truth.seed, SALT_CONFIG))
        .expect("probe count within space");
    let mut scored: Vec<(f64, String)> = probes
        .iter()
        .map(|c| {
            let rate = truth.discharge_model.evaluate(c).unwrap();
            let speed = truth.speed_model.evaluate(c).unwrap();
            (rate / speed, c.bit_string())
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored[scored.len() / 2].1.clone()
}

/// Shortest-hop moves through the tasks (the static A/B plan).
fn baseline_plan(map: &EnvironmentMap, start: usize, tasks: &[usize]) -> Option<InstructionGraph> {
    crate::adaptation::shortest_hop_plan(map, start, tasks).map(|instructions| InstructionGraph {
        instructions,
        predicted_time: 0.0,
        predicted_energy: 0.0,
    })
}

/// Per-leg timing and energy of a move-only plan under the true models.
struct LegInfo {
    from: usize,
    to: usize,
    /// when the robot starts handling this leg (rotation included after)
    begin_t: f64,
    /// arrival time at `to`
    arrive_t: f64,
    /// continuous true energy of the move
    energy: f64,
}

fn baseline_timeline(
    map: &EnvironmentMap,
    truth: &GroundTruthModelPair,
    initial: &InitialState,
    plan: &InstructionGraph,
) -> Vec<LegInfo> {
    let config = crate::config::Configuration::from_bit_string(&initial.config_id).unwrap();
    let speed = truth.speed_model.evaluate(&config).unwrap();
    let rate = truth.discharge_model.evaluate(&config).unwrap();
    let entry = CatalogEntry { config_id: initial.config_id.clone(), speed, discharge_rate: rate };
    let mut heading = initial.heading;
    let mut at = map.location_index(&initial.location).unwrap();
    let mut t = 0.0;
    let mut legs = Vec::new();
    for instruction in &plan.instructions {
        let Instruction::MoveTo { location } = instruction else { continue };
        let to = map.location_index(location).unwrap();
        let arc = map.arc_between(at, to).unwrap();
        let begin_t = t;
        let cost = move_cost(arc, &entry);
        t += rotation_time(heading, arc.heading) + cost.time_s;
        legs.push(LegInfo { from: at, to, begin_t, arrive_t: t, energy: cost.energy_mwh });
        heading = arc.heading;
        at = to;
    }
    legs
}

fn triple_setup(spec: &TestSpec, ctx: &HarnessContext) -> Result<TripleSetup, HarnessError> {
    spec.validate()?;
    let truth = ctx.truth(spec.power_model_id)?;
    if truth.discharge_model.dimension != spec.dimension {
        return Err(HarnessError::InvalidSpec(format!(
            "spec dimension {} does not match the suite dimension {}",
            spec.dimension, truth.discharge_model.dimension
        )));
    }
    let map = &ctx.map;
    let config_id = pick_initial_config(truth, spec.dimension);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, SALT_MISSION));
    let n_locs = map.locations().len();
    let start = rng.gen_range(0..n_locs);
    let initial = InitialState {
        location: map.location_name(start).to_string(),
        heading: Heading::South,
        battery: ctx.params.sim.max_battery,
        config_id,
    };

    // Draw task sets until the unadaptive baseline completes the mission
    // with battery margin; relax the margin if needed.
    let mut fallback: Option<(Mission, InstructionGraph)> = None;
    let mut chosen: Option<(Mission, InstructionGraph)> = None;
    for _attempt in 0..200 {
        let mut tasks = Vec::with_capacity(spec.n_tasks);
        let mut prev = start;
        for _ in 0..spec.n_tasks {
            let mut t = rng.gen_range(0..n_locs);
            while t == prev {
                t = rng.gen_range(0..n_locs);
            }
            tasks.push(t);
            prev = t;
        }
        let Some(plan) = baseline_plan(map, start, &tasks) else { continue };
        let mission = Mission::new(
            tasks.iter().map(|&t| map.location_name(t).to_string()).collect(),
        );
        let trace = sim_run(
            map,
            truth,
            &mission,
            &initial,
            &ctx.params.sim,
            &PerturbationSchedule::empty(),
            &plan,
            &mut NoneController,
        )?;
        if trace.score >= 1.0 {
            if fallback.is_none() {
                fallback = Some((mission.clone(), plan.clone()));
            }
            if trace.totals.final_battery >= 0.35 * ctx.params.sim.max_battery {
                chosen = Some((mission, plan));
                break;
            }
        }
    }
    let (mission, plan) = chosen
        .or(fallback)
        .ok_or(HarnessError::MissionGeneration { seed: spec.seed })?;

    let legs = baseline_timeline(map, truth, &initial, &plan);
    let schedule = match spec.perturbation_kind {
        PerturbationClass::Obstacle => obstacle_schedule(spec, map, start, &mission, &legs),
        PerturbationClass::Battery => battery_schedule(spec, &legs),
    }?;

    Ok(TripleSetup { mission, initial, baseline_plan: plan, schedule })
}

/// Obstacles go on arcs of the baseline route, before the baseline robot
/// traverses them, and only where an alternative route keeps every task
/// reachable (so an adaptive planner can still succeed).
fn obstacle_schedule(
    spec: &TestSpec,
    map: &EnvironmentMap,
    start: usize,
    mission: &Mission,
    legs: &[LegInfo],
) -> Result<PerturbationSchedule, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, SALT_OBSTACLE));
    let task_ids = mission.resolve(map)?;

    let mut candidates: Vec<&LegInfo> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for leg in legs {
        let key = (leg.from.min(leg.to), leg.from.max(leg.to));
        if seen.insert(key) {
            candidates.push(leg);
        }
    }
    candidates.shuffle(&mut rng);

    let mut probe_map = map.clone();
    let mut events = Vec::new();
    for leg in candidates {
        if events.len() >= spec.n_perturbations {
            break;
        }
        probe_map.block_arc(leg.from, leg.to);
        let reachable = task_ids
            .iter()
            .all(|&t| probe_map.shortest_hop_path(start, t).is_some());
        if !reachable {
            // undoing a single block: rebuild the blocked set without it
            let mut blocked = probe_map.blocked_arcs().clone();
            blocked.remove(&(leg.from, leg.to));
            blocked.remove(&(leg.to, leg.from));
            probe_map.set_blocked(blocked);
            continue;
        }
        let u = rng.gen_range(0.3..0.9);
        events.push(ScheduledEvent {
            t: u * leg.begin_t,
            kind: PerturbationKind::Obstacle {
                arc: (
                    map.location_name(leg.from).to_string(),
                    map.location_name(leg.to).to_string(),
                ),
            },
        });
    }
    Ok(PerturbationSchedule::new(events)?)
}

/// Battery drains hit at mid-route arrivals and set the level to 30-70%
/// of the remaining predicted mission energy: severe enough to threaten
/// the baseline, mild enough that recovery is possible.
fn battery_schedule(
    spec: &TestSpec,
    legs: &[LegInfo],
) -> Result<PerturbationSchedule, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, SALT_BATTERY));
    let total_energy: f64 = legs.iter().map(|l| l.energy).sum();
    let mut remaining = total_energy;
    let mut points = Vec::new(); // (arrival t, remaining energy after this leg)
    for leg in legs {
        remaining -= leg.energy;
        if remaining > 0.0 {
            points.push((leg.arrive_t, remaining));
        }
    }
    points.shuffle(&mut rng);
    let events: Vec<ScheduledEvent> = points
        .into_iter()
        .take(spec.n_perturbations)
        .map(|(t, energy)| {
            let u = rng.gen_range(0.3..0.7);
            ScheduledEvent {
                t: t + 0.25,
                kind: PerturbationKind::SetBattery { level: u * energy },
            }
        })
        .collect();
    Ok(PerturbationSchedule::new(events)?)
}

/// Learns both objectives under the query budget and projects the Pareto
/// set through them into a planner catalog.
fn learn_knowledge(
    spec: &TestSpec,
    ctx: &HarnessContext,
    truth: &GroundTruthModelPair,
    initial_config: &str,
) -> Result<Knowledge, HarnessError> {
    let space = ConfigurationSpace::with_dimension(spec.dimension)?;
    let n = (spec.learning_budget as u128).min(space.size()) as usize;
    let sample = sample_configs(&space, n, derive_seed(spec.seed, SALT_LEARN))?;
    let mut oracle = MeteredOracle::new(truth, QueryBudget::new(spec.learning_budget));
    let mut obs_discharge = Vec::with_capacity(n);
    let mut obs_speed = Vec::with_capacity(n);
    for config in sample {
        let (discharge, speed) = oracle.query_true_power(&config)?;
        obs_discharge.push(Observation::new(config.clone(), discharge));
        obs_speed.push(Observation::new(config, speed));
    }
    let params = StepwiseParams::default();
    let learned_discharge = fit_stepwise(&obs_discharge, &params)?.model;
    let learned_speed = fit_stepwise(&obs_speed, &params)?.model;

    let front = crate::config::pareto_optimal_configs(
        &space,
        &[
            (learned_discharge.clone(), Sense::Minimize),
            (learned_speed.clone(), Sense::Maximize),
        ],
        ctx.params.enum_limit,
    )?;
    let mut entries: Vec<CatalogEntry> = front
        .into_iter()
        .filter_map(|(config, point)| {
            let (discharge, speed) = (point.values[0], point.values[1]);
            (speed > 0.0 && discharge > 0.0).then(|| CatalogEntry {
                config_id: config.bit_string(),
                speed,
                discharge_rate: discharge,
            })
        })
        .collect();
    entries.sort_by(|a, b| a.speed.total_cmp(&b.speed).then(a.config_id.cmp(&b.config_id)));
    let cap = ctx.params.catalog_cap.max(2);
    if entries.len() > cap {
        let picked: Vec<CatalogEntry> = (0..cap)
            .map(|i| entries[i * (entries.len() - 1) / (cap - 1)].clone())
            .collect();
        entries = picked;
        entries.dedup_by(|a, b| a.config_id == b.config_id);
    }

    let settings = PlannerSettings {
        min_battery: ctx.params.min_battery,
        max_battery: ctx.params.sim.max_battery,
        max_reconfigs: ctx.params.max_reconfigs,
        charge_rate: ctx.params.sim.charge_rate,
    };
    let mut knowledge = Knowledge {
        learned_discharge,
        learned_speed,
        catalog: ConfigCatalog::new(vec![CatalogEntry {
            config_id: initial_config.to_string(),
            speed: 1.0,
            discharge_rate: 1.0,
        }])
        .expect("placeholder catalog"),
        settings,
    };
    if entries.is_empty() {
        entries.push(knowledge.entry_for(initial_config));
    }
    knowledge.catalog = ConfigCatalog::new(entries)
        .map_err(HarnessError::Plan)?;
    Ok(knowledge)
}

fn run_stage_inner(
    spec: &TestSpec,
    stage: Stage,
    ctx: &HarnessContext,
) -> Result<Trace, HarnessError> {
    let truth = ctx.truth(spec.power_model_id)?;
    let setup = triple_setup(spec, ctx)?;
    let empty = PerturbationSchedule::empty();
    let (schedule, plan): (&PerturbationSchedule, InstructionGraph) = match stage {
        Stage::A | Stage::B => {
            let schedule = if stage == Stage::A { &empty } else { &setup.schedule };
            (schedule, setup.baseline_plan.clone())
        }
        Stage::Challenge => {
            let knowledge = learn_knowledge(spec, ctx, truth, &setup.initial.config_id)?;
            let base = PlanningProblem {
                map: ctx.map.clone(),
                catalog: knowledge.catalog_with(&setup.initial.config_id),
                start: setup.initial.location.clone(),
                initial_heading: setup.initial.heading,
                initial_config: setup.initial.config_id.clone(),
                initial_battery: setup.initial.battery,
                max_battery: ctx.params.sim.max_battery,
                min_battery: ctx.params.min_battery,
                target: setup.initial.location.clone(),
                max_reconfigs: ctx.params.max_reconfigs,
                charge_rate: ctx.params.sim.charge_rate,
            };
            let initial_plan =
                plan_through_tasks(&base, &setup.mission.tasks).unwrap_or_else(|_| {
                    // start unplanned; the controller raises a finding and
                    // tries again from the live state
                    InstructionGraph::empty()
                });
            let mut controller = QuantitativeController::new(knowledge);
            let trace = sim_run(
                &ctx.map,
                truth,
                &setup.mission,
                &setup.initial,
                &ctx.params.sim,
                &setup.schedule,
                &initial_plan,
                &mut controller,
            )?;
            return Ok(trace);
        }
    };
    let trace = match stage {
        Stage::A => sim_run(
            &ctx.map,
            truth,
            &setup.mission,
            &setup.initial,
            &ctx.params.sim,
            schedule,
            &plan,
            &mut NoneController,
        )?,
        Stage::B => {
            let threshold = ctx.params.reactive_fraction * ctx.params.sim.max_battery;
            let mut controller = ReactiveController::new(threshold);
            sim_run(
                &ctx.map,
                truth,
                &setup.mission,
                &setup.initial,
                &ctx.params.sim,
                schedule,
                &plan,
                &mut controller,
            )?
        }
        Stage::Challenge => unreachable!(),
    };
    Ok(trace)
}

/// Runs one stage, never panicking outward: infrastructure failures land
/// in the record's error field.
pub fn run_stage(spec: &TestSpec, stage: Stage, ctx: &HarnessContext) -> StageOutcome {
    let started = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| run_stage_inner(spec, stage, ctx)));
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(Ok(trace)) => StageOutcome {
            record: StageRecord {
                stage,
                score: trace.score,
                completed_tasks: trace.completed_tasks,
                total_tasks: trace.total_tasks,
                wall_time_ms,
                error: None,
                trace_path: None,
            },
            trace: Some(trace),
        },
        Ok(Err(e)) => StageOutcome {
            record: StageRecord {
                stage,
                score: 0.0,
                completed_tasks: 0,
                total_tasks: 0,
                wall_time_ms,
                error: Some(e.to_string()),
                trace_path: None,
            },
            trace: None,
        },
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "opaque panic".into());
            StageOutcome {
                record: StageRecord {
                    stage,
                    score: 0.0,
                    completed_tasks: 0,
                    total_tasks: 0,
                    wall_time_ms,
                    error: Some(format!("panic: {msg}")),
                    trace_path: None,
                },
                trace: None,
            }
        }
    }
}

/// Runs the three stages of one spec and assigns the verdict. When
/// `trace_dir` is given, stage traces are written there as JSONL.
pub fn run_triple(spec: &TestSpec, ctx: &HarnessContext, trace_dir: Option<&Path>) -> TripleResult {
    let mut outcomes = [Stage::A, Stage::B, Stage::Challenge]
        .map(|stage| run_stage(spec, stage, ctx));
    if let Some(dir) = trace_dir {
        for outcome in &mut outcomes {
            if let Some(trace) = &outcome.trace {
                let name = format!(
                    "seed{}_model{}_{:?}.jsonl",
                    spec.seed, spec.power_model_id, outcome.record.stage
                )
                .to_lowercase();
                let path = dir.join(name);
                if std::fs::write(&path, trace.to_jsonl()).is_ok() {
                    outcome.record.trace_path = Some(path.display().to_string());
                }
            }
        }
    }
    let [a, b, challenge] = outcomes;
    let scores = TripleScores {
        score_a: a.record.score,
        score_b: b.record.score,
        score_c: challenge.record.score,
        error_a: a.record.error.is_some(),
        error_b: b.record.error.is_some(),
        error_c: challenge.record.error.is_some(),
    };
    let (validity, verdict) = verdict(&scores);
    TripleResult {
        spec: spec.clone(),
        a: a.record,
        b: b.record,
        challenge: challenge.record,
        validity,
        verdict,
    }
}
