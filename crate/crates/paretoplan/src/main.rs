//! Thin subcommand wrapper over the library. Each subcommand reads and
//! writes the documented JSON/JSONL/CSV formats; all randomness is
//! seed-driven so identical invocations produce identical outputs.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use paretoplan::config::{
    generate_model_suite, pareto_optimal_configs, ConfigurationSpace, GroundTruthModelPair,
    InfluenceModel, Sense,
};
use paretoplan::harness::{
    planning_benchmark, render_csv, run_campaign, run_triple, BenchParams, HarnessContext,
    TestSpec,
};
use paretoplan::learner::{fit_stepwise, parse_observations_csv, FitResult, StepwiseParams};
use paretoplan::planner::{
    demo_grid, parse_model, serialize_model, synthesize, translate, CatalogEntry, ConfigCatalog,
    EnvironmentMap, Heading, InstructionGraph, MapFile, PlanError, PlanningProblem,
};
use paretoplan::sim::{
    run as sim_run, InitialState, Mission, NoneController, PerturbationSchedule, SimParams,
};

#[derive(Parser)]
#[command(
    name = "paretoplan",
    version,
    about = "Learn influence models, prune to a Pareto catalog, plan battery-feasible missions, and evaluate adaptation under perturbations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic ground-truth model suite (JSON array)
    GenModels {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 20)]
        dimension: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an influence model to `bit-string,value` CSV observations
    Learn {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        entry_p: f64,
        #[arg(long, default_value_t = 0.05)]
        exit_p: f64,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the Pareto-optimal configurations of a model pair
    Pareto {
        /// Suite file plus --model-id selects a ground-truth pair
        #[arg(long, requires = "model_id", conflicts_with_all = ["discharge", "speed"])]
        models: Option<PathBuf>,
        #[arg(long)]
        model_id: Option<u32>,
        /// Learned discharge model (fit JSON or bare model JSON)
        #[arg(long, requires = "speed")]
        discharge: Option<PathBuf>,
        /// Learned speed model (fit JSON or bare model JSON)
        #[arg(long)]
        speed: Option<PathBuf>,
        #[arg(long, default_value_t = 1 << 22)]
        enum_limit: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize a minimum-time battery-feasible plan (exit 3 when none exists)
    Plan {
        #[arg(long)]
        map: PathBuf,
        /// Catalog JSON: array of {config_id, speed, discharge_rate}
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "south")]
        heading: String,
        /// Initial configuration id (must be in the catalog)
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 32_560.0)]
        battery: f64,
        #[arg(long, default_value_t = 32_560.0)]
        max_battery: f64,
        #[arg(long, default_value_t = 200.0)]
        min_battery: f64,
        #[arg(long, default_value_t = 2)]
        max_reconfigs: u32,
        #[arg(long, default_value_t = 50.0)]
        charge_rate: f64,
        /// Also write the guarded-command planning model text here
        #[arg(long)]
        emit_model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a plan against a ground-truth model under perturbations
    Simulate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        model_id: u32,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long)]
        start: String,
        #[arg(long, default_value = "south")]
        heading: String,
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 32_560.0)]
        battery: f64,
        /// Ordered task locations, comma separated
        #[arg(long, value_delimiter = ',')]
        tasks: Vec<String>,
        /// Trace output (JSONL)
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one Baseline A / Baseline B / Challenge triple
    Triple {
        /// TestSpec JSON file
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a campaign of triples, appending JSONL results crash-safely
    Campaign {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Planning-time scaling benchmark (CSV)
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "10,60,120,180")]
        counts: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        budgets: Vec<u32>,
        #[arg(long, default_value_t = 60)]
        time_limit_secs: u64,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_heading(s: &str) -> Result<Heading, String> {
    Ok(match s.to_ascii_lowercase().as_str() {
        "north" | "n" => Heading::North,
        "northeast" | "ne" => Heading::NorthEast,
        "east" | "e" => Heading::East,
        "southeast" | "se" => Heading::SouthEast,
        "south" | "s" => Heading::South,
        "southwest" | "sw" => Heading::SouthWest,
        "west" | "w" => Heading::West,
        "northwest" | "nw" => Heading::NorthWest,
        other => return Err(format!("unknown heading {other:?}")),
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_text(path: &PathBuf, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_map(path: &PathBuf) -> Result<EnvironmentMap, String> {
    let file: MapFile = read_json(path)?;
    EnvironmentMap::from_map_file(&file).map_err(|e| e.to_string())
}

/// A learned-fit JSON or a bare influence-model JSON.
fn read_model(path: &PathBuf) -> Result<InfluenceModel, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Ok(fit) = serde_json::from_str::<FitResult>(&text) {
        return Ok(fit.model);
    }
    serde_json::from_str::<InfluenceModel>(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::GenModels { count, dimension, seed, out } => {
            if count < 1 || dimension < 2 {
                return Err("gen-models needs count >= 1 and dimension >= 2".into());
            }
            let suite = generate_model_suite(count, dimension, seed);
            write_text(&out, &serde_json::to_string_pretty(&suite).unwrap())?;
            println!("wrote {count} model pairs to {}", out.display());
        }
        Command::Learn { data, entry_p, exit_p, max_order, out } => {
            let text = std::fs::read_to_string(&data).map_err(|e| e.to_string())?;
            let obs = parse_observations_csv(&text).map_err(|e| e.to_string())?;
            let params = StepwiseParams { entry_p, exit_p, max_order };
            let fit = fit_stepwise(&obs, &params).map_err(|e| e.to_string())?;
            write_text(&out, &serde_json::to_string_pretty(&fit).unwrap())?;
            println!(
                "fit {} terms on {} observations (rss {:.3e}) -> {}",
                fit.model.terms.len(),
                fit.n_obs,
                fit.rss,
                out.display()
            );
        }
        Command::Pareto { models, model_id, discharge, speed, enum_limit, out } => {
            let (discharge_model, speed_model) = match (models, discharge, speed) {
                (Some(models), _, _) => {
                    let suite: Vec<GroundTruthModelPair> = read_json(&models)?;
                    let id = model_id.unwrap();
                    let pair = suite
                        .into_iter()
                        .find(|p| p.id == id)
                        .ok_or_else(|| format!("model id {id} not in suite"))?;
                    (pair.discharge_model, pair.speed_model)
                }
                (None, Some(discharge), Some(speed)) => {
                    (read_model(&discharge)?, read_model(&speed)?)
                }
                _ => {
                    return Err(
                        "pass either --models with --model-id, or --discharge with --speed".into()
                    )
                }
            };
            let space = ConfigurationSpace::with_dimension(discharge_model.dimension)
                .map_err(|e| e.to_string())?;
            let front = pareto_optimal_configs(
                &space,
                &[(discharge_model, Sense::Minimize), (speed_model, Sense::Maximize)],
                enum_limit,
            )
            .map_err(|e| e.to_string())?;
            let entries: Vec<CatalogEntry> = front
                .iter()
                .map(|(config, point)| CatalogEntry {
                    config_id: config.bit_string(),
                    speed: point.values[1],
                    discharge_rate: point.values[0],
                })
                .collect();
            write_text(&out, &serde_json::to_string_pretty(&entries).unwrap())?;
            println!("{} Pareto-optimal configurations -> {}", entries.len(), out.display());
        }
        Command::Plan {
            map,
            catalog,
            start,
            target,
            heading,
            config,
            battery,
            max_battery,
            min_battery,
            max_reconfigs,
            charge_rate,
            emit_model,
            out,
        } => {
            let problem = PlanningProblem {
                map: read_map(&map)?,
                catalog: read_json::<ConfigCatalog>(&catalog)?,
                start,
                initial_heading: parse_heading(&heading)?,
                initial_config: config,
                initial_battery: battery,
                max_battery,
                min_battery,
                target,
                max_reconfigs,
                charge_rate,
            };
            if let Some(path) = emit_model {
                let model = translate(&problem).map_err(|e| e.to_string())?;
                let text = serialize_model(&model);
                parse_model(&text).map_err(|e| format!("emitted model does not re-parse: {e}"))?;
                write_text(&path, &text)?;
            }
            match synthesize(&problem) {
                Ok(plan) => {
                    write_text(&out, &serde_json::to_string_pretty(&plan).unwrap())?;
                    println!(
                        "plan with {} instructions, {:.3} s, {:.0} mWh -> {}",
                        plan.len(),
                        plan.predicted_time,
                        plan.predicted_energy,
                        out.display()
                    );
                }
                Err(PlanError::NoFeasiblePlan) => {
                    eprintln!("error: {}", PlanError::NoFeasiblePlan);
                    return Ok(ExitCode::from(3));
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        Command::Simulate {
            map,
            models,
            model_id,
            plan,
            schedule,
            start,
            heading,
            config,
            battery,
            tasks,
            out,
        } => {
            let map = read_map(&map)?;
            let suite: Vec<GroundTruthModelPair> = read_json(&models)?;
            let truth = suite
                .iter()
                .find(|p| p.id == model_id)
                .ok_or_else(|| format!("model id {model_id} not in suite"))?;
            let plan: InstructionGraph = read_json(&plan)?;
            let schedule = match schedule {
                Some(path) => read_json::<PerturbationSchedule>(&path)?,
                None => PerturbationSchedule::empty(),
            };
            let mission = Mission::new(tasks.into_iter().filter(|t| !t.is_empty()).collect());
            let initial = InitialState {
                location: start,
                heading: parse_heading(&heading)?,
                battery,
                config_id: config,
            };
            let trace = sim_run(
                &map,
                truth,
                &mission,
                &initial,
                &SimParams::default(),
                &schedule,
                &plan,
                &mut NoneController,
            )
            .map_err(|e| e.to_string())?;
            write_text(&out, &trace.to_jsonl())?;
            println!(
                "score {:.3} ({}/{} tasks), final battery {:.0} mWh -> {}",
                trace.score,
                trace.completed_tasks,
                trace.total_tasks,
                trace.totals.final_battery,
                out.display()
            );
        }
        Command::Triple { spec, models, map, trace_dir, out } => {
            let spec: TestSpec = read_json(&spec)?;
            let suite = match models {
                Some(path) => read_json::<Vec<GroundTruthModelPair>>(&path)?,
                None => paretoplan::harness::default_suite(spec.dimension),
            };
            let map = match map.or_else(|| spec.map_file.clone()) {
                Some(path) => read_map(&path)?,
                None => demo_grid(4, 4),
            };
            let ctx = HarnessContext::new(suite, map);
            let result = run_triple(&spec, &ctx, trace_dir.as_deref());
            write_text(&out, &serde_json::to_string_pretty(&result).unwrap())?;
            println!(
                "A {:.3}  B {:.3}  Challenge {:.3}  -> {:?} / {:?}",
                result.a.score,
                result.b.score,
                result.challenge.score,
                result.validity,
                result.verdict
            );
        }
        Command::Campaign { file, out, trace_dir } => {
            let summary =
                run_campaign(&file, &out, trace_dir.as_deref()).map_err(|e| e.to_string())?;
            print!("{}", summary.render());
            println!("results appended to {}", out.display());
        }
        Command::Bench { counts, budgets, time_limit_secs, repetitions, seed, map, out } => {
            let map = match map {
                Some(path) => Some(read_map(&path)?),
                None => None,
            };
            let params = BenchParams {
                seed,
                repetitions,
                time_limit: Duration::from_secs(time_limit_secs),
                ..BenchParams::default()
            };
            let records = planning_benchmark(&counts, &budgets, map.as_ref(), &params)
                .map_err(|e| e.to_string())?;
            write_text(&out, &render_csv(&records, &params))?;
            for r in &records {
                println!(
                    "n={:<4} k={} {:>10.3} ms  {:?}",
                    r.n_configs, r.reconfig_budget, r.wall_time_ms, r.outcome
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
