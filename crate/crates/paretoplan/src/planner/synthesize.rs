//! Minimum-time plan synthesis. Transitions of the product model are
//! deterministic, so minimizing accrued time until the goal reduces to a
//! non-negative-cost shortest path on the product graph, searched lazily
//! with a priority queue under the same bucketed battery semantics the
//! translation emits.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use ordered_float::NotNan;

use super::catalog::{move_cost, move_energy_mwh};
use super::instruction::{plan_totals, Instruction, InstructionGraph};
use super::map::rotation_time;
use super::problem::PlanningProblem;
use super::PlanError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    loc: u16,
    heading: u8,
    battery: i64,
    config: u16,
    reconfigs: u8,
}

/// Deterministic tie-break key for incoming edges: ordered like the
/// action names (charge < move < set), then by their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    Charge,
    Move(u16, u16),
    Set(u16),
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Move { to: u16 },
    Set { config: u16 },
    Charge,
}

struct NodeInfo {
    time: f64,
    steps: u32,
    edge: EdgeKey,
    parent: Option<(State, Step)>,
}

#[derive(PartialEq, Eq)]
struct HeapItem {
    time: NotNan<f64>,
    steps: u32,
    seq: u64,
    state: State,
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.steps, self.seq).cmp(&(other.time, other.steps, other.seq))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Synthesizes the minimum-time plan reaching the target with battery
/// above the floor throughout and at most `max_reconfigs` configuration
/// changes. Ties break toward fewer instructions, then action order.
pub fn synthesize(problem: &PlanningProblem) -> Result<InstructionGraph, PlanError> {
    synthesize_with_deadline(problem, None)
}

/// Like [`synthesize`] but aborts with [`PlanError::Interrupted`] once the
/// deadline passes (checked periodically), for benchmarking with a time
/// limit.
pub fn synthesize_with_deadline(
    problem: &PlanningProblem,
    deadline: Option<Instant>,
) -> Result<InstructionGraph, PlanError> {
    problem.validate()?;
    let map = &problem.map;
    let catalog = &problem.catalog;
    let batt = problem.battery_ints();
    let start = problem.start_index() as u16;
    let target = problem.target_index() as u16;

    if start == target {
        return Ok(InstructionGraph::empty());
    }
    if batt.initial <= batt.min {
        return Err(PlanError::NoFeasiblePlan);
    }

    let initial = State {
        loc: start,
        heading: problem.initial_heading.index(),
        battery: batt.initial,
        config: problem.initial_config_index() as u16,
        reconfigs: 0,
    };

    let mut best: HashMap<State, NodeInfo> = HashMap::new();
    best.insert(
        initial,
        NodeInfo { time: 0.0, steps: 0, edge: EdgeKey::Charge, parent: None },
    );
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Reverse(HeapItem { time: NotNan::new(0.0).unwrap(), steps: 0, seq, state: initial }));

    let mut pops = 0u64;
    while let Some(Reverse(item)) = heap.pop() {
        pops += 1;
        if pops % 2048 == 0 {
            if let Some(deadline) = deadline {
                if Instant::now() >= deadline {
                    return Err(PlanError::Interrupted);
                }
            }
        }
        let info = &best[&item.state];
        if item.time.into_inner() != info.time || item.steps != info.steps {
            continue; // stale heap entry
        }
        if item.state.loc == target {
            return reconstruct(problem, &best, item.state);
        }
        let cur_time = info.time;
        let cur_steps = info.steps;
        let state = item.state;

        let mut relax = |next: State, cost: f64, edge: EdgeKey, step: Step, heap: &mut BinaryHeap<Reverse<HeapItem>>| {
            debug_assert!(cost >= 0.0, "action costs must be non-negative");
            let time = cur_time + cost;
            let steps = cur_steps + 1;
            let better = match best.get(&next) {
                None => true,
                Some(old) => {
                    time < old.time
                        || (time == old.time && steps < old.steps)
                        || (time == old.time && steps == old.steps && edge < old.edge)
                }
            };
            if better {
                best.insert(next, NodeInfo { time, steps, edge, parent: Some((state, step)) });
                seq += 1;
                heap.push(Reverse(HeapItem {
                    time: NotNan::new(time).expect("finite action costs"),
                    steps,
                    seq,
                    state: next,
                }));
            }
        };

        // moves over unblocked arcs
        let entry = catalog.get(state.config as usize);
        for arc in map.arcs_from(state.loc as usize) {
            if map.is_blocked(arc.from, arc.to) {
                continue;
            }
            let energy = move_energy_mwh(arc, entry);
            let new_battery = (state.battery - energy).max(0);
            if new_battery <= batt.min {
                continue; // stop predicate would hold
            }
            let cost = rotation_time(super::map::HEADINGS[state.heading as usize], arc.heading)
                + move_cost(arc, entry).time_s;
            let next = State {
                loc: arc.to as u16,
                heading: arc.heading.index(),
                battery: new_battery,
                config: state.config,
                reconfigs: state.reconfigs,
            };
            relax(
                next,
                cost,
                EdgeKey::Move(arc.from as u16, arc.to as u16),
                Step::Move { to: arc.to as u16 },
                &mut heap,
            );
        }

        // reconfigurations
        if u32::from(state.reconfigs) < problem.max_reconfigs {
            for j in 0..catalog.len() as u16 {
                if j == state.config {
                    continue;
                }
                let next = State {
                    config: j,
                    reconfigs: state.reconfigs + 1,
                    ..state
                };
                relax(next, 0.0, EdgeKey::Set(j), Step::Set { config: j }, &mut heap);
            }
        }

        // charge to full at stations
        if map.is_charger(state.loc as usize) && state.battery < batt.max {
            let cost = (batt.max - state.battery) as f64 / problem.charge_rate;
            let next = State { battery: batt.max, ..state };
            relax(next, cost, EdgeKey::Charge, Step::Charge, &mut heap);
        }
    }

    Err(PlanError::NoFeasiblePlan)
}

fn reconstruct(
    problem: &PlanningProblem,
    best: &HashMap<State, NodeInfo>,
    goal: State,
) -> Result<InstructionGraph, PlanError> {
    let mut steps = Vec::new();
    let mut cursor = goal;
    while let Some((parent, step)) = best[&cursor].parent {
        steps.push(step);
        cursor = parent;
    }
    steps.reverse();

    let instructions: Vec<Instruction> = steps
        .iter()
        .map(|step| match step {
            Step::Move { to } => Instruction::MoveTo {
                location: problem.map.location_name(*to as usize).to_string(),
            },
            Step::Set { config } => Instruction::SetConfig {
                config: problem.catalog.get(*config as usize).config_id.clone(),
            },
            Step::Charge => Instruction::Charge { to_level: problem.max_battery },
        })
        .collect();

    let mut plan = InstructionGraph { instructions, predicted_time: 0.0, predicted_energy: 0.0 };
    let totals = plan_totals(&plan, problem)?;
    debug_assert!(
        (totals.time_s - best[&goal].time).abs() < 1e-6,
        "replay time {} deviates from search time {}",
        totals.time_s,
        best[&goal].time
    );
    debug_assert!(totals.min_battery() >= problem.min_battery);
    plan.predicted_time = totals.time_s;
    plan.predicted_energy = totals.energy_mwh;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::catalog::{CatalogEntry, ConfigCatalog};
    use crate::planner::map::{demo_map, EnvironmentMap, Heading, Location, HEADINGS};
    use crate::planner::translate::tests::random_problem;

    fn demo_problem() -> PlanningProblem {
        PlanningProblem {
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
            max_reconfigs: 2,
            charge_rate: 50.0,
        }
    }

    /// Exhaustive enumeration over simple paths and per-leg configuration
    /// assignments with a bounded number of switches, under the same
    /// integer battery semantics. Sound for instances where charging and
    /// revisits cannot pay off (ample battery, arcs >= 3 m, speeds <= 1.5).
    pub(crate) fn oracle_best_time(problem: &PlanningProblem) -> Option<f64> {
        let map = &problem.map;
        let batt = problem.battery_ints();
        let start = problem.start_index();
        let target = problem.target_index();
        if start == target {
            return Some(0.0);
        }
        let mut paths: Vec<Vec<usize>> = Vec::new();
        let mut stack = vec![start];
        fn dfs(
            map: &EnvironmentMap,
            target: usize,
            stack: &mut Vec<usize>,
            paths: &mut Vec<Vec<usize>>,
        ) {
            let cur = *stack.last().unwrap();
            if cur == target {
                paths.push(stack.clone());
                return;
            }
            for arc in map.arcs_from(cur) {
                if map.is_blocked(arc.from, arc.to) || stack.contains(&arc.to) {
                    continue;
                }
                stack.push(arc.to);
                dfs(map, target, stack, paths);
                stack.pop();
            }
        }
        dfs(map, target, &mut stack, &mut paths);

        let n_configs = problem.catalog.len();
        let initial_config = problem.initial_config_index();
        let mut best: Option<f64> = None;

        for path in &paths {
            let legs = path.len() - 1;
            // configuration per leg, counting switches (the first leg may
            // switch away from the initial configuration)
            let mut assignment = vec![0usize; legs];
            enumerate(
                problem,
                path,
                &mut assignment,
                0,
                initial_config,
                0,
                n_configs,
                batt.min,
                batt.initial,
                &mut best,
            );
        }
        return best;

        #[allow(clippy::too_many_arguments)]
        fn enumerate(
            problem: &PlanningProblem,
            path: &[usize],
            assignment: &mut Vec<usize>,
            leg: usize,
            prev_config: usize,
            switches: u32,
            n_configs: usize,
            min_batt: i64,
            init_batt: i64,
            best: &mut Option<f64>,
        ) {
            if leg == assignment.len() {
                if let Some(time) = evaluate(problem, path, assignment, min_batt, init_batt) {
                    if best.is_none() || time < best.unwrap() {
                        *best = Some(time);
                    }
                }
                return;
            }
            for config in 0..n_configs {
                let new_switches = switches + u32::from(config != prev_config);
                if new_switches > problem.max_reconfigs {
                    continue;
                }
                assignment[leg] = config;
                enumerate(
                    problem, path, assignment, leg + 1, config, new_switches, n_configs,
                    min_batt, init_batt, best,
                );
            }
        }

        fn evaluate(
            problem: &PlanningProblem,
            path: &[usize],
            assignment: &[usize],
            min_batt: i64,
            init_batt: i64,
        ) -> Option<f64> {
            let mut heading = problem.initial_heading;
            let mut battery = init_batt;
            let mut time = 0.0;
            for (leg, window) in path.windows(2).enumerate() {
                let arc = problem.map.arc_between(window[0], window[1]).unwrap();
                let entry = problem.catalog.get(assignment[leg]);
                battery -= move_energy_mwh(arc, entry);
                if battery.max(0) <= min_batt {
                    return None;
                }
                time += rotation_time(heading, arc.heading) + move_cost(arc, entry).time_s;
                heading = arc.heading;
            }
            Some(time)
        }
    }

    #[test]
    fn start_equals_target_gives_empty_plan() {
        let mut p = demo_problem();
        p.target = "l1".into();
        let plan = synthesize(&p).unwrap();
        assert!(plan.is_empty());
        assert_eq!(plan.predicted_time, 0.0);
    }

    #[test]
    fn demo_leg_matches_exhaustive_enumeration() {
        let p = demo_problem();
        let plan = synthesize(&p).unwrap();
        let oracle = oracle_best_time(&p).unwrap();
        assert!(
            (plan.predicted_time - oracle).abs() < 1e-6,
            "planner {} vs oracle {oracle}",
            plan.predicted_time
        );
    }

    #[test]
    fn random_instances_match_oracle() {
        let mut feasible = 0;
        for seed in 0..40u64 {
            let p = random_problem(seed);
            let oracle = oracle_best_time(&p);
            match synthesize(&p) {
                Ok(plan) => {
                    let oracle = oracle.unwrap_or_else(|| {
                        panic!("seed {seed}: planner found a plan, oracle none")
                    });
                    assert!(
                        (plan.predicted_time - oracle).abs() < 1e-6,
                        "seed {seed}: planner {} vs oracle {oracle}",
                        plan.predicted_time
                    );
                    feasible += 1;
                }
                Err(PlanError::NoFeasiblePlan) => {
                    assert!(oracle.is_none(), "seed {seed}: oracle found {oracle:?}");
                }
                Err(other) => panic!("seed {seed}: {other}"),
            }
        }
        assert!(feasible > 10, "too few feasible random instances: {feasible}");
    }

    #[test]
    fn battery_forces_a_charge_stop() {
        // start next to a charger; the target needs more energy than the
        // initial battery allows without topping up
        let map = demo_map();
        let catalog = ConfigCatalog::new(vec![CatalogEntry {
            config_id: "only".into(),
            speed: 0.5,
            discharge_rate: 50.0,
        }])
        .unwrap();
        // l1 -> l2 -> l5 costs ~ (5 + 4.243) / 0.5 * 50 ~ 924 mWh
        let p = PlanningProblem {
            map,
            catalog,
            start: "l1".into(),
            initial_heading: Heading::South,
            initial_config: "only".into(),
            initial_battery: 700.0,
            max_battery: 5_000.0,
            min_battery: 50.0,
            target: "l5".into(),
            max_reconfigs: 0,
            charge_rate: 50.0,
        };
        let plan = synthesize(&p).unwrap();
        assert!(
            plan.instructions.iter().any(|i| matches!(i, Instruction::Charge { .. })),
            "plan should charge: {:?}",
            plan.instructions
        );
        let totals = plan_totals(&plan, &p).unwrap();
        assert!(totals.min_battery() >= p.min_battery);

        // removing the charger makes the mission infeasible
        let mut no_charger = p.clone();
        let mut locations = no_charger.map.locations().to_vec();
        for l in &mut locations {
            l.charger = false;
        }
        let file = no_charger.map.to_map_file();
        no_charger.map = EnvironmentMap::new(locations, &file
            .arcs
            .iter()
            .map(|a| (a.from.clone(), a.to.clone(), a.distance_m))
            .collect::<Vec<_>>())
        .unwrap();
        assert!(matches!(synthesize(&no_charger), Err(PlanError::NoFeasiblePlan)));
    }

    #[test]
    fn blocking_an_arc_never_speeds_up_the_plan() {
        for seed in 0..25u64 {
            let p = random_problem(seed);
            let Ok(base) = synthesize(&p) else { continue };
            let mut blocked = p.clone();
            // block the first arc of the base plan when there is one
            if let Some(Instruction::MoveTo { location }) = base.instructions.first() {
                let from = blocked.map.location_index(&blocked.start).unwrap();
                let to = blocked.map.location_index(location).unwrap();
                blocked.map.block_arc(from, to);
            } else {
                continue;
            }
            match synthesize(&blocked) {
                Ok(detour) => assert!(
                    detour.predicted_time >= base.predicted_time - 1e-9,
                    "seed {seed}: blocking shortened the plan"
                ),
                Err(PlanError::NoFeasiblePlan) => {}
                Err(other) => panic!("seed {seed}: {other}"),
            }
        }
    }

    #[test]
    fn adding_a_catalog_entry_never_slows_the_plan() {
        for seed in 0..25u64 {
            let p = random_problem(seed);
            let Ok(base) = synthesize(&p) else { continue };
            let mut bigger = p.clone();
            let mut entries = bigger.catalog.entries().to_vec();
            entries.push(CatalogEntry {
                config_id: "extra".into(),
                speed: 0.9,
                discharge_rate: 60.0,
            });
            bigger.catalog = ConfigCatalog::new(entries).unwrap();
            let improved = synthesize(&bigger).unwrap();
            assert!(
                improved.predicted_time <= base.predicted_time + 1e-9,
                "seed {seed}: extra config slowed the plan"
            );
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let p = demo_problem();
        let a = synthesize(&p).unwrap();
        let b = synthesize(&p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn all_headings_have_nonnegative_rotation_costs() {
        for a in HEADINGS {
            for b in HEADINGS {
                assert!(rotation_time(a, b) >= 0.0);
            }
        }
    }

    #[test]
    fn unreachable_target_is_no_feasible_plan() {
        let map = EnvironmentMap::new(
            vec![
                Location { name: "a".into(), x: 0.0, y: 0.0, charger: false },
                Location { name: "b".into(), x: 5.0, y: 0.0, charger: false },
                Location { name: "c".into(), x: 10.0, y: 0.0, charger: false },
            ],
            &[("a".into(), "b".into(), 5.0)],
        )
        .unwrap();
        let p = PlanningProblem {
            map,
            catalog: ConfigCatalog::new(vec![CatalogEntry {
                config_id: "only".into(),
                speed: 1.0,
                discharge_rate: 10.0,
            }])
            .unwrap(),
            start: "a".into(),
            initial_heading: Heading::East,
            initial_config: "only".into(),
            initial_battery: 1_000.0,
            max_battery: 1_000.0,
            min_battery: 0.0,
            target: "c".into(),
            max_reconfigs: 0,
            charge_rate: 50.0,
        };
        assert!(matches!(synthesize(&p), Err(PlanError::NoFeasiblePlan)));
    }
}
