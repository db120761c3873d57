//! Instruction graphs: the executable plans handed to the robot, and the
//! replay arithmetic that predicts their time, energy, and battery trace.

use serde::{Deserialize, Serialize};

use super::catalog::move_energy_mwh;
use super::map::rotation_time;
use super::problem::PlanningProblem;
use super::PlanError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Instruction {
    MoveTo { location: String },
    SetConfig { config: String },
    Charge { to_level: f64 },
}

/// An ordered executable plan with its predicted totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionGraph {
    pub instructions: Vec<Instruction>,
    pub predicted_time: f64,
    pub predicted_energy: f64,
}

impl InstructionGraph {
    pub fn empty() -> Self {
        Self { instructions: Vec::new(), predicted_time: 0.0, predicted_energy: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }
}

/// Replay of a plan against a problem: totals plus the battery level at
/// every instruction boundary (bucketed exactly like synthesis, so the
/// trace is what the planner guaranteed).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanTotals {
    pub time_s: f64,
    pub energy_mwh: f64,
    /// Battery before the first instruction and after each one.
    pub battery_trace: Vec<f64>,
}

impl PlanTotals {
    pub fn min_battery(&self) -> f64 {
        self.battery_trace.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Replays `plan` from the problem's initial state.
///
/// Structural violations are errors: moves between non-adjacent or
/// blocked locations, unknown configurations, charging away from a
/// station, exceeding the reconfiguration budget. Battery is allowed to
/// go arbitrarily low — callers inspect the trace — because the replay
/// is also how analyzers predict failures of stale plans.
pub fn plan_totals(plan: &InstructionGraph, problem: &PlanningProblem) -> Result<PlanTotals, PlanError> {
    problem.validate()?;
    let map = &problem.map;
    let batt = problem.battery_ints();
    let mut loc = problem.start_index();
    let mut heading = problem.initial_heading;
    let mut config = problem.initial_config_index();
    let mut battery = batt.initial as f64;
    let mut reconfigs = 0u32;
    let mut time = 0.0;
    let mut energy = 0.0;
    let mut trace = vec![battery];

    for (i, instruction) in plan.instructions.iter().enumerate() {
        match instruction {
            Instruction::MoveTo { location } => {
                let to = map.location_index(location).ok_or_else(|| {
                    PlanError::InvalidPlan(format!("instruction {i}: unknown location {location:?}"))
                })?;
                let arc = map.arc_between(loc, to).ok_or_else(|| {
                    PlanError::InvalidPlan(format!(
                        "instruction {i}: {} and {} are not adjacent",
                        map.location_name(loc),
                        location
                    ))
                })?;
                if map.is_blocked(loc, to) {
                    return Err(PlanError::InvalidPlan(format!(
                        "instruction {i}: arc {} -> {} is blocked",
                        map.location_name(loc),
                        location
                    )));
                }
                let entry = problem.catalog.get(config);
                let e = move_energy_mwh(arc, entry) as f64;
                time += rotation_time(heading, arc.heading) + arc.distance_m / entry.speed;
                energy += e;
                battery = (battery - e).max(0.0);
                heading = arc.heading;
                loc = to;
            }
            Instruction::SetConfig { config: id } => {
                config = problem.catalog.index_of(id).ok_or_else(|| {
                    PlanError::InvalidPlan(format!("instruction {i}: unknown config {id:?}"))
                })?;
                reconfigs += 1;
                if reconfigs > problem.max_reconfigs {
                    return Err(PlanError::InvalidPlan(format!(
                        "instruction {i}: exceeds reconfiguration budget {}",
                        problem.max_reconfigs
                    )));
                }
            }
            Instruction::Charge { to_level } => {
                if !map.is_charger(loc) {
                    return Err(PlanError::InvalidPlan(format!(
                        "instruction {i}: {} is not a charging station",
                        map.location_name(loc)
                    )));
                }
                if *to_level > problem.max_battery {
                    return Err(PlanError::InvalidPlan(format!(
                        "instruction {i}: charge level {to_level} above battery capacity {}",
                        problem.max_battery
                    )));
                }
                let target = to_level.floor();
                if target > battery {
                    time += (target - battery) / problem.charge_rate;
                    battery = target;
                }
            }
        }
        trace.push(battery);
    }
    Ok(PlanTotals { time_s: time, energy_mwh: energy, battery_trace: trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::catalog::{CatalogEntry, ConfigCatalog};
    use crate::planner::map::{demo_map, Heading};
    use crate::planner::problem::{DEFAULT_CHARGE_RATE, DEFAULT_MAX_BATTERY};

    fn single_config_problem() -> PlanningProblem {
        PlanningProblem {
            map: demo_map(),
            catalog: ConfigCatalog::new(vec![CatalogEntry {
                config_id: "half".into(),
                speed: 0.58333,
                discharge_rate: 41.65,
            }])
            .unwrap(),
            start: "l1".into(),
            initial_heading: Heading::South,
            initial_config: "half".into(),
            initial_battery: DEFAULT_MAX_BATTERY,
            max_battery: DEFAULT_MAX_BATTERY,
            min_battery: 0.0,
            target: "l2".into(),
            max_reconfigs: 0,
            charge_rate: DEFAULT_CHARGE_RATE,
        }
    }

    #[test]
    fn empty_plan_has_zero_totals() {
        let p = single_config_problem();
        let totals = plan_totals(&InstructionGraph::empty(), &p).unwrap();
        assert_eq!(totals.time_s, 0.0);
        assert_eq!(totals.energy_mwh, 0.0);
        assert_eq!(totals.battery_trace, vec![DEFAULT_MAX_BATTERY]);
    }

    #[test]
    fn single_move_matches_half_speed_constants() {
        let p = single_config_problem();
        let plan = InstructionGraph {
            instructions: vec![Instruction::MoveTo { location: "l2".into() }],
            predicted_time: 0.0,
            predicted_energy: 0.0,
        };
        let totals = plan_totals(&plan, &p).unwrap();
        // heading already south: no rotation
        assert!((totals.time_s - 8.5714).abs() < 1e-3, "time {}", totals.time_s);
        assert!((totals.energy_mwh - 357.0).abs() <= 1.0, "energy {}", totals.energy_mwh);
        assert_eq!(totals.battery_trace.len(), 2);
        assert!(totals.battery_trace[1] < totals.battery_trace[0]);
    }

    #[test]
    fn rotation_is_charged_from_current_heading() {
        let mut p = single_config_problem();
        p.initial_heading = Heading::North;
        let plan = InstructionGraph {
            instructions: vec![Instruction::MoveTo { location: "l2".into() }],
            predicted_time: 0.0,
            predicted_energy: 0.0,
        };
        let totals = plan_totals(&plan, &p).unwrap();
        assert!((totals.time_s - (8.5714 + 10.4720)).abs() < 1e-3);
    }

    #[test]
    fn structural_violations_are_errors() {
        let p = single_config_problem();
        let non_adjacent = InstructionGraph {
            instructions: vec![Instruction::MoveTo { location: "l5".into() }],
            predicted_time: 0.0,
            predicted_energy: 0.0,
        };
        assert!(matches!(plan_totals(&non_adjacent, &p), Err(PlanError::InvalidPlan(_))));

        let over_budget = InstructionGraph {
            instructions: vec![Instruction::SetConfig { config: "half".into() }],
            predicted_time: 0.0,
            predicted_energy: 0.0,
        };
        assert!(matches!(plan_totals(&over_budget, &p), Err(PlanError::InvalidPlan(_))));

        let charge_off_station = InstructionGraph {
            instructions: vec![Instruction::Charge { to_level: 1000.0 }],
            predicted_time: 0.0,
            predicted_energy: 0.0,
        };
        assert!(matches!(plan_totals(&charge_off_station, &p), Err(PlanError::InvalidPlan(_))));
    }

    #[test]
    fn charging_takes_level_over_rate_seconds() {
        let mut p = single_config_problem();
        p.start = "l4".into(); // charger
        p.initial_battery = 10_000.0;
        let plan = InstructionGraph {
            instructions: vec![Instruction::Charge { to_level: p.max_battery }],
            predicted_time: 0.0,
            predicted_energy: 0.0,
        };
        let totals = plan_totals(&plan, &p).unwrap();
        assert!((totals.time_s - (DEFAULT_MAX_BATTERY - 10_000.0) / DEFAULT_CHARGE_RATE).abs() < 1e-9);
        assert_eq!(totals.battery_trace[1], DEFAULT_MAX_BATTERY);
    }

    #[test]
    fn instruction_json_shape() {
        let plan = InstructionGraph {
            instructions: vec![
                Instruction::MoveTo { location: "l2".into() },
                Instruction::SetConfig { config: "0101".into() },
                Instruction::Charge { to_level: 32560.0 },
            ],
            predicted_time: 12.5,
            predicted_energy: 400.0,
        };
        let json = serde_json::to_value(&plan).unwrap();
        assert_eq!(json["instructions"][0]["op"], "move_to");
        assert_eq!(json["instructions"][1]["config"], "0101");
        assert_eq!(json["instructions"][2]["op"], "charge");
        let back: InstructionGraph = serde_json::from_value(json).unwrap();
        assert_eq!(back, plan);
    }
}
