//! The two analysis components: a mission analyzer that checks the plan
//! is still being followed, and an energy predictor that replays the
//! remaining plan against the learned models.

use crate::config::{Configuration, InfluenceModel};
use crate::planner::{
    plan_totals, CatalogEntry, ConfigCatalog, Instruction, InstructionGraph,
    PlanningProblem,
};
use crate::sim::{Position, WorldView};

use super::{Finding, FindingKind, MonitorRecord};

/// Planner-facing limits shared by analyzers and the quantitative
/// controller.
#[derive(Debug, Clone)]
pub struct PlannerSettings {
    pub min_battery: f64,
    pub max_battery: f64,
    pub max_reconfigs: u32,
    pub charge_rate: f64,
}

/// The knowledge base: learned models, the Pareto catalog projected
/// through them, and the planning limits.
#[derive(Debug, Clone)]
pub struct Knowledge {
    pub learned_discharge: InfluenceModel,
    pub learned_speed: InfluenceModel,
    pub catalog: ConfigCatalog,
    pub settings: PlannerSettings,
}

impl Knowledge {
    /// The catalog extended with an entry for `config_id` when missing,
    /// projected through the learned models (clamped positive so the
    /// catalog invariants hold even for wild extrapolations).
    pub fn catalog_with(&self, config_id: &str) -> ConfigCatalog {
        if self.catalog.index_of(config_id).is_some() {
            return self.catalog.clone();
        }
        let mut entries = self.catalog.entries().to_vec();
        entries.push(self.entry_for(config_id));
        ConfigCatalog::new(entries).expect("augmented catalog stays valid")
    }

    pub fn entry_for(&self, config_id: &str) -> CatalogEntry {
        let (speed, discharge) = match Configuration::from_bit_string(config_id) {
            Ok(config) if config.len() == self.learned_speed.dimension => (
                self.learned_speed.evaluate(&config).unwrap_or(0.0),
                self.learned_discharge.evaluate(&config).unwrap_or(0.0),
            ),
            _ => (0.0, 0.0),
        };
        CatalogEntry {
            config_id: config_id.to_string(),
            speed: speed.max(0.01),
            discharge_rate: discharge.max(0.1),
        }
    }
}

/// Determines whether the mission is still on track: off track when the
/// last instruction failed, when the robot sits at a node the remaining
/// plan does not start from, or when the plan ran out with tasks left.
pub fn mission_analyzer(record: &MonitorRecord, view: &WorldView<'_>) -> Finding {
    if record.last_status.is_failure() {
        return Finding {
            kind: FindingKind::MissionOffTrack,
            detail: format!("instruction failed: {:?}", record.last_status),
        };
    }
    if let (Position::Node { location }, Some(anchor)) = (record.position, view.plan_anchor) {
        if location != anchor && !view.remaining_instructions.is_empty() {
            return Finding {
                kind: FindingKind::MissionOffTrack,
                detail: format!(
                    "robot at {}, plan anchored at {}",
                    view.map.location_name(location),
                    view.map.location_name(anchor)
                ),
            };
        }
    }
    if view.remaining_instructions.is_empty() && !view.tasks_remaining.is_empty() {
        return Finding {
            kind: FindingKind::MissionOffTrack,
            detail: format!("plan exhausted with {} tasks remaining", view.tasks_remaining.len()),
        };
    }
    Finding::nominal()
}

/// Replays the remaining plan (up to the next charge stop) with the
/// learned models and flags the mission when the predicted battery dips
/// under the floor before then.
pub fn energy_predictor(
    record: &MonitorRecord,
    view: &WorldView<'_>,
    knowledge: &Knowledge,
) -> Finding {
    if view.remaining_instructions.is_empty() {
        return Finding::nominal();
    }
    let Some(node) = record.position.node() else {
        // mid-move: the arrival probe will re-run the check at a node
        return Finding::nominal();
    };
    let segment_end = view
        .remaining_instructions
        .iter()
        .position(|i| matches!(i, Instruction::Charge { .. }))
        .unwrap_or(view.remaining_instructions.len());
    let segment = &view.remaining_instructions[..segment_end];
    if segment.is_empty() {
        return Finding::nominal();
    }

    let problem = PlanningProblem {
        map: view.map.clone(),
        catalog: knowledge.catalog_with(&record.config_id),
        start: view.map.location_name(node).to_string(),
        initial_heading: record.heading,
        initial_config: record.config_id.clone(),
        initial_battery: record.battery.max(knowledge.settings.min_battery + 1.0),
        max_battery: knowledge.settings.max_battery,
        min_battery: knowledge.settings.min_battery,
        target: view.map.location_name(node).to_string(),
        max_reconfigs: knowledge.settings.max_reconfigs,
        charge_rate: knowledge.settings.charge_rate,
    };
    let plan = InstructionGraph {
        instructions: segment.to_vec(),
        predicted_time: 0.0,
        predicted_energy: 0.0,
    };
    let Ok(replay) = plan_totals(&plan, &problem) else {
        // structurally stale plans are the mission analyzer's concern
        return Finding::nominal();
    };
    // replay started from the clamped battery; shift back to the real one
    let offset = problem.initial_battery.floor() - record.battery.floor();
    let predicted_min = replay.min_battery() - offset;
    if predicted_min < knowledge.settings.min_battery {
        Finding {
            kind: FindingKind::EnergyInsufficient,
            detail: format!(
                "predicted battery {predicted_min:.0} mWh falls under the {:.0} mWh floor before the next charge",
                knowledge.settings.min_battery
            ),
        }
    } else {
        Finding::nominal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{demo_map, EnvironmentMap, Heading};
    use crate::sim::InstructionStatus;

    fn knowledge() -> Knowledge {
        // learned dynamics: constant 40 mWh/s at 0.5 m/s for d=2
        Knowledge {
            learned_discharge: InfluenceModel::intercept_only(2, 40.0),
            learned_speed: InfluenceModel::intercept_only(2, 0.5),
            catalog: ConfigCatalog::new(vec![CatalogEntry {
                config_id: "00".into(),
                speed: 0.5,
                discharge_rate: 40.0,
            }])
            .unwrap(),
            settings: PlannerSettings {
                min_battery: 200.0,
                max_battery: 32_560.0,
                max_reconfigs: 2,
                charge_rate: 50.0,
            },
        }
    }

    fn record(map: &EnvironmentMap, loc: &str, battery: f64, status: InstructionStatus) -> MonitorRecord {
        MonitorRecord {
            t: 5.0,
            position: Position::Node { location: map.location_index(loc).unwrap() },
            heading: Heading::South,
            battery,
            config_id: "00".into(),
            last_status: status,
        }
    }

    fn view<'a>(
        map: &'a EnvironmentMap,
        tasks: &'a [usize],
        remaining: &'a [Instruction],
        anchor: Option<usize>,
    ) -> WorldView<'a> {
        WorldView {
            map,
            tasks_remaining: tasks,
            remaining_instructions: remaining,
            plan_anchor: anchor,
            max_battery: 32_560.0,
        }
    }

    fn moves(names: &[&str]) -> Vec<Instruction> {
        names.iter().map(|n| Instruction::MoveTo { location: n.to_string() }).collect()
    }

    #[test]
    fn nominal_progress_stays_nominal() {
        let map = demo_map();
        let l1 = map.location_index("l1").unwrap();
        let remaining = moves(&["l2"]);
        let tasks = [map.location_index("l2").unwrap()];
        let r = record(&map, "l1", 30_000.0, InstructionStatus::Idle);
        let v = view(&map, &tasks, &remaining, Some(l1));
        assert!(mission_analyzer(&r, &v).is_nominal());
        assert!(energy_predictor(&r, &v, &knowledge()).is_nominal());
    }

    #[test]
    fn failed_instruction_is_off_track() {
        let map = demo_map();
        let r = record(&map, "l1", 30_000.0, InstructionStatus::ObstacleDetected);
        let v = view(&map, &[], &[], None);
        let finding = mission_analyzer(&r, &v);
        assert_eq!(finding.kind, FindingKind::MissionOffTrack);
    }

    #[test]
    fn unplanned_location_is_off_track() {
        let map = demo_map();
        let anchor = map.location_index("l3").unwrap();
        let remaining = moves(&["l5"]);
        let r = record(&map, "l1", 30_000.0, InstructionStatus::Idle);
        let v = view(&map, &[], &remaining, Some(anchor));
        let finding = mission_analyzer(&r, &v);
        assert_eq!(finding.kind, FindingKind::MissionOffTrack);
        assert!(finding.detail.contains("l1") && finding.detail.contains("l3"));
    }

    #[test]
    fn ample_battery_is_nominal_and_depleted_battery_is_not() {
        let map = demo_map();
        let l1 = map.location_index("l1").unwrap();
        // remaining: l1 -> l2 -> l5, predicted need ~ (5 + 4.24) / 0.5 * 40 ~ 740 mWh
        let remaining = moves(&["l2", "l5"]);
        let v = view(&map, &[], &remaining, Some(l1));
        let know = knowledge();

        let flush = record(&map, "l1", 10_000.0, InstructionStatus::Idle);
        assert!(energy_predictor(&flush, &v, &know).is_nominal());

        let drained = record(&map, "l1", 500.0, InstructionStatus::Idle);
        let finding = energy_predictor(&drained, &v, &know);
        assert_eq!(finding.kind, FindingKind::EnergyInsufficient);
    }

    #[test]
    fn imminent_charge_with_margin_is_nominal() {
        let map = demo_map();
        let l1 = map.location_index("l1").unwrap();
        // l4 is the charger, one 3 m hop away (~240 mWh at learned rates);
        // everything after the charge is not this segment's concern
        let mut remaining = moves(&["l4"]);
        remaining.push(Instruction::Charge { to_level: 32_560.0 });
        remaining.extend(moves(&["l1", "l2", "l5", "l3", "l2"]));
        let v = view(&map, &[], &remaining, Some(l1));
        let r = record(&map, "l1", 700.0, InstructionStatus::Idle);
        assert!(energy_predictor(&r, &v, &knowledge()).is_nominal());
    }
}
