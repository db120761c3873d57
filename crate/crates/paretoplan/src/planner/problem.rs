//! Planning problems: the aggregated inputs a single synthesis runs on.

use serde::{Deserialize, Serialize};

use super::catalog::ConfigCatalog;
use super::map::{EnvironmentMap, Heading};
use super::PlanError;

pub const DEFAULT_CHARGE_RATE: f64 = 50.0;
pub const DEFAULT_MAX_BATTERY: f64 = 32_560.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanningProblem {
    pub map: EnvironmentMap,
    pub catalog: ConfigCatalog,
    pub start: String,
    pub initial_heading: Heading,
    pub initial_config: String,
    /// mWh
    pub initial_battery: f64,
    pub max_battery: f64,
    pub min_battery: f64,
    pub target: String,
    pub max_reconfigs: u32,
    /// mWh/s
    pub charge_rate: f64,
}

/// Serializable core of a problem (everything but the map, which travels
/// as a map file next to it).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub start: String,
    pub target: String,
    pub initial_heading: Heading,
    pub initial_config: String,
    pub initial_battery: f64,
    pub max_battery: f64,
    pub min_battery: f64,
    pub max_reconfigs: u32,
    pub charge_rate: f64,
}

impl PlanningProblem {
    pub fn validate(&self) -> Result<(), PlanError> {
        let invalid = |msg: String| Err(PlanError::InvalidProblem(msg));
        if self.map.location_index(&self.start).is_none() {
            return invalid(format!("unknown start location {:?}", self.start));
        }
        if self.map.location_index(&self.target).is_none() {
            return invalid(format!("unknown target location {:?}", self.target));
        }
        if self.catalog.index_of(&self.initial_config).is_none() {
            return invalid(format!("initial config {:?} not in catalog", self.initial_config));
        }
        if !(self.min_battery >= 0.0
            && self.min_battery < self.initial_battery
            && self.initial_battery <= self.max_battery)
        {
            return invalid(format!(
                "battery bounds must satisfy 0 <= min < initial <= max, got min={} initial={} max={}",
                self.min_battery, self.initial_battery, self.max_battery
            ));
        }
        if !(self.charge_rate > 0.0) {
            return invalid(format!("charge rate must be positive, got {}", self.charge_rate));
        }
        Ok(())
    }

    /// The same problem re-anchored at a live robot state: used when
    /// replanning mid-mission and when replaying a plan suffix.
    pub fn with_state(
        &self,
        location: &str,
        heading: Heading,
        battery: f64,
        config_id: &str,
    ) -> Self {
        Self {
            start: location.to_string(),
            initial_heading: heading,
            initial_battery: battery,
            initial_config: config_id.to_string(),
            ..self.clone()
        }
    }

    pub fn with_target(&self, target: &str) -> Self {
        Self { target: target.to_string(), ..self.clone() }
    }

    pub(crate) fn start_index(&self) -> usize {
        self.map.location_index(&self.start).expect("validated start")
    }

    pub(crate) fn target_index(&self) -> usize {
        self.map.location_index(&self.target).expect("validated target")
    }

    pub(crate) fn initial_config_index(&self) -> usize {
        self.catalog.index_of(&self.initial_config).expect("validated config")
    }

    /// Integer battery lattice used by translation and synthesis.
    pub(crate) fn battery_ints(&self) -> BatteryInts {
        BatteryInts {
            max: self.max_battery.floor() as i64,
            min: self.min_battery.floor() as i64,
            initial: self.initial_battery.floor() as i64,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BatteryInts {
    pub max: i64,
    pub min: i64,
    pub initial: i64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::catalog::CatalogEntry;
    use crate::planner::map::demo_map;

    pub(crate) fn demo_problem() -> PlanningProblem {
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
            initial_battery: DEFAULT_MAX_BATTERY,
            max_battery: DEFAULT_MAX_BATTERY,
            min_battery: 200.0,
            target: "l5".into(),
            max_reconfigs: 2,
            charge_rate: DEFAULT_CHARGE_RATE,
        }
    }

    #[test]
    fn validates_battery_bounds_and_names() {
        let ok = demo_problem();
        assert!(ok.validate().is_ok());

        let mut bad = demo_problem();
        bad.start = "nowhere".into();
        assert!(bad.validate().is_err());

        let mut bad = demo_problem();
        bad.min_battery = bad.initial_battery;
        assert!(bad.validate().is_err());

        let mut bad = demo_problem();
        bad.initial_config = "warp".into();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn with_state_reanchors() {
        let p = demo_problem();
        let q = p.with_state("l3", Heading::East, 9_000.0, "full");
        assert_eq!(q.start, "l3");
        assert_eq!(q.initial_battery, 9_000.0);
        assert_eq!(q.initial_config, "full");
        assert_eq!(q.target, p.target);
    }
}
