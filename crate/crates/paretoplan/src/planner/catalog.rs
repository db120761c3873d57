//! Configuration catalogs: the per-configuration speed and discharge rate
//! the planner is allowed to choose from, typically a Pareto set projected
//! through learned models.

use serde::{Deserialize, Serialize};

use super::map::MapArc;
use super::PlanError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub config_id: String,
    /// m/s
    pub speed: f64,
    /// mWh/s
    pub discharge_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CatalogEntry>", into = "Vec<CatalogEntry>")]
pub struct ConfigCatalog {
    entries: Vec<CatalogEntry>,
}

impl ConfigCatalog {
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self, PlanError> {
        if entries.is_empty() {
            return Err(PlanError::InvalidCatalog("catalog is empty".into()));
        }
        for e in &entries {
            if !(e.speed > 0.0 && e.speed.is_finite()) {
                return Err(PlanError::InvalidCatalog(format!(
                    "entry {:?} has non-positive speed {}",
                    e.config_id, e.speed
                )));
            }
            if !(e.discharge_rate > 0.0 && e.discharge_rate.is_finite()) {
                return Err(PlanError::InvalidCatalog(format!(
                    "entry {:?} has non-positive discharge rate {}",
                    e.config_id, e.discharge_rate
                )));
            }
        }
        let mut ids: Vec<&str> = entries.iter().map(|e| e.config_id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(PlanError::InvalidCatalog("duplicate config ids".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> &CatalogEntry {
        &self.entries[index]
    }

    pub fn index_of(&self, config_id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.config_id == config_id)
    }
}

impl TryFrom<Vec<CatalogEntry>> for ConfigCatalog {
    type Error = PlanError;
    fn try_from(entries: Vec<CatalogEntry>) -> Result<Self, Self::Error> {
        ConfigCatalog::new(entries)
    }
}

impl From<ConfigCatalog> for Vec<CatalogEntry> {
    fn from(c: ConfigCatalog) -> Self {
        c.entries
    }
}

/// Time and energy of traversing one arc in one configuration, excluding
/// rotation (charged separately from the robot's current heading).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveCost {
    pub time_s: f64,
    pub energy_mwh: f64,
}

/// time = distance / speed, energy = time * discharge_rate.
pub fn move_cost(arc: &MapArc, entry: &CatalogEntry) -> MoveCost {
    if arc.distance_m == 0.0 {
        return MoveCost { time_s: 0.0, energy_mwh: 0.0 };
    }
    let time_s = arc.distance_m / entry.speed;
    MoveCost { time_s, energy_mwh: time_s * entry.discharge_rate }
}

/// Integer battery depletion of one move: energy rounded up to a whole
/// milliwatt-hour, the bucketing used by translation and synthesis.
pub fn move_energy_mwh(arc: &MapArc, entry: &CatalogEntry) -> i64 {
    move_cost(arc, entry).energy_mwh.ceil() as i64
}
