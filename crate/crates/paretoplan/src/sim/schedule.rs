//! Perturbation schedules: timed obstacle placements and battery jumps.

use serde::{Deserialize, Serialize};

use crate::planner::EnvironmentMap;

use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationKind {
    /// Makes the corridor between two locations impassable (both ways).
    Obstacle { arc: (String, String) },
    /// Jumps the battery to the given level (clamped to [0, max]).
    SetBattery { level: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledEvent {
    pub t: f64,
    #[serde(flatten)]
    pub kind: PerturbationKind,
}

/// A time-sorted list of perturbations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PerturbationSchedule {
    events: Vec<ScheduledEvent>,
}

impl PerturbationSchedule {
    pub fn empty() -> Self {
        Self { events: Vec::new() }
    }

    /// Sorts the events by time (stable) and validates them.
    pub fn new(mut events: Vec<ScheduledEvent>) -> Result<Self, SimError> {
        for e in &events {
            if !(e.t >= 0.0 && e.t.is_finite()) {
                return Err(SimError::InvalidSchedule(format!(
                    "event time must be non-negative and finite, got {}",
                    e.t
                )));
            }
        }
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(Self { events })
    }

    /// Checks arc references against a map.
    pub fn validate_against(&self, map: &EnvironmentMap) -> Result<(), SimError> {
        for e in &self.events {
            if let PerturbationKind::Obstacle { arc: (a, b) } = &e.kind {
                let ia = map.location_index(a).ok_or_else(|| {
                    SimError::InvalidSchedule(format!("unknown location {a:?} in obstacle event"))
                })?;
                let ib = map.location_index(b).ok_or_else(|| {
                    SimError::InvalidSchedule(format!("unknown location {b:?} in obstacle event"))
                })?;
                if map.arc_between(ia, ib).is_none() {
                    return Err(SimError::InvalidSchedule(format!(
                        "no arc between {a:?} and {b:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn events(&self) -> &[ScheduledEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::demo_map;

    #[test]
    fn schedule_json_shape() {
        let sched = PerturbationSchedule::new(vec![
            ScheduledEvent {
                t: 3.0,
                kind: PerturbationKind::Obstacle { arc: ("l2".into(), "l5".into()) },
            },
            ScheduledEvent { t: 1.0, kind: PerturbationKind::SetBattery { level: 500.0 } },
        ])
        .unwrap();
        // sorted on construction
        assert_eq!(sched.events()[0].t, 1.0);
        let json = serde_json::to_value(&sched).unwrap();
        assert_eq!(json[0]["kind"], "set_battery");
        assert_eq!(json[0]["level"], 500.0);
        assert_eq!(json[1]["kind"], "obstacle");
        assert_eq!(json[1]["arc"][0], "l2");
        let back: PerturbationSchedule = serde_json::from_value(json).unwrap();
        assert_eq!(back, sched);
    }

    #[test]
    fn rejects_negative_times_and_unknown_arcs() {
        assert!(PerturbationSchedule::new(vec![ScheduledEvent {
            t: -1.0,
            kind: PerturbationKind::SetBattery { level: 0.0 },
        }])
        .is_err());

        let sched = PerturbationSchedule::new(vec![ScheduledEvent {
            t: 0.0,
            kind: PerturbationKind::Obstacle { arc: ("l1".into(), "l5".into()) },
        }])
        .unwrap();
        assert!(sched.validate_against(&demo_map()).is_err());
    }
}
