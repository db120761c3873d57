//! The discrete-event mission engine. A single logical clock advances
//! between instruction phase boundaries, scheduled perturbations, probe
//! ticks, battery-depletion crossings, and the stall timeout; everything
//! is deterministic for fixed inputs.

use crate::adaptation::MonitorRecord;
use crate::config::{Configuration, GroundTruthModelPair};
use crate::planner::{
    rotation_time, EnvironmentMap, Heading, Instruction, InstructionGraph,
};

use super::schedule::{PerturbationKind, PerturbationSchedule, ScheduledEvent};
use super::world::{
    mission_score, EnergyTotals, EventKind, InstructionStatus, Mission, Position, Trace,
    TraceEvent,
};
use super::SimError;

#[derive(Debug, Clone)]
pub struct SimParams {
    pub max_battery: f64,
    /// Idle drain as a fraction of the active configuration's moving rate.
    pub idle_rate_fraction: f64,
    /// Probe cadence in simulated seconds.
    pub probe_interval: f64,
    /// How long the robot waits for new instructions before the run stalls.
    pub await_timeout: f64,
    /// mWh/s restored while charging.
    pub charge_rate: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            max_battery: crate::planner::DEFAULT_MAX_BATTERY,
            idle_rate_fraction: 0.01,
            probe_interval: 1.0,
            await_timeout: 5.0,
            charge_rate: crate::planner::DEFAULT_CHARGE_RATE,
        }
    }
}

/// Initial robot state for a run.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub location: String,
    pub heading: Heading,
    pub battery: f64,
    pub config_id: String,
}

/// Snapshot handed to controllers on every probe.
pub struct WorldView<'a> {
    pub map: &'a EnvironmentMap,
    pub tasks_remaining: &'a [usize],
    pub remaining_instructions: &'a [Instruction],
    /// Node the remaining plan assumes the robot is at (or will reach),
    /// `None` once a plan has been aborted.
    pub plan_anchor: Option<usize>,
    pub max_battery: f64,
}

/// What a controller wants after a probe: findings to log and optionally
/// a replacement plan.
#[derive(Default)]
pub struct ControlOutput {
    pub findings: Vec<(String, String)>,
    pub install: Option<(InstructionGraph, String)>,
    pub reject: Option<String>,
}

impl ControlOutput {
    pub fn nothing() -> Self {
        Self::default()
    }
}

/// The MAPE hook: invoked synchronously on the loop thread at every probe
/// (periodic ticks plus node events); must not block.
pub trait MissionController {
    fn on_probe(&mut self, record: &MonitorRecord, view: &WorldView<'_>) -> ControlOutput;
}

/// Baseline A: never touches the instruction stream.
pub struct NoneController;

impl MissionController for NoneController {
    fn on_probe(&mut self, _record: &MonitorRecord, _view: &WorldView<'_>) -> ControlOutput {
        ControlOutput::nothing()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Awaiting,
    Rotating { from: usize, to: usize, until: f64 },
    Traversing { from: usize, to: usize, started: f64, until: f64 },
    Charging { to_level: f64, until: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EndKind {
    Completed,
    Depleted,
    Stalled,
}

/// One mission run in progress.
pub struct MissionSim<'a> {
    map: EnvironmentMap,
    truth: &'a GroundTruthModelPair,
    params: SimParams,
    mission: Mission,
    task_ids: Vec<usize>,
    tasks_done: usize,

    t: f64,
    node: usize,
    heading: Heading,
    battery: f64,
    config: Configuration,
    config_id: String,
    speed: f64,
    rate: f64,

    plan: Vec<Instruction>,
    cursor: usize,
    plan_anchor: Option<usize>,
    phase: Phase,
    last_status: InstructionStatus,
    awaiting_since: Option<f64>,
    pending_install: Option<(InstructionGraph, String)>,

    schedule: Vec<ScheduledEvent>,
    sched_idx: usize,
    next_probe: f64,
    last_probe: f64,

    events: Vec<TraceEvent>,
    totals: EnergyTotals,
    ended: Option<EndKind>,
}

/// Runs one mission to completion, failure, or stall.
pub fn run(
    map: &EnvironmentMap,
    truth: &GroundTruthModelPair,
    mission: &Mission,
    initial: &InitialState,
    params: &SimParams,
    schedule: &PerturbationSchedule,
    plan: &InstructionGraph,
    controller: &mut dyn MissionController,
) -> Result<Trace, SimError> {
    let sim = MissionSim::new(map, truth, mission, initial, params, schedule)?;
    Ok(sim.execute(plan, controller))
}

impl<'a> MissionSim<'a> {
    pub fn new(
        map: &EnvironmentMap,
        truth: &'a GroundTruthModelPair,
        mission: &Mission,
        initial: &InitialState,
        params: &SimParams,
        schedule: &PerturbationSchedule,
    ) -> Result<Self, SimError> {
        let task_ids = mission.resolve(map)?;
        schedule.validate_against(map)?;
        let node = map
            .location_index(&initial.location)
            .ok_or_else(|| SimError::InvalidMission(format!("unknown start {:?}", initial.location)))?;
        let config = Configuration::from_bit_string(&initial.config_id)?;
        let speed = truth.speed_model.evaluate(&config)?;
        let rate = truth.discharge_model.evaluate(&config)?;
        if speed <= 0.0 || rate <= 0.0 {
            return Err(SimError::InvalidMission(format!(
                "configuration {:?} has non-positive dynamics (speed {speed}, rate {rate})",
                initial.config_id
            )));
        }
        let battery = initial.battery.clamp(0.0, params.max_battery);
        Ok(Self {
            map: map.clone(),
            truth,
            params: params.clone(),
            mission: mission.clone(),
            task_ids,
            tasks_done: 0,
            t: 0.0,
            node,
            heading: initial.heading,
            battery,
            config,
            config_id: initial.config_id.clone(),
            speed,
            rate,
            plan: Vec::new(),
            cursor: 0,
            plan_anchor: None,
            phase: Phase::Awaiting,
            last_status: InstructionStatus::Idle,
            awaiting_since: None,
            pending_install: None,
            schedule: schedule.events().to_vec(),
            sched_idx: 0,
            next_probe: 0.0,
            last_probe: -1.0,
            events: Vec::new(),
            totals: EnergyTotals {
                initial_battery: battery,
                ..EnergyTotals::default()
            },
            ended: None,
        })
    }

    pub fn execute(
        mut self,
        initial_plan: &InstructionGraph,
        controller: &mut dyn MissionController,
    ) -> Trace {
        self.emit(EventKind::Start {
            location: self.map.location_name(self.node).to_string(),
            battery: self.battery,
            config: self.config_id.clone(),
        });
        self.complete_tasks_here();
        if self.ended.is_none() {
            self.install(initial_plan.clone(), "initial".to_string());
            self.probe(controller);
            self.begin_pending_work();
        }

        while self.ended.is_none() {
            let (t_next, kind) = self.next_event();
            self.advance_battery(t_next);
            self.t = t_next;
            let mut probe_due = false;
            match kind {
                Candidate::Perturbation => {
                    let event = self.schedule[self.sched_idx].clone();
                    self.sched_idx += 1;
                    self.apply_perturbation(&event);
                    probe_due = true;
                }
                Candidate::BatteryZero => {
                    self.battery = 0.0;
                    self.emit(EventKind::BatteryDepleted);
                    self.ended = Some(EndKind::Depleted);
                }
                Candidate::PhaseEnd => {
                    probe_due = self.finish_phase();
                }
                Candidate::AwaitTimeout => {
                    self.emit(EventKind::Stalled { awaiting_secs: self.params.await_timeout });
                    self.ended = Some(EndKind::Stalled);
                }
                Candidate::Probe => {
                    self.next_probe += self.params.probe_interval;
                    probe_due = true;
                }
            }
            if self.ended.is_none() && probe_due {
                self.probe(controller);
                self.begin_pending_work();
            }
        }

        self.totals.final_battery = self.battery;
        let score = mission_score(&self.events, &self.mission);
        let completed = self.tasks_done;
        let total = self.task_ids.len();
        self.emit(EventKind::RunEnded { score, completed, total });
        Trace {
            events: self.events,
            score,
            completed_tasks: completed,
            total_tasks: total,
            totals: self.totals,
        }
    }

    fn emit(&mut self, kind: EventKind) {
        debug_assert!(self.events.last().is_none_or(|e| e.t <= self.t));
        self.events.push(TraceEvent { t: self.t, kind });
    }

    /// The next event and its time; ties resolve in the listed priority.
    fn next_event(&self) -> (f64, Candidate) {
        let mut best: Option<(f64, Candidate)> = None;
        let mut consider = |t: f64, c: Candidate| {
            if best.is_none() || t < best.unwrap().0 {
                best = Some((t, c));
            }
        };
        if self.sched_idx < self.schedule.len() {
            consider(self.schedule[self.sched_idx].t.max(self.t), Candidate::Perturbation);
        }
        if let Some(rate) = self.drain_rate() {
            if rate > 0.0 {
                consider(self.t + self.battery / rate, Candidate::BatteryZero);
            }
        }
        match self.phase {
            Phase::Rotating { until, .. }
            | Phase::Traversing { until, .. }
            | Phase::Charging { until, .. } => consider(until, Candidate::PhaseEnd),
            Phase::Awaiting => {
                if let Some(since) = self.awaiting_since {
                    consider(since + self.params.await_timeout, Candidate::AwaitTimeout);
                }
            }
        }
        consider(self.next_probe.max(self.t), Candidate::Probe);
        best.expect("probe tick always exists")
    }

    /// Current battery drain in mWh/s, `None` while charging.
    fn drain_rate(&self) -> Option<f64> {
        match self.phase {
            Phase::Traversing { .. } => Some(self.rate),
            Phase::Charging { .. } => None,
            Phase::Rotating { .. } | Phase::Awaiting => {
                Some(self.rate * self.params.idle_rate_fraction)
            }
        }
    }

    fn advance_battery(&mut self, to_t: f64) {
        let dt = to_t - self.t;
        if dt <= 0.0 {
            return;
        }
        match self.phase {
            Phase::Charging { to_level, .. } => {
                let added = (self.params.charge_rate * dt).min(to_level - self.battery).max(0.0);
                self.battery += added;
                self.totals.charged += added;
            }
            _ => {
                let rate = self.drain_rate().unwrap_or(0.0);
                let drained = (rate * dt).min(self.battery);
                self.battery -= drained;
                self.totals.drained += drained;
            }
        }
    }

    fn apply_perturbation(&mut self, event: &ScheduledEvent) {
        match &event.kind {
            PerturbationKind::Obstacle { arc: (a, b) } => {
                let ia = self.map.location_index(a).expect("validated schedule");
                let ib = self.map.location_index(b).expect("validated schedule");
                self.map.block_arc(ia, ib);
                self.emit(EventKind::PerturbationApplied {
                    description: format!("obstacle on {a}-{b}"),
                });
                // abort an in-progress or pending traversal of that corridor
                let hit = match self.phase {
                    Phase::Traversing { from, to, .. } | Phase::Rotating { from, to, .. } => {
                        (from == ia && to == ib) || (from == ib && to == ia)
                    }
                    _ => false,
                };
                if hit {
                    let (from, to) = match self.phase {
                        Phase::Traversing { from, to, .. } | Phase::Rotating { from, to, .. } => (from, to),
                        _ => unreachable!(),
                    };
                    self.node = from;
                    self.phase = Phase::Awaiting;
                    self.fail_plan(InstructionStatus::ObstacleDetected);
                    self.emit(EventKind::ObstacleDetected {
                        from: self.map.location_name(from).to_string(),
                        to: self.map.location_name(to).to_string(),
                    });
                }
            }
            PerturbationKind::SetBattery { level } => {
                let old = self.battery;
                self.battery = level.clamp(0.0, self.params.max_battery);
                self.totals.perturbation_delta += self.battery - old;
                self.emit(EventKind::PerturbationApplied {
                    description: format!("battery set to {} (was {old:.1})", self.battery),
                });
                if self.battery <= 0.0 {
                    self.emit(EventKind::BatteryDepleted);
                    self.ended = Some(EndKind::Depleted);
                }
            }
        }
    }

    /// Ends the current plan after a failed instruction; the robot then
    /// awaits new instructions until the stall timeout.
    fn fail_plan(&mut self, status: InstructionStatus) {
        self.cursor = self.plan.len();
        self.plan_anchor = None;
        self.last_status = status;
        self.awaiting_since = Some(self.t);
    }

    /// Returns whether a probe is due.
    fn finish_phase(&mut self) -> bool {
        match self.phase {
            Phase::Rotating { from, to, .. } => {
                let arc = self.map.arc_between(from, to).expect("arc existed at start");
                self.heading = arc.heading;
                if self.map.is_blocked(from, to) {
                    // blocked while rotating toward it
                    self.phase = Phase::Awaiting;
                    self.fail_plan(InstructionStatus::ObstacleDetected);
                    self.emit(EventKind::ObstacleDetected {
                        from: self.map.location_name(from).to_string(),
                        to: self.map.location_name(to).to_string(),
                    });
                    return true;
                }
                let until = self.t + arc.distance_m / self.speed;
                self.phase = Phase::Traversing { from, to, started: self.t, until };
                self.last_status = InstructionStatus::Moving;
                false
            }
            Phase::Traversing { from, to, .. } => {
                self.node = to;
                self.phase = Phase::Awaiting;
                self.cursor += 1;
                self.last_status = InstructionStatus::Idle;
                self.plan_anchor = Some(to);
                self.emit(EventKind::Arrived {
                    from: self.map.location_name(from).to_string(),
                    location: self.map.location_name(to).to_string(),
                });
                self.complete_tasks_here();
                true
            }
            Phase::Charging { to_level, .. } => {
                self.battery = to_level.min(self.params.max_battery);
                self.phase = Phase::Awaiting;
                self.cursor += 1;
                self.last_status = InstructionStatus::Idle;
                self.emit(EventKind::ChargeCompleted { level: self.battery });
                true
            }
            Phase::Awaiting => false,
        }
    }

    fn complete_tasks_here(&mut self) {
        while self.tasks_done < self.task_ids.len() && self.task_ids[self.tasks_done] == self.node {
            self.emit(EventKind::TaskCompleted {
                location: self.map.location_name(self.node).to_string(),
                index: self.tasks_done,
            });
            self.tasks_done += 1;
        }
        if self.tasks_done == self.task_ids.len() {
            self.emit(EventKind::MissionCompleted);
            self.ended = Some(EndKind::Completed);
        }
    }

    fn install(&mut self, graph: InstructionGraph, reason: String) {
        self.emit(EventKind::PlanInstalled { instructions: graph.instructions.len(), reason });
        self.plan = graph.instructions;
        self.cursor = 0;
        self.plan_anchor = Some(self.node);
        self.awaiting_since = None;
        self.last_status = InstructionStatus::Idle;
    }

    /// After probes: apply a pending plan swap if the robot is at a node,
    /// then start the next instruction when none is active.
    fn begin_pending_work(&mut self) {
        if self.ended.is_some() || self.phase != Phase::Awaiting {
            return;
        }
        if let Some((graph, reason)) = self.pending_install.take() {
            self.install(graph, reason);
        }
        if self.cursor < self.plan.len() {
            self.start_next_instruction();
        } else if self.awaiting_since.is_none() {
            self.awaiting_since = Some(self.t);
        }
    }

    fn start_next_instruction(&mut self) {
        while self.ended.is_none() && self.cursor < self.plan.len() {
            match self.plan[self.cursor].clone() {
                Instruction::MoveTo { location } => {
                    let Some(to) = self.map.location_index(&location) else {
                        self.emit(EventKind::InstructionRejected {
                            reason: format!("unknown location {location:?}"),
                        });
                        self.fail_plan(InstructionStatus::Rejected);
                        return;
                    };
                    let Some(arc) = self.map.arc_between(self.node, to) else {
                        self.emit(EventKind::InstructionRejected {
                            reason: format!(
                                "{} is not adjacent to {}",
                                location,
                                self.map.location_name(self.node)
                            ),
                        });
                        self.fail_plan(InstructionStatus::Rejected);
                        return;
                    };
                    if self.map.is_blocked(self.node, to) {
                        self.emit(EventKind::ObstacleDetected {
                            from: self.map.location_name(self.node).to_string(),
                            to: location,
                        });
                        self.fail_plan(InstructionStatus::ObstacleDetected);
                        return;
                    }
                    let rot = rotation_time(self.heading, arc.heading);
                    if rot > 0.0 {
                        self.phase = Phase::Rotating { from: self.node, to, until: self.t + rot };
                        self.last_status = InstructionStatus::Rotating;
                    } else {
                        let until = self.t + arc.distance_m / self.speed;
                        self.phase = Phase::Traversing { from: self.node, to, started: self.t, until };
                        self.last_status = InstructionStatus::Moving;
                    }
                    return;
                }
                Instruction::SetConfig { config } => {
                    let parsed = Configuration::from_bit_string(&config)
                        .ok()
                        .filter(|c| c.len() == self.truth.discharge_model.dimension);
                    let Some(parsed) = parsed else {
                        self.emit(EventKind::InstructionRejected {
                            reason: format!("unusable configuration id {config:?}"),
                        });
                        self.fail_plan(InstructionStatus::Rejected);
                        return;
                    };
                    let speed = self.truth.speed_model.evaluate(&parsed).unwrap();
                    let rate = self.truth.discharge_model.evaluate(&parsed).unwrap();
                    if speed <= 0.0 || rate <= 0.0 {
                        self.emit(EventKind::InstructionRejected {
                            reason: format!("configuration {config:?} has non-positive dynamics"),
                        });
                        self.fail_plan(InstructionStatus::Rejected);
                        return;
                    }
                    self.config = parsed;
                    self.config_id = config.clone();
                    self.speed = speed;
                    self.rate = rate;
                    self.emit(EventKind::ConfigChanged { config });
                    self.cursor += 1;
                }
                Instruction::Charge { to_level } => {
                    if !self.map.is_charger(self.node) {
                        self.emit(EventKind::InstructionRejected {
                            reason: format!(
                                "{} is not a charging station",
                                self.map.location_name(self.node)
                            ),
                        });
                        self.fail_plan(InstructionStatus::Rejected);
                        return;
                    }
                    let target = to_level.clamp(0.0, self.params.max_battery);
                    if target > self.battery {
                        let until = self.t + (target - self.battery) / self.params.charge_rate;
                        self.phase = Phase::Charging { to_level: target, until };
                        self.last_status = InstructionStatus::Charging;
                        self.emit(EventKind::ChargeStarted { to_level: target });
                        return;
                    }
                    self.emit(EventKind::ChargeCompleted { level: self.battery });
                    self.cursor += 1;
                }
            }
        }
        if self.cursor >= self.plan.len() && self.awaiting_since.is_none() {
            self.awaiting_since = Some(self.t);
        }
    }

    fn position(&self) -> Position {
        match self.phase {
            Phase::Traversing { from, to, started, .. } => Position::Arc {
                from,
                to,
                progress_m: (self.t - started) * self.speed,
            },
            _ => Position::Node { location: self.node },
        }
    }

    fn probe(&mut self, controller: &mut dyn MissionController) {
        if self.t <= self.last_probe {
            return; // one probe per instant keeps record timestamps strict
        }
        self.last_probe = self.t;
        let record = MonitorRecord {
            t: self.t,
            position: self.position(),
            heading: self.heading,
            battery: self.battery,
            config_id: self.config_id.clone(),
            last_status: self.last_status,
        };
        let view = WorldView {
            map: &self.map,
            tasks_remaining: &self.task_ids[self.tasks_done..],
            remaining_instructions: &self.plan[self.cursor.min(self.plan.len())..],
            plan_anchor: self.plan_anchor,
            max_battery: self.params.max_battery,
        };
        let out = controller.on_probe(&record, &view);
        for (finding, detail) in out.findings {
            self.emit(EventKind::FindingRaised { finding, detail });
        }
        if let Some(reason) = out.reject {
            self.emit(EventKind::PlanRejected { reason });
        }
        if let Some((graph, reason)) = out.install {
            if self.phase == Phase::Awaiting {
                self.install(graph, reason);
            } else {
                self.pending_install = Some((graph, reason));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Candidate {
    Perturbation,
    BatteryZero,
    PhaseEnd,
    AwaitTimeout,
    Probe,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{InfluenceModel, Term};
    use crate::config::GroundTruthModelPair;
    use crate::planner::demo_map;

    /// Ground truth with constant dynamics: 41.65 mWh/s and 0.58333 m/s
    /// everywhere, independent of the 2 option bits.
    pub(crate) fn constant_truth() -> GroundTruthModelPair {
        GroundTruthModelPair {
            id: 0,
            discharge_model: InfluenceModel::intercept_only(2, 41.65),
            speed_model: InfluenceModel::intercept_only(2, 0.58333),
            complexity: crate::config::Complexity::Easy,
            seed: 0,
        }
    }

    /// Truth where option 0 switches between slow/frugal and fast/hungry.
    pub(crate) fn two_mode_truth() -> GroundTruthModelPair {
        GroundTruthModelPair {
            id: 1,
            discharge_model: InfluenceModel::new(2, 41.65, vec![Term::new(vec![0], 42.35)])
                .unwrap(),
            speed_model: InfluenceModel::new(2, 0.58333, vec![Term::new(vec![0], 0.55)]).unwrap(),
            complexity: crate::config::Complexity::Easy,
            seed: 1,
        }
    }

    fn initial(location: &str) -> InitialState {
        InitialState {
            location: location.into(),
            heading: Heading::South,
            battery: 32_560.0,
            config_id: "00".into(),
        }
    }

    fn move_plan(locations: &[&str]) -> InstructionGraph {
        InstructionGraph {
            instructions: locations
                .iter()
                .map(|l| Instruction::MoveTo { location: l.to_string() })
                .collect(),
            predicted_time: 0.0,
            predicted_energy: 0.0,
        }
    }

    fn run_simple(
        mission_tasks: &[&str],
        plan: &InstructionGraph,
        schedule: PerturbationSchedule,
    ) -> Trace {
        let map = demo_map();
        let truth = constant_truth();
        let mission = Mission::new(mission_tasks.iter().map(|s| s.to_string()).collect());
        run(
            &map,
            &truth,
            &mission,
            &initial("l1"),
            &SimParams::default(),
            &schedule,
            plan,
            &mut NoneController,
        )
        .unwrap()
    }

    #[test]
    fn empty_mission_scores_one_with_zero_moves() {
        let trace = run_simple(&[], &InstructionGraph::empty(), PerturbationSchedule::empty());
        assert_eq!(trace.score, 1.0);
        assert_eq!(trace.count(|k| matches!(k, EventKind::Arrived { .. })), 0);
        assert!(trace.count(|k| matches!(k, EventKind::MissionCompleted)) == 1);
    }

    #[test]
    fn single_move_arrives_on_schedule_and_drains_battery() {
        let trace = run_simple(&["l2"], &move_plan(&["l2"]), PerturbationSchedule::empty());
        assert_eq!(trace.score, 1.0);
        let arrival = trace
            .events
            .iter()
            .find(|e| matches!(e.kind, EventKind::Arrived { .. }))
            .expect("an arrival");
        // initial heading south, arc heading south: no rotation
        assert!((arrival.t - 8.5714).abs() < 1e-2, "arrived at {}", arrival.t);
        let used = trace.totals.initial_battery - trace.totals.final_battery;
        assert!((used - 357.0).abs() < 1.5, "used {used}");
    }

    #[test]
    fn set_battery_to_zero_halts_the_mission() {
        let schedule = PerturbationSchedule::new(vec![ScheduledEvent {
            t: 1.0,
            kind: PerturbationKind::SetBattery { level: 0.0 },
        }])
        .unwrap();
        let trace = run_simple(&["l2"], &move_plan(&["l2"]), schedule);
        assert!(trace.score < 1.0);
        let kinds: Vec<&EventKind> = trace.events.iter().map(|e| &e.kind).collect();
        let pert = kinds
            .iter()
            .position(|k| matches!(k, EventKind::PerturbationApplied { .. }))
            .unwrap();
        let dead = kinds.iter().position(|k| matches!(k, EventKind::BatteryDepleted)).unwrap();
        assert!(pert < dead, "perturbation precedes shutdown");
        assert!(!kinds.iter().any(|k| matches!(k, EventKind::Arrived { .. })));
    }

    #[test]
    fn obstacle_mid_traversal_returns_to_origin() {
        let schedule = PerturbationSchedule::new(vec![ScheduledEvent {
            t: 2.0,
            kind: PerturbationKind::Obstacle { arc: ("l1".into(), "l2".into()) },
        }])
        .unwrap();
        let trace = run_simple(&["l2"], &move_plan(&["l2"]), schedule);
        assert_eq!(trace.score, 0.0);
        assert!(trace.count(|k| matches!(k, EventKind::ObstacleDetected { .. })) == 1);
        // the robot never arrives; the run stalls awaiting instructions
        assert_eq!(trace.count(|k| matches!(k, EventKind::Arrived { .. })), 0);
        assert!(trace.count(|k| matches!(k, EventKind::Stalled { .. })) == 1);
        // time spent before the obstacle is kept
        let stalled = trace.events.iter().find(|e| matches!(e.kind, EventKind::Stalled { .. })).unwrap();
        assert!(stalled.t >= 2.0);
    }

    #[test]
    fn set_battery_clamps_to_capacity() {
        let schedule = PerturbationSchedule::new(vec![ScheduledEvent {
            t: 0.5,
            kind: PerturbationKind::SetBattery { level: 99_999.0 },
        }])
        .unwrap();
        let trace = run_simple(&["l2"], &move_plan(&["l2"]), schedule);
        assert!(trace
            .events
            .iter()
            .any(|e| matches!(&e.kind, EventKind::PerturbationApplied { description } if description.contains("32560"))));
        assert_eq!(trace.score, 1.0);
    }

    #[test]
    fn duplicate_obstacles_are_idempotent() {
        let mk = |t: f64| ScheduledEvent {
            t,
            kind: PerturbationKind::Obstacle { arc: ("l2".into(), "l3".into()) },
        };
        let schedule = PerturbationSchedule::new(vec![mk(0.5), mk(0.6)]).unwrap();
        let trace = run_simple(&["l2"], &move_plan(&["l2"]), schedule);
        // unrelated arc: the mission still completes
        assert_eq!(trace.score, 1.0);
        assert_eq!(
            trace.count(|k| matches!(k, EventKind::PerturbationApplied { .. })),
            2
        );
    }

    #[test]
    fn runs_are_deterministic() {
        let schedule = PerturbationSchedule::new(vec![ScheduledEvent {
            t: 3.0,
            kind: PerturbationKind::SetBattery { level: 2_000.0 },
        }])
        .unwrap();
        let a = run_simple(&["l2", "l3"], &move_plan(&["l2", "l3"]), schedule.clone());
        let b = run_simple(&["l2", "l3"], &move_plan(&["l2", "l3"]), schedule);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn energy_is_conserved() {
        let schedule = PerturbationSchedule::new(vec![ScheduledEvent {
            t: 4.0,
            kind: PerturbationKind::SetBattery { level: 5_000.0 },
        }])
        .unwrap();
        let trace = run_simple(&["l2", "l5"], &move_plan(&["l2", "l5"]), schedule);
        let t = trace.totals;
        let expected = t.initial_battery - t.drained + t.charged + t.perturbation_delta;
        assert!(
            (t.final_battery - expected).abs() < 1e-6,
            "final {} vs expected {expected}",
            t.final_battery
        );
    }

    #[test]
    fn rejected_instruction_keeps_the_run_alive_until_timeout() {
        let trace = run_simple(&["l5"], &move_plan(&["l5"]), PerturbationSchedule::empty());
        assert!(trace.count(|k| matches!(k, EventKind::InstructionRejected { .. })) == 1);
        assert!(trace.count(|k| matches!(k, EventKind::Stalled { .. })) == 1);
        assert_eq!(trace.score, 0.0);
    }

    #[test]
    fn no_completed_traversal_of_a_blocked_arc_after_block_time() {
        let schedule = PerturbationSchedule::new(vec![ScheduledEvent {
            t: 1.0,
            kind: PerturbationKind::Obstacle { arc: ("l2".into(), "l5".into()) },
        }])
        .unwrap();
        let trace = run_simple(&["l5"], &move_plan(&["l2", "l5"]), schedule);
        let mut block_time = None;
        for e in &trace.events {
            match &e.kind {
                EventKind::PerturbationApplied { description } if description.contains("obstacle") => {
                    block_time = Some(e.t);
                }
                EventKind::Arrived { from, location } => {
                    if let Some(bt) = block_time {
                        let crossed = (from == "l2" && location == "l5")
                            || (from == "l5" && location == "l2");
                        assert!(!(crossed && e.t > bt), "blocked arc traversed at {}", e.t);
                    }
                }
                _ => {}
            }
        }
        assert!(trace.score < 1.0);
    }

    #[test]
    fn appending_perturbations_never_raises_the_score() {
        let events = vec![
            ScheduledEvent { t: 2.0, kind: PerturbationKind::SetBattery { level: 400.0 } },
            ScheduledEvent {
                t: 9.0,
                kind: PerturbationKind::Obstacle { arc: ("l2".into(), "l5".into()) },
            },
            ScheduledEvent { t: 11.0, kind: PerturbationKind::SetBattery { level: 100.0 } },
        ];
        let mut last_score = f64::INFINITY;
        for k in 0..=events.len() {
            let schedule = PerturbationSchedule::new(events[..k].to_vec()).unwrap();
            let trace = run_simple(&["l2", "l5"], &move_plan(&["l2", "l5"]), schedule);
            assert!(
                trace.score <= last_score.min(1.0) + 1e-12,
                "score rose from {last_score} to {} with {k} perturbations",
                trace.score
            );
            last_score = trace.score;
        }
    }

    #[test]
    fn probe_records_have_strictly_increasing_timestamps() {
        struct Recording(Vec<f64>);
        impl MissionController for Recording {
            fn on_probe(&mut self, record: &MonitorRecord, _view: &WorldView<'_>) -> ControlOutput {
                self.0.push(record.t);
                ControlOutput::nothing()
            }
        }
        let map = demo_map();
        let truth = constant_truth();
        let mission = Mission::new(vec!["l2".into()]);
        let mut recorder = Recording(Vec::new());
        run(
            &map,
            &truth,
            &mission,
            &initial("l1"),
            &SimParams::default(),
            &PerturbationSchedule::empty(),
            &move_plan(&["l2"]),
            &mut recorder,
        )
        .unwrap();
        assert!(recorder.0.len() >= 8, "roughly one probe per second");
        assert!(recorder.0.windows(2).all(|w| w[0] < w[1]));
    }
}
