//! Force-triggered loading controller.
//!
//! The machine approaches the pile, pushes the bucket in, and starts lifting
//! and tilting once the digging force crosses per-actuator thresholds. Digging
//! ends when both joints reach their targets, on breakout or on stall; the
//! machine then brakes for a fixed time and reverses out while curling the
//! bucket.

use std::fmt;

use crate::config::{ActionParams, ControlConstants, MachineSpec};
use crate::machine::{ActuatorCommand, Commands, MachineState};
use crate::terrain::{DigForce, Point2};

/// Digging force (N) that counts as soil contact.
pub const CONTACT_FORCE: f64 = 1_000.0;
/// Horizontal look-ahead (m) from the tip for contact detection.
pub const CONTACT_LOOKAHEAD: f64 = 0.05;
/// Height (m) the tip must clear the surface by to count as broken out.
pub const BREAKOUT_CLEARANCE: f64 = 0.001;
/// Time (s) without digging force after contact that also counts as broken out.
pub const DISENGAGE_TIME: f64 = 1.0;
pub const STALL_SPEED: f64 = 0.01;
pub const STALL_RATE: f64 = 0.005;
pub const STALL_DWELL: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Approach,
    Penetrate,
    Dig,
    Brake,
    Reverse,
    Done,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Approach => "approach",
            Phase::Penetrate => "penetrate",
            Phase::Dig => "dig",
            Phase::Brake => "brake",
            Phase::Reverse => "reverse",
            Phase::Done => "done",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why digging ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DigEnd {
    TargetsReached,
    Breakout,
    Stall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Enter(Phase),
    Contact,
    LiftLatched,
    TiltLatched,
    LiftTarget,
    TiltTarget,
    Breakout,
    Stall,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::Enter(p) => write!(f, "enter_{p}"),
            EventKind::Contact => f.write_str("contact"),
            EventKind::LiftLatched => f.write_str("lift_latched"),
            EventKind::TiltLatched => f.write_str("tilt_latched"),
            EventKind::LiftTarget => f.write_str("lift_target"),
            EventKind::TiltTarget => f.write_str("tilt_target"),
            EventKind::Breakout => f.write_str("breakout"),
            EventKind::Stall => f.write_str("stall"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
}

/// What the controller sees at the start of a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub t: f64,
    pub state: MachineState,
    pub dig: DigForce,
    pub tip: Point2,
    /// Surface height under the tip.
    pub surface_at_tip: f64,
    /// Surface height `CONTACT_LOOKAHEAD` ahead of the tip.
    pub surface_ahead: f64,
    pub toe_x: f64,
}

/// One sample for stall detection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionSample {
    pub v: f64,
    pub omega_boom: f64,
    pub omega_bucket: f64,
}

impl MotionSample {
    pub fn of(state: &MachineState) -> Self {
        Self {
            v: state.v,
            omega_boom: state.omega_boom,
            omega_bucket: state.omega_bucket,
        }
    }

    pub fn is_still(&self) -> bool {
        self.v.abs() < STALL_SPEED && self.omega_boom.abs() < STALL_RATE && self.omega_bucket.abs() < STALL_RATE
    }
}

/// True when every sample in a window spanning at least `STALL_DWELL` is still.
pub fn detect_stall(window: &[MotionSample], dt: f64) -> bool {
    !window.is_empty() && window.len() as f64 * dt >= STALL_DWELL - 1e-9 && window.iter().all(MotionSample::is_still)
}

/// True once digging has begun and the tip is clearly above the surface.
pub fn detect_breakout(phase: Phase, tip: Point2, surface_at_tip: f64) -> bool {
    phase >= Phase::Penetrate && tip.z > surface_at_tip + BREAKOUT_CLEARANCE
}

/// Controller memory carried between steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Controller {
    pub phase: Phase,
    pub phase_entry: f64,
    pub lift_triggered: bool,
    pub tilt_triggered: bool,
    pub lift_at_target: bool,
    pub tilt_at_target: bool,
    /// Vehicle position at first contact.
    pub entry_x: Option<f64>,
    pub contact_time: Option<f64>,
    pub dig_end: Option<DigEnd>,
    /// Set once the digging force has exceeded `CONTACT_FORCE`.
    pub engaged: bool,
    /// Set once the tip has left the soil after contact.
    pub broken_out: bool,
    brake_steps: u32,
    still_steps: u32,
    disengaged_steps: u32,
    pub events: Vec<Event>,
}

impl Default for Controller {
    fn default() -> Self {
        Self::new()
    }
}

impl Controller {
    pub fn new() -> Self {
        Self {
            phase: Phase::Approach,
            phase_entry: 0.0,
            lift_triggered: false,
            tilt_triggered: false,
            lift_at_target: false,
            tilt_at_target: false,
            entry_x: None,
            contact_time: None,
            dig_end: None,
            engaged: false,
            broken_out: false,
            brake_steps: 0,
            still_steps: 0,
            disengaged_steps: 0,
            events: Vec::new(),
        }
    }

    /// Steps spent in the current brake.
    pub fn brake_steps(&self) -> u32 {
        self.brake_steps
    }

    fn emit(&mut self, kind: EventKind, t: f64) {
        self.events.push(Event { kind, t });
    }

    fn enter(&mut self, phase: Phase, t: f64) {
        debug_assert!(phase > self.phase, "phase {phase} after {}", self.phase);
        self.phase = phase;
        self.phase_entry = t;
        self.emit(EventKind::Enter(phase), t);
    }

    fn event_time(&self, kind: EventKind) -> Option<f64> {
        self.events.iter().find(|e| e.kind == kind).map(|e| e.t)
    }

    /// Time the brake released, if it did.
    pub fn brake_end(&self) -> Option<f64> {
        self.event_time(EventKind::Enter(Phase::Reverse))
    }
}

fn in_contact(obs: &Observation) -> bool {
    obs.dig.magnitude > CONTACT_FORCE || obs.surface_ahead > obs.tip.z || obs.tip.x >= obs.toe_x
}

/// Advance the state machine on `obs` and return this step's actuator commands.
pub fn controller_step(
    ctrl: &mut Controller,
    obs: &Observation,
    action: &ActionParams,
    constants: &ControlConstants,
    machine: &MachineSpec,
) -> Commands {
    let t = obs.t;
    let s = &obs.state;
    let drive = machine.drive_limits();
    let lift = machine.lift_limits();
    let tilt = machine.tilt_limits();
    let v_max = constants.v_drive_max();
    let lift_rate = constants.lift_rate_max(machine);
    let tilt_rate = constants.tilt_rate_max(machine);
    let force = obs.dig.magnitude;

    if ctrl.phase == Phase::Approach && in_contact(obs) {
        ctrl.entry_x = Some(s.x);
        ctrl.contact_time = Some(t);
        ctrl.emit(EventKind::Contact, t);
        ctrl.enter(Phase::Penetrate, t);
    }

    if matches!(ctrl.phase, Phase::Penetrate | Phase::Dig) {
        if !ctrl.lift_triggered && force >= action.lift_trigger() * constants.f_dig0 {
            ctrl.lift_triggered = true;
            ctrl.emit(EventKind::LiftLatched, t);
        }
        if !ctrl.tilt_triggered && force >= action.tilt_trigger() * constants.f_dig0 {
            ctrl.tilt_triggered = true;
            ctrl.emit(EventKind::TiltLatched, t);
        }
        if ctrl.phase == Phase::Penetrate && (ctrl.lift_triggered || ctrl.tilt_triggered) {
            ctrl.enter(Phase::Dig, t);
        }
        if ctrl.lift_triggered && !ctrl.lift_at_target && s.theta_boom >= action.boom_target_deg().to_radians() {
            ctrl.lift_at_target = true;
            ctrl.emit(EventKind::LiftTarget, t);
        }
        if ctrl.tilt_triggered && !ctrl.tilt_at_target && s.theta_bucket >= action.bucket_target_deg().to_radians() {
            ctrl.tilt_at_target = true;
            ctrl.emit(EventKind::TiltTarget, t);
        }

        let steps = |secs: f64| (secs / constants.dt).round() as u32;
        ctrl.still_steps = if MotionSample::of(s).is_still() { ctrl.still_steps + 1 } else { 0 };
        ctrl.disengaged_steps = if force > CONTACT_FORCE { 0 } else { ctrl.disengaged_steps + 1 };
        ctrl.engaged |= force > CONTACT_FORCE;
        let breakout = (ctrl.engaged && detect_breakout(ctrl.phase, obs.tip, obs.surface_at_tip))
            || ctrl.disengaged_steps >= steps(DISENGAGE_TIME);

        let end = if ctrl.lift_at_target && ctrl.tilt_at_target {
            Some(DigEnd::TargetsReached)
        } else if breakout {
            Some(DigEnd::Breakout)
        } else if ctrl.still_steps >= steps(STALL_DWELL) {
            Some(DigEnd::Stall)
        } else {
            None
        };
        if let Some(end) = end {
            match end {
                DigEnd::Breakout => ctrl.emit(EventKind::Breakout, t),
                DigEnd::Stall => ctrl.emit(EventKind::Stall, t),
                DigEnd::TargetsReached => {}
            }
            ctrl.broken_out |= breakout;
            ctrl.dig_end = Some(end);
            ctrl.brake_steps = 0;
            ctrl.enter(Phase::Brake, t);
        }
    }

    if ctrl.phase == Phase::Brake && ctrl.brake_steps >= constants.brake_steps() {
        ctrl.enter(Phase::Reverse, t);
    }

    if ctrl.phase == Phase::Reverse {
        if !ctrl.broken_out && detect_breakout(ctrl.phase, obs.tip, obs.surface_at_tip) {
            ctrl.broken_out = true;
            ctrl.emit(EventKind::Breakout, t);
        }
        let entry = ctrl.entry_x.unwrap_or(s.x);
        if entry - s.x >= constants.reverse_distance {
            ctrl.enter(Phase::Done, t);
        }
    }

    match ctrl.phase {
        Phase::Approach => Commands {
            drive: ActuatorCommand::speed(action.approach_speed() * v_max, &drive),
            ..Commands::hold_all()
        },
        Phase::Penetrate | Phase::Dig => {
            let joint = |triggered: bool, done: bool, rate: f64, limits| {
                if triggered && !done {
                    ActuatorCommand::speed(rate, limits)
                } else {
                    ActuatorCommand::hold()
                }
            };
            Commands {
                drive: ActuatorCommand::speed(action.penetration_speed() * v_max, &drive),
                lift: joint(ctrl.lift_triggered, ctrl.lift_at_target, action.lift_speed() * lift_rate, &lift),
                tilt: joint(ctrl.tilt_triggered, ctrl.tilt_at_target, action.tilt_speed() * tilt_rate, &tilt),
            }
        }
        Phase::Brake => {
            ctrl.brake_steps += 1;
            Commands::hold_all()
        }
        Phase::Reverse => {
            let k = constants.reverse_fraction;
            let tilt_cmd = if s.theta_bucket < constants.bucket_end_angle_deg.to_radians() {
                ActuatorCommand::speed(k * tilt_rate, &tilt)
            } else {
                ActuatorCommand::hold()
            };
            let lift_cmd = if ctrl.broken_out && s.theta_boom < constants.boom_end_angle_deg.to_radians() {
                ActuatorCommand::speed(k * lift_rate, &lift)
            } else {
                ActuatorCommand::hold()
            };
            Commands {
                drive: ActuatorCommand::speed(-k * v_max, &drive),
                lift: lift_cmd,
                tilt: tilt_cmd,
            }
        }
        Phase::Done => Commands::hold_all(),
    }
}
