//! One loading cycle from approach to reverse, its time series and metrics.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::config::{run_id, ActionParams, ControlConstants, MachineSpec, PileSpec};
use crate::controller::{controller_step, Controller, DigEnd, Event, EventKind, Observation, Phase, CONTACT_LOOKAHEAD};
use crate::error::MetricsError;
use crate::machine::{bucket_tip_pose, carry_capacity, step_dynamics, tip_velocity, MachineState};
use crate::terrain::{dig_resistance, PileState, Point2, WedgeTable};

/// Distance (m) from the vehicle start to the pile toe.
pub const START_OFFSET: f64 = 8.0;
/// Flat ground (m) kept beyond the crest.
pub const CREST_MARGIN: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flag {
    Completed,
    Stalled,
    BreakoutEarly,
    Timeout,
    NumericError,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Completed => "completed",
            Flag::Stalled => "stalled",
            Flag::BreakoutEarly => "breakout_early",
            Flag::Timeout => "timeout",
            Flag::NumericError => "numeric_error",
        }
    }

    /// The cycle ran to the end of its reverse, whatever ended the dig.
    pub fn is_finished(self) -> bool {
        !matches!(self, Flag::Timeout | Flag::NumericError)
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "completed" => Flag::Completed,
            "stalled" => Flag::Stalled,
            "breakout_early" => Flag::BreakoutEarly,
            "timeout" => Flag::Timeout,
            "numeric_error" => Flag::NumericError,
            other => return Err(format!("unknown flag `{other}`")),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    /// kg/kJ
    pub p_e: f64,
    /// kg/s
    pub p_p: f64,
    pub p_b: f64,
    /// % of bucket volume
    pub s_load: f64,
}

/// Performance measures of one cycle. With no load, all three rates are zero.
pub fn compute_metrics(
    m_load: f64,
    t_load: f64,
    work: f64,
    v_load: f64,
    v_spill: f64,
    v_bucket: f64,
) -> Result<Metrics, MetricsError> {
    let s_load = v_spill / v_bucket * 100.0;
    if m_load <= 0.0 {
        return Ok(Metrics {
            s_load,
            ..Metrics::default()
        });
    }
    if !(t_load > 0.0) {
        return Err(MetricsError::NonPositiveDuration { m_load, t_load });
    }
    if !(work > 0.0) {
        return Err(MetricsError::NonPositiveWork { m_load, work });
    }
    Ok(Metrics {
        p_e: m_load / work,
        p_p: m_load / t_load,
        p_b: v_load / v_bucket,
        s_load,
    })
}

/// Loading time: first soil contact to the end of the brake.
///
/// Without contact it is zero; a cycle that never released the brake is
/// measured to `end_time`.
pub fn t_load_definition(events: &[Event], end_time: f64) -> f64 {
    let Some(contact) = events.iter().find(|e| e.kind == EventKind::Contact) else {
        return 0.0;
    };
    let end = events
        .iter()
        .find(|e| e.kind == EventKind::Enter(Phase::Reverse))
        .map_or(end_time, |e| e.t);
    end - contact.t
}

/// Scalar outcome of one cycle; one row of the results table.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadingRecord {
    pub run_id: String,
    pub pile: String,
    pub soil: String,
    pub slope_deg: f64,
    pub action: ActionParams,
    pub m_load: f64,
    pub t_load: f64,
    /// kJ
    pub work: f64,
    pub s_load: f64,
    pub p_e: f64,
    pub p_p: f64,
    pub p_b: f64,
    pub flag: Flag,
}

/// `w · (P_e, P_p, P_b)`.
pub fn weighted_score(record: &LoadingRecord, w: [f64; 3]) -> f64 {
    w[0] * record.p_e + w[1] * record.p_p + w[2] * record.p_b
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub theta_boom: f64,
    pub theta_bucket: f64,
    pub omega_boom: f64,
    pub omega_bucket: f64,
    pub f_drive: f64,
    pub f_lift: f64,
    pub f_tilt: f64,
    pub f_dig: f64,
    pub work: f64,
    pub load_mass: f64,
    pub phase: Phase,
    pub tip: Point2,
}

impl SeriesRow {
    fn new(t: f64, s: &MachineState, f_dig: f64, phase: Phase, tip: Point2) -> Self {
        Self {
            t,
            x: s.x,
            v: s.v,
            theta_boom: s.theta_boom,
            theta_bucket: s.theta_bucket,
            omega_boom: s.omega_boom,
            omega_bucket: s.omega_bucket,
            f_drive: s.f_drive,
            f_lift: s.f_lift,
            f_tilt: s.f_tilt,
            f_dig,
            work: s.work,
            load_mass: s.load_mass,
            phase,
            tip,
        }
    }

    /// Positive actuator power (W).
    pub fn power(&self) -> f64 {
        crate::machine::actuator_power(self.f_drive, self.v, self.f_lift, self.omega_boom, self.f_tilt, self.omega_bucket)
    }
}

pub const SERIES_HEADER: &str = "t,x,v,theta_boom,theta_bucket,F_drive,F_lift,F_tilt,F_dig,W_accum,load_mass,phase";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeriesLog {
    pub rows: Vec<SeriesRow>,
}

impl SeriesLog {
    /// Angles in radians, forces in N or N·m, work in kJ.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 160);
        out.push_str(SERIES_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.x,
                r.v,
                r.theta_boom,
                r.theta_bucket,
                r.f_drive,
                r.f_lift,
                r.f_tilt,
                r.f_dig,
                r.work,
                r.load_mass,
                r.phase
            );
        }
        out
    }

    /// Trapezoidal integral of the logged positive power (kJ).
    pub fn reintegrate_work(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| 0.5 * (w[0].power() + w[1].power()) * (w[1].t - w[0].t))
            .sum::<f64>()
            / 1000.0
    }

    pub fn tip_path(&self) -> Vec<Point2> {
        self.rows.iter().map(|r| r.tip).collect()
    }
}

/// Everything a single run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: LoadingRecord,
    pub events: Vec<Event>,
    pub series: Option<SeriesLog>,
    pub pile: PileState,
    pub controller: Controller,
    /// Largest relative mass-balance error seen at any step.
    pub max_conservation_error: f64,
    pub steps: usize,
    pub end_time: f64,
    pub v_load: f64,
    pub v_spill: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub log_series: bool,
}

/// Domain length for a pile: start area, ramp and a flat margin past the crest.
pub fn domain_length(pile: &PileSpec) -> f64 {
    pile.toe_x + pile.ramp_length() + CREST_MARGIN
}

/// Run one loading cycle and return its scalar record.
///
/// `seed` is accepted for stochastic soil variants; the current physics is deterministic.
pub fn run_loading_cycle(
    pile: &PileSpec,
    machine: &MachineSpec,
    action: &ActionParams,
    constants: &ControlConstants,
    seed: u64,
) -> LoadingRecord {
    run_loading_cycle_with(pile, machine, action, constants, seed, RunOptions::default()).record
}

/// Run one loading cycle, optionally keeping the full time series.
pub fn run_loading_cycle_with(
    pile_spec: &PileSpec,
    machine: &MachineSpec,
    action: &ActionParams,
    constants: &ControlConstants,
    _seed: u64,
    options: RunOptions,
) -> RunOutput {
    let dt = constants.dt;
    let start_x = pile_spec.toe_x - START_OFFSET;
    let mut pile = PileState::new(pile_spec, machine.bucket_width, domain_length(pile_spec))
        .expect("domain length covers the ramp by construction");
    let mut wedge = WedgeTable::new(&pile_spec.soil);
    let mut state = MachineState::at_rest(start_x, machine);
    let mut ctrl = Controller::new();
    let mut series = options.log_series.then(SeriesLog::default);
    let mut max_error = 0.0f64;
    let mut numeric_error = false;
    let max_steps = (constants.timeout / dt).round() as usize;

    let mut step = 0usize;
    if let Some(log) = series.as_mut() {
        log.rows.push(SeriesRow::new(0.0, &state, 0.0, Phase::Approach, bucket_tip_pose(&state, machine).0));
    }
    while step < max_steps {
        let t = step as f64 * dt;
        let (tip, _) = bucket_tip_pose(&state, machine);
        let tip_v = tip_velocity(&state, machine);
        let dig = dig_resistance(&pile, &mut wedge, tip, tip_v, state.theta_bucket);
        let obs = Observation {
            t,
            state,
            dig,
            tip,
            surface_at_tip: pile.surface_height(tip.x),
            surface_ahead: pile.surface_height(tip.x + CONTACT_LOOKAHEAD),
            toe_x: pile_spec.toe_x,
        };
        let commands = controller_step(&mut ctrl, &obs, action, constants, machine);
        if ctrl.phase == Phase::Done {
            break;
        }
        let phase = ctrl.phase;

        let next = match step_dynamics(&state, &commands, &dig, machine, dt) {
            Ok(next) => next,
            Err(_) => {
                numeric_error = true;
                break;
            }
        };
        let (new_tip, _) = bucket_tip_pose(&next, machine);
        let capacity = carry_capacity(next.theta_bucket, machine);
        pile.excavate_step(tip, new_tip, next.theta_bucket, capacity - pile.loaded_volume());
        if pile.loaded_volume() > capacity {
            pile.spill_from_bucket(pile.loaded_volume() - capacity, new_tip.x);
        }
        if pile.relax_slopes().is_err() {
            numeric_error = true;
            state = next;
            step += 1;
            break;
        }
        state = next;
        state.load_mass = pile.loaded_mass();
        state.load_volume = pile.loaded_volume();
        max_error = max_error.max(pile.conservation_error());
        step += 1;
        if let Some(log) = series.as_mut() {
            log.rows.push(SeriesRow::new(step as f64 * dt, &state, dig.magnitude, phase, new_tip));
        }
    }

    let end_time = step as f64 * dt;
    let timed_out = ctrl.phase != Phase::Done && !numeric_error;
    let v_load = pile.loaded_volume();
    let v_spill = pile.spilled_mass() / pile_spec.soil.density;
    let m_load = pile.loaded_mass();
    let t_load = t_load_definition(&ctrl.events, end_time);
    let work = state.work;

    let mut flag = if numeric_error {
        Flag::NumericError
    } else if timed_out {
        Flag::Timeout
    } else {
        match ctrl.dig_end {
            Some(DigEnd::TargetsReached) => Flag::Completed,
            Some(DigEnd::Stall) => Flag::Stalled,
            Some(DigEnd::Breakout) | None => Flag::BreakoutEarly,
        }
    };
    let metrics = match compute_metrics(m_load, t_load, work, v_load, v_spill, machine.bucket_capacity) {
        Ok(m) => m,
        Err(_) => {
            flag = Flag::NumericError;
            Metrics::default()
        }
    };

    let record = LoadingRecord {
        run_id: run_id(pile_spec, action),
        pile: pile_spec.name.clone(),
        soil: pile_spec.soil.name.clone(),
        slope_deg: pile_spec.slope_deg,
        action: *action,
        m_load,
        t_load,
        work,
        s_load: metrics.s_load,
        p_e: metrics.p_e,
        p_p: metrics.p_p,
        p_b: metrics.p_b,
        flag,
    };
    RunOutput {
        record,
        events: ctrl.events.clone(),
        series,
        pile,
        controller: ctrl,
        max_conservation_error: max_error,
        steps: step,
        end_time,
        v_load,
        v_spill,
    }
}

/// `event,t` rows for a run's event list.
pub fn events_csv(events: &[Event]) -> String {
    let mut out = String::from("event,t\n");
    for e in events {
        let _ = writeln!(out, "{},{}", e.kind, e.t);
    }
    out
}
