//! Planar wheel loader: longitudinal vehicle motion, boom and bucket joints
//! driven by force-limited speed servos, and actuator work accounting.
//!
//! Angles are absolute (from horizontal, counter-clockwise positive). The
//! bucket is carried on a parallel linkage, so boom motion translates it
//! without changing `theta_bucket`.

use crate::config::{ActuatorLimits, MachineSpec};
use crate::error::MachineError;
use crate::terrain::{DigForce, Point2};
use crate::GRAVITY;

/// Momentary target speed of one actuator, in joint units.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ActuatorCommand {
    pub target_speed: f64,
    /// An inactive actuator applies no force.
    pub active: bool,
}

impl ActuatorCommand {
    pub const IDLE: Self = Self {
        target_speed: 0.0,
        active: false,
    };

    /// Active command with the target clamped into the actuator's speed range.
    pub fn speed(target: f64, limits: &ActuatorLimits) -> Self {
        Self {
            target_speed: limits.clamp_speed(target),
            active: true,
        }
    }

    /// Active command holding zero speed.
    pub fn hold() -> Self {
        Self {
            target_speed: 0.0,
            active: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Commands {
    pub drive: ActuatorCommand,
    pub lift: ActuatorCommand,
    pub tilt: ActuatorCommand,
}

impl Commands {
    pub const IDLE: Self = Self {
        drive: ActuatorCommand::IDLE,
        lift: ActuatorCommand::IDLE,
        tilt: ActuatorCommand::IDLE,
    };

    pub fn hold_all() -> Self {
        Self {
            drive: ActuatorCommand::hold(),
            lift: ActuatorCommand::hold(),
            tilt: ActuatorCommand::hold(),
        }
    }
}

/// Proportional speed servo with load feed-forward, saturated at `limits.force_limit`.
pub fn actuator_force(command: &ActuatorCommand, current_speed: f64, load_estimate: f64, limits: &ActuatorLimits) -> f64 {
    if !command.active {
        return 0.0;
    }
    let raw = limits.gain * (command.target_speed - current_speed) + load_estimate;
    raw.clamp(-limits.force_limit, limits.force_limit)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MachineState {
    /// Front axle position (m).
    pub x: f64,
    pub v: f64,
    pub theta_boom: f64,
    pub theta_bucket: f64,
    pub omega_boom: f64,
    pub omega_bucket: f64,
    pub load_volume: f64,
    pub load_mass: f64,
    /// Accumulated positive actuator work (kJ).
    pub work: f64,
    /// Applied traction (N).
    pub f_drive: f64,
    /// Applied lift torque (N·m).
    pub f_lift: f64,
    /// Applied tilt torque (N·m).
    pub f_tilt: f64,
    /// Positive actuator power at this state (W).
    pub power: f64,
}

impl MachineState {
    /// Machine standing still at `x` with boom and bucket lowered onto their stops.
    pub fn at_rest(x: f64, machine: &MachineSpec) -> Self {
        Self {
            x,
            v: 0.0,
            theta_boom: machine.boom_rest_deg.to_radians(),
            theta_bucket: machine.bucket_rest_angle(),
            omega_boom: 0.0,
            omega_bucket: 0.0,
            load_volume: 0.0,
            load_mass: 0.0,
            work: 0.0,
            f_drive: 0.0,
            f_lift: 0.0,
            f_tilt: 0.0,
            power: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.x,
            self.v,
            self.theta_boom,
            self.theta_bucket,
            self.omega_boom,
            self.omega_bucket,
            self.work,
            self.f_drive,
            self.f_lift,
            self.f_tilt,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Positive mechanical power of the three actuators (W).
pub fn actuator_power(f_drive: f64, v: f64, f_lift: f64, omega_boom: f64, f_tilt: f64, omega_bucket: f64) -> f64 {
    (f_drive * v).max(0.0) + (f_lift * omega_boom).max(0.0) + (f_tilt * omega_bucket).max(0.0)
}

/// World position of the boom pivot.
pub fn boom_pivot(state: &MachineState, machine: &MachineSpec) -> Point2 {
    Point2::new(state.x + machine.boom_pivot_x, machine.pivot_height())
}

/// World position of the bucket hinge at the end of the boom.
pub fn bucket_hinge(state: &MachineState, machine: &MachineSpec) -> Point2 {
    let p = boom_pivot(state, machine);
    Point2::new(
        p.x + machine.boom_length * state.theta_boom.cos(),
        p.z + machine.boom_length * state.theta_boom.sin(),
    )
}

/// Cutting-edge position and the unit direction from hinge to edge.
pub fn bucket_tip_pose(state: &MachineState, machine: &MachineSpec) -> (Point2, Point2) {
    let h = bucket_hinge(state, machine);
    let dir = Point2::new(state.theta_bucket.cos(), state.theta_bucket.sin());
    let tip = Point2::new(h.x + machine.bucket_tip_offset * dir.x, h.z + machine.bucket_tip_offset * dir.z);
    (tip, dir)
}

/// Partial derivatives of the tip position with respect to `(theta_boom, theta_bucket)`.
pub fn tip_jacobian(state: &MachineState, machine: &MachineSpec) -> [Point2; 2] {
    let (lb, lk) = (machine.boom_length, machine.bucket_tip_offset);
    [
        Point2::new(-lb * state.theta_boom.sin(), lb * state.theta_boom.cos()),
        Point2::new(-lk * state.theta_bucket.sin(), lk * state.theta_bucket.cos()),
    ]
}

/// Cutting-edge velocity in the world frame.
pub fn tip_velocity(state: &MachineState, machine: &MachineSpec) -> Point2 {
    let [jb, jk] = tip_jacobian(state, machine);
    Point2::new(
        state.v + jb.x * state.omega_boom + jk.x * state.omega_bucket,
        jb.z * state.omega_boom + jk.z * state.omega_bucket,
    )
}

/// Volume the bucket retains at a given angle; the excess leaks.
pub fn carry_capacity(theta_bucket: f64, machine: &MachineSpec) -> f64 {
    machine.bucket_capacity * (0.3 + 0.7 * theta_bucket.to_degrees() / 45.0).clamp(0.0, 1.1)
}

/// Boom inertia about its pivot, bucket and load lumped at the hinge (kg·m²).
fn boom_inertia(machine: &MachineSpec, load_mass: f64) -> f64 {
    let l = machine.boom_length;
    machine.boom_mass * l * l / 3.0 + (machine.bucket_mass + load_mass) * l * l
}

/// Bucket and load inertia about the hinge (kg·m²).
fn bucket_inertia(machine: &MachineSpec, load_mass: f64) -> f64 {
    let r = machine.bucket_com_offset;
    let k = machine.bucket_gyration;
    (machine.bucket_mass + load_mass) * (r * r + k * k)
}

/// Torques needed to hold boom and bucket against gravity (N·m).
pub fn gravity_torques(state: &MachineState, machine: &MachineSpec) -> (f64, f64) {
    let carried = machine.bucket_mass + state.load_mass;
    let boom = GRAVITY * state.theta_boom.cos() * machine.boom_length * (0.5 * machine.boom_mass + carried);
    let bucket = GRAVITY * carried * machine.bucket_com_offset * state.theta_bucket.cos();
    (boom, bucket)
}

/// Limits with the gain capped at `inertia/dt`, which keeps the explicit servo loop stable.
fn stable_limits(limits: ActuatorLimits, inertia: f64, dt: f64) -> ActuatorLimits {
    ActuatorLimits {
        gain: limits.gain.min(inertia / dt),
        ..limits
    }
}

/// Apply a non-negative resistance that can stop motion but never reverse it.
fn resist(speed: f64, decrement: f64) -> f64 {
    if speed > 0.0 {
        (speed - decrement).max(0.0)
    } else {
        (speed + decrement).min(0.0)
    }
}

/// Signed feed-forward for a servo: holding load plus resistance in the target direction.
fn feed_forward(command: &ActuatorCommand, holding: f64, resistance: f64) -> f64 {
    holding + resistance * command.target_speed.signum() * f64::from(command.target_speed != 0.0)
}

/// Advance the machine by one semi-implicit Euler step.
///
/// Soil resistance acts like friction: it decelerates motion against it but
/// never drives the machine. The horizontal component only resists forward
/// travel; each joint sees the moment of the full reaction about its axis.
pub fn step_dynamics(
    state: &MachineState,
    commands: &Commands,
    dig: &DigForce,
    machine: &MachineSpec,
    dt: f64,
) -> Result<MachineState, MachineError> {
    // f64::min/max would silently drop a NaN
    if !state.is_finite() || ![dig.horizontal, dig.vertical].iter().all(|f| f.is_finite()) {
        return Err(MachineError::NonFinite { x: state.x, v: state.v });
    }
    let mut next = *state;

    // vehicle
    let mass = machine.operating_mass + state.load_mass;
    let rolling = machine.rolling_resistance * machine.operating_mass * GRAVITY;
    let drive_limits = ActuatorLimits {
        force_limit: machine.traction_limit(),
        ..stable_limits(machine.drive_limits(), mass, dt)
    };
    let drive_load = if commands.drive.target_speed > 0.0 {
        rolling + dig.horizontal
    } else {
        feed_forward(&commands.drive, 0.0, rolling)
    };
    let f_drive = actuator_force(&commands.drive, state.v, drive_load, &drive_limits);
    let v_free = state.v + f_drive / mass * dt;
    let v = if v_free > 0.0 {
        resist(v_free, (rolling + dig.horizontal) / mass * dt)
    } else {
        resist(v_free, rolling / mass * dt)
    };
    next.v = drive_limits.clamp_speed(v);
    next.x = state.x + next.v * dt;
    next.f_drive = f_drive;

    // joints
    let (tip, _) = bucket_tip_pose(state, machine);
    let reaction = Point2::new(-dig.horizontal, -dig.vertical);
    let moment = |about: Point2| ((tip.x - about.x) * reaction.z - (tip.z - about.z) * reaction.x).abs();
    let boom_resistance = moment(boom_pivot(state, machine));
    let bucket_resistance = moment(bucket_hinge(state, machine));
    let (g_boom, g_bucket) = gravity_torques(state, machine);

    let i_boom = boom_inertia(machine, state.load_mass);
    let lift_limits = stable_limits(machine.lift_limits(), i_boom, dt);
    let f_lift = actuator_force(
        &commands.lift,
        state.omega_boom,
        feed_forward(&commands.lift, g_boom, boom_resistance),
        &lift_limits,
    );
    let omega = state.omega_boom + (f_lift - g_boom) / i_boom * dt;
    let omega = lift_limits.clamp_speed(resist(omega, boom_resistance / i_boom * dt));
    let (theta, omega) = apply_stops(
        state.theta_boom + omega * dt,
        omega,
        machine.boom_rest_deg.to_radians(),
        machine.boom_max_deg.to_radians(),
    );
    next.theta_boom = theta;
    next.omega_boom = omega;
    next.f_lift = f_lift;

    let i_bucket = bucket_inertia(machine, state.load_mass);
    let tilt_limits = stable_limits(machine.tilt_limits(), i_bucket, dt);
    let f_tilt = actuator_force(
        &commands.tilt,
        state.omega_bucket,
        feed_forward(&commands.tilt, g_bucket, bucket_resistance),
        &tilt_limits,
    );
    let omega = state.omega_bucket + (f_tilt - g_bucket) / i_bucket * dt;
    let omega = tilt_limits.clamp_speed(resist(omega, bucket_resistance / i_bucket * dt));
    let (theta, omega) = apply_stops(
        state.theta_bucket + omega * dt,
        omega,
        machine.bucket_rest_angle(),
        machine.bucket_max_deg.to_radians(),
    );
    next.theta_bucket = theta;
    next.omega_bucket = omega;
    next.f_tilt = f_tilt;

    next.power = actuator_power(f_drive, next.v, f_lift, next.omega_boom, f_tilt, next.omega_bucket);
    next.work = state.work + 0.5 * (state.power + next.power) * dt / 1000.0;

    if !next.is_finite() {
        return Err(MachineError::NonFinite { x: next.x, v: next.v });
    }
    Ok(next)
}

fn apply_stops(theta: f64, omega: f64, lo: f64, hi: f64) -> (f64, f64) {
    if theta <= lo {
        (lo, omega.max(0.0))
    } else if theta >= hi {
        (hi, omega.min(0.0))
    } else {
        (theta, omega)
    }
}
