//! Soil, pile, machine, action and campaign specifications.
//!
//! All spec types are plain immutable values; a resolved configuration can be
//! shared freely between sweep workers.

mod decimal;
mod document;
mod grid;
mod manifest;

use serde::Deserialize;

pub use decimal::Decimal;
pub use document::{validate_config, DefaultPolicy, ResolvedConfig, SCHEMA_VERSION};
pub use grid::{build_parameter_grid, subsample_grid, reference_alpha_values, AlphaValues};
pub use manifest::{enumerate_campaign, run_id, run_seed, CampaignManifest, ManifestRow};

use crate::error::ConfigError;
use crate::GRAVITY;

/// Bulk soil parameters at the bank state.
#[derive(Clone, Debug, PartialEq)]
pub struct SoilSpec {
    pub name: String,
    /// Angle of internal friction (deg).
    pub phi_deg: f64,
    /// Dilatancy angle (deg). Carried for completeness, unused by the force model.
    pub psi_deg: f64,
    /// Cohesion (kPa).
    pub cohesion_kpa: f64,
    /// Bulk density (kg/m³).
    pub density: f64,
}

impl SoilSpec {
    pub fn new(
        name: impl Into<String>,
        phi_deg: f64,
        psi_deg: f64,
        cohesion_kpa: f64,
        density: f64,
    ) -> Result<Self, ConfigError> {
        let soil = Self {
            name: name.into(),
            phi_deg,
            psi_deg,
            cohesion_kpa,
            density,
        };
        soil.validate()?;
        Ok(soil)
    }

    pub fn gravel() -> Self {
        Self::builtin("gravel").expect("gravel is built in")
    }

    pub fn sand() -> Self {
        Self::builtin("sand").expect("sand is built in")
    }

    pub fn dirt() -> Self {
        Self::builtin("dirt").expect("dirt is built in")
    }

    /// The three reference soils.
    pub fn builtin(name: &str) -> Option<Self> {
        let (phi, psi, c) = match name {
            "gravel" => (44.0, 11.0, 0.0),
            "sand" => (39.0, 9.0, 0.0),
            "dirt" => (40.0, 13.0, 2.1),
            _ => return None,
        };
        Some(Self {
            name: name.to_owned(),
            phi_deg: phi,
            psi_deg: psi,
            cohesion_kpa: c,
            density: 1400.0,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let field = |f: &str| format!("soil `{}`.{f}", self.name);
        if !(self.phi_deg > 0.0 && self.phi_deg < 90.0) {
            return Err(ConfigError::invalid(field("phi_deg"), "must lie in (0, 90)"));
        }
        if !(self.psi_deg >= 0.0 && self.psi_deg < self.phi_deg) {
            return Err(ConfigError::invalid(field("psi_deg"), "must lie in [0, phi_deg)"));
        }
        if !(self.cohesion_kpa >= 0.0 && self.cohesion_kpa.is_finite()) {
            return Err(ConfigError::invalid(field("cohesion_kpa"), "must be >= 0"));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(ConfigError::invalid(field("density"), "must be > 0"));
        }
        Ok(())
    }

    pub fn cohesion_pa(&self) -> f64 {
        self.cohesion_kpa * 1e3
    }
}

/// A pile: ramp rising from `toe_x` at `slope_deg` up to a flat crest.
#[derive(Clone, Debug, PartialEq)]
pub struct PileSpec {
    /// Unique pile id within a campaign, e.g. `gravel-30`.
    pub name: String,
    pub soil: SoilSpec,
    pub slope_deg: f64,
    pub toe_x: f64,
    pub crest_height: f64,
    pub grid_dx: f64,
}

impl PileSpec {
    pub const DEFAULT_TOE_X: f64 = 10.0;
    pub const DEFAULT_CREST_HEIGHT: f64 = 3.0;
    pub const DEFAULT_GRID_DX: f64 = 0.2;

    /// Pile with default geometry, named `{soil}-{slope}`.
    pub fn new(soil: SoilSpec, slope_deg: f64) -> Result<Self, ConfigError> {
        let pile = Self {
            name: Self::default_name(&soil.name, slope_deg),
            soil,
            slope_deg,
            toe_x: Self::DEFAULT_TOE_X,
            crest_height: Self::DEFAULT_CREST_HEIGHT,
            grid_dx: Self::DEFAULT_GRID_DX,
        };
        pile.validate()?;
        Ok(pile)
    }

    pub fn default_name(soil: &str, slope_deg: f64) -> String {
        format!("{soil}-{slope_deg}")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.soil.validate()?;
        let field = |f: &str| format!("pile `{}`.{f}", self.name);
        if !(self.slope_deg > 0.0 && self.slope_deg < 90.0) {
            return Err(ConfigError::invalid(field("slope_deg"), "must lie in (0, 90)"));
        }
        if !(self.grid_dx > 0.0 && self.grid_dx.is_finite()) {
            return Err(ConfigError::invalid(field("grid_dx"), "must be > 0"));
        }
        // zero height is an empty pile
        if !(self.crest_height >= 0.0 && self.crest_height.is_finite()) {
            return Err(ConfigError::invalid(field("crest_height"), "must be >= 0"));
        }
        if !(self.toe_x >= 0.0 && self.toe_x.is_finite()) {
            return Err(ConfigError::invalid(field("toe_x"), "must be >= 0"));
        }
        Ok(())
    }

    /// Horizontal length of the ramp from toe to crest.
    pub fn ramp_length(&self) -> f64 {
        self.crest_height / self.slope_deg.to_radians().tan()
    }

    /// Text used to derive run ids. Float fields use the shortest round-trip form.
    pub fn canonical(&self) -> String {
        format!(
            "pile={};soil={};phi={:?};psi={:?};c={:?};rho={:?};slope={:?};toe={:?};crest={:?};dx={:?}",
            self.name,
            self.soil.name,
            self.soil.phi_deg,
            self.soil.psi_deg,
            self.soil.cohesion_kpa,
            self.soil.density,
            self.slope_deg,
            self.toe_x,
            self.crest_height,
            self.grid_dx
        )
    }

    /// The six reference piles: gravel at 10/20/30/40° plus sand and dirt at 30°.
    pub fn reference_piles() -> Vec<PileSpec> {
        let mut piles: Vec<PileSpec> = [10.0, 20.0, 30.0, 40.0]
            .into_iter()
            .map(|slope| PileSpec::new(SoilSpec::gravel(), slope).expect("valid reference pile"))
            .collect();
        piles.push(PileSpec::new(SoilSpec::sand(), 30.0).expect("valid reference pile"));
        piles.push(PileSpec::new(SoilSpec::dirt(), 30.0).expect("valid reference pile"));
        piles
    }
}

/// Speed range, force limit and servo gain of one actuator, in joint units.
///
/// Drive: m/s and N. Lift and tilt: rad/s and N·m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActuatorLimits {
    pub speed_min: f64,
    pub speed_max: f64,
    pub force_limit: f64,
    pub gain: f64,
}

impl ActuatorLimits {
    pub fn clamp_speed(&self, speed: f64) -> f64 {
        speed.clamp(self.speed_min, self.speed_max)
    }
}

/// Planar wheel-loader description.
///
/// The actuator rows hold the raw cylinder and drive ratings; joint-space
/// limits are derived through a fixed lever arm and the wheel radius.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MachineSpec {
    /// Operating mass (kg).
    pub operating_mass: f64,
    /// Wheelbase (m).
    pub wheelbase: f64,
    /// Struck bucket volume (m³).
    pub bucket_capacity: f64,
    /// Bucket width (m); also the out-of-plane width of the terrain strip.
    pub bucket_width: f64,
    pub wheel_radius: f64,
    /// Wheel-terrain friction coefficient.
    pub wheel_friction: f64,
    pub rolling_resistance: f64,

    /// Maximum drive speed, forward and reverse (km/h).
    pub drive_speed_max_kmh: f64,
    /// Drive torque limit (N·m).
    pub drive_torque_limit: f64,
    /// Lift cylinder speed range (m/s).
    pub lift_speed_range: [f64; 2],
    /// Lift cylinder force limit (N).
    pub lift_force_limit: f64,
    /// Tilt cylinder speed range (m/s).
    pub tilt_speed_range: [f64; 2],
    /// Tilt cylinder force limit (N).
    pub tilt_force_limit: f64,
    /// Effective lever arm mapping cylinder speed/force to joint rate/torque (m).
    pub cylinder_lever_arm: f64,

    /// Drive speed servo gain (N per m/s).
    pub drive_gain: f64,
    /// Lift and tilt speed servo gain (N·m per rad/s).
    pub joint_gain: f64,

    /// Boom pivot, horizontal offset from the front axle (m, negative = behind).
    pub boom_pivot_x: f64,
    /// Boom pivot height above the axle centre (m).
    pub boom_pivot_z: f64,
    pub boom_length: f64,
    /// Distance from the bucket hinge to the cutting edge (m).
    pub bucket_tip_offset: f64,
    pub boom_mass: f64,
    pub bucket_mass: f64,
    /// Distance from the hinge to the bucket (and load) centre of mass (m).
    pub bucket_com_offset: f64,
    /// Radius of gyration of bucket and load about their centre of mass (m).
    pub bucket_gyration: f64,

    /// Boom angle with the bucket resting on the ground; also the lower boom stop (deg).
    pub boom_rest_deg: f64,
    pub boom_max_deg: f64,
    pub bucket_max_deg: f64,
}

impl Default for MachineSpec {
    fn default() -> Self {
        Self {
            operating_mass: 15_590.0,
            wheelbase: 3.030,
            bucket_capacity: 3.0,
            bucket_width: 2.7,
            wheel_radius: 0.65,
            wheel_friction: 0.8,
            rolling_resistance: 0.03,
            drive_speed_max_kmh: 11.0,
            drive_torque_limit: 85_000.0,
            lift_speed_range: [-0.2, 0.11],
            lift_force_limit: 395_000.0,
            tilt_speed_range: [-0.2, 0.1],
            tilt_force_limit: 530_000.0,
            cylinder_lever_arm: 0.5,
            drive_gain: 60_000.0,
            joint_gain: 800_000.0,
            boom_pivot_x: -1.0,
            boom_pivot_z: 1.2,
            boom_length: 2.2,
            bucket_tip_offset: 1.2,
            boom_mass: 1_200.0,
            bucket_mass: 1_300.0,
            bucket_com_offset: 0.6,
            bucket_gyration: 0.5,
            boom_rest_deg: -45.0,
            boom_max_deg: 40.0,
            bucket_max_deg: 60.0,
        }
    }
}

impl MachineSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("operating_mass", self.operating_mass),
            ("wheelbase", self.wheelbase),
            ("bucket_capacity", self.bucket_capacity),
            ("bucket_width", self.bucket_width),
            ("wheel_radius", self.wheel_radius),
            ("drive_speed_max_kmh", self.drive_speed_max_kmh),
            ("drive_torque_limit", self.drive_torque_limit),
            ("lift_force_limit", self.lift_force_limit),
            ("tilt_force_limit", self.tilt_force_limit),
            ("cylinder_lever_arm", self.cylinder_lever_arm),
            ("drive_gain", self.drive_gain),
            ("joint_gain", self.joint_gain),
            ("boom_length", self.boom_length),
            ("bucket_tip_offset", self.bucket_tip_offset),
            ("boom_mass", self.boom_mass),
            ("bucket_mass", self.bucket_mass),
            ("bucket_com_offset", self.bucket_com_offset),
            ("bucket_gyration", self.bucket_gyration),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::invalid(format!("machine.{name}"), "must be > 0"));
            }
        }
        if !(self.wheel_friction > 0.0 && self.wheel_friction < 2.0) {
            return Err(ConfigError::invalid("machine.wheel_friction", "must lie in (0, 2)"));
        }
        if !(self.rolling_resistance >= 0.0 && self.rolling_resistance < 1.0) {
            return Err(ConfigError::invalid("machine.rolling_resistance", "must lie in [0, 1)"));
        }
        for (name, [lo, hi]) in [("lift_speed_range", self.lift_speed_range), ("tilt_speed_range", self.tilt_speed_range)] {
            if !(lo < 0.0 && hi > 0.0) {
                return Err(ConfigError::invalid(format!("machine.{name}"), "must span zero"));
            }
        }
        if !(self.boom_rest_deg < self.boom_max_deg) {
            return Err(ConfigError::invalid("machine.boom_rest_deg", "must be below boom_max_deg"));
        }
        if self.rest_hinge_height() <= 0.0 || self.rest_hinge_height() >= self.bucket_tip_offset {
            return Err(ConfigError::invalid(
                "machine.boom_rest_deg",
                "bucket hinge must rest between the ground and one tip offset above it",
            ));
        }
        Ok(())
    }

    pub fn drive_limits(&self) -> ActuatorLimits {
        let v = self.drive_speed_max_kmh / 3.6;
        ActuatorLimits {
            speed_min: -v,
            speed_max: v,
            force_limit: self.drive_torque_limit / self.wheel_radius,
            gain: self.drive_gain,
        }
    }

    pub fn lift_limits(&self) -> ActuatorLimits {
        self.joint_limits(self.lift_speed_range, self.lift_force_limit)
    }

    pub fn tilt_limits(&self) -> ActuatorLimits {
        self.joint_limits(self.tilt_speed_range, self.tilt_force_limit)
    }

    fn joint_limits(&self, [lo, hi]: [f64; 2], force: f64) -> ActuatorLimits {
        let arm = self.cylinder_lever_arm;
        ActuatorLimits {
            speed_min: lo / arm,
            speed_max: hi / arm,
            force_limit: force * arm,
            gain: self.joint_gain,
        }
    }

    /// Traction bound: the smaller of wheel-torque and friction limits (N).
    pub fn traction_limit(&self) -> f64 {
        (self.drive_torque_limit / self.wheel_radius).min(self.wheel_friction * self.operating_mass * GRAVITY)
    }

    /// Height of the boom pivot above ground (m).
    pub fn pivot_height(&self) -> f64 {
        self.wheel_radius + self.boom_pivot_z
    }

    fn rest_hinge_height(&self) -> f64 {
        self.pivot_height() + self.boom_length * self.boom_rest_deg.to_radians().sin()
    }

    /// Bucket angle (rad) that puts the cutting edge on the ground with the boom at rest.
    pub fn bucket_rest_angle(&self) -> f64 {
        (-self.rest_hinge_height() / self.bucket_tip_offset).asin()
    }

    /// Stable text form of every field, used for the manifest's machine hash.
    pub fn canonical(&self) -> String {
        format!("{self:?}")
    }
}

/// Controller constants.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConstants {
    pub v_drive_max_kmh: f64,
    /// Lift cylinder reference speed (m/s).
    pub v_lift_max: f64,
    /// Tilt cylinder reference speed (m/s).
    pub v_tilt_max: f64,
    /// Reference digging force (N).
    pub f_dig0: f64,
    /// Fraction of the reference speeds used while reversing out.
    pub reverse_fraction: f64,
    /// Brake duration after digging (s).
    pub brake_duration: f64,
    pub bucket_end_angle_deg: f64,
    pub boom_end_angle_deg: f64,
    /// Reverse distance from the entry point that ends the cycle (m).
    pub reverse_distance: f64,
    /// Integration step (s).
    pub dt: f64,
    /// Simulated-time watchdog (s).
    pub timeout: f64,
}

impl Default for ControlConstants {
    fn default() -> Self {
        Self {
            v_drive_max_kmh: 11.0,
            v_lift_max: 0.11,
            v_tilt_max: 0.10,
            f_dig0: 100_000.0,
            reverse_fraction: 0.6,
            brake_duration: 1.0,
            bucket_end_angle_deg: 50.0,
            boom_end_angle_deg: -10.0,
            reverse_distance: 5.0,
            dt: 0.010,
            timeout: 120.0,
        }
    }
}

impl ControlConstants {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("v_drive_max_kmh", self.v_drive_max_kmh),
            ("v_lift_max", self.v_lift_max),
            ("v_tilt_max", self.v_tilt_max),
            ("f_dig0", self.f_dig0),
            ("reverse_fraction", self.reverse_fraction),
            ("brake_duration", self.brake_duration),
            ("bucket_end_angle_deg", self.bucket_end_angle_deg),
            ("reverse_distance", self.reverse_distance),
            ("dt", self.dt),
            ("timeout", self.timeout),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::invalid(format!("control.{name}"), "must be > 0"));
            }
        }
        if !self.boom_end_angle_deg.is_finite() {
            return Err(ConfigError::invalid("control.boom_end_angle_deg", "must be finite"));
        }
        Ok(())
    }

    pub fn v_drive_max(&self) -> f64 {
        self.v_drive_max_kmh / 3.6
    }

    /// Reference lift joint rate (rad/s) for the given machine lever arm.
    pub fn lift_rate_max(&self, machine: &MachineSpec) -> f64 {
        self.v_lift_max / machine.cylinder_lever_arm
    }

    /// Reference tilt joint rate (rad/s).
    pub fn tilt_rate_max(&self, machine: &MachineSpec) -> f64 {
        self.v_tilt_max / machine.cylinder_lever_arm
    }

    /// Number of steps the brake is held.
    pub fn brake_steps(&self) -> u32 {
        (self.brake_duration / self.dt).round() as u32
    }
}

/// The eight loading-action parameters, in grid order.
///
/// 1. approach speed fraction, 2. penetration speed fraction,
/// 3. lift-trigger force fraction, 4. tilt-trigger force fraction,
/// 5. lift speed fraction, 6. tilt speed fraction,
/// 7. boom target angle (deg), 8. bucket target angle (deg).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionParams {
    pub alpha: [Decimal; 8],
}

impl ActionParams {
    pub fn new(alpha: [Decimal; 8]) -> Result<Self, ConfigError> {
        for (i, value) in alpha.iter().enumerate() {
            check_alpha(i + 1, *value)?;
        }
        Ok(Self { alpha })
    }

    pub fn from_f64(values: [f64; 8]) -> Result<Self, ConfigError> {
        let mut alpha = [Decimal::ZERO; 8];
        for (slot, v) in alpha.iter_mut().zip(values) {
            *slot = Decimal::from_f64(v)?;
        }
        Self::new(alpha)
    }

    pub fn approach_speed(&self) -> f64 {
        self.alpha[0].to_f64()
    }
    pub fn penetration_speed(&self) -> f64 {
        self.alpha[1].to_f64()
    }
    pub fn lift_trigger(&self) -> f64 {
        self.alpha[2].to_f64()
    }
    pub fn tilt_trigger(&self) -> f64 {
        self.alpha[3].to_f64()
    }
    pub fn lift_speed(&self) -> f64 {
        self.alpha[4].to_f64()
    }
    pub fn tilt_speed(&self) -> f64 {
        self.alpha[5].to_f64()
    }
    pub fn boom_target_deg(&self) -> f64 {
        self.alpha[6].to_f64()
    }
    pub fn bucket_target_deg(&self) -> f64 {
        self.alpha[7].to_f64()
    }

    pub fn canonical(&self) -> String {
        let parts: Vec<String> = self.alpha.iter().map(Decimal::to_string).collect();
        parts.join(",")
    }
}

/// Admissible range check for one α (1-based index).
pub(crate) fn check_alpha(index: usize, value: Decimal) -> Result<(), ConfigError> {
    let m = value.milli();
    let (ok, range) = match index {
        1 | 2 | 5 | 6 => (m > 0 && m <= 1000, "(0, 1]"),
        3 | 4 => ((0..=1200).contains(&m), "[0, 1.2]"),
        7 => ((-40_000..=-10_000).contains(&m), "[-40, -10] deg"),
        8 => ((10_000..=50_000).contains(&m), "[10, 50] deg"),
        _ => (false, "alpha1..alpha8"),
    };
    if ok {
        Ok(())
    } else {
        Err(ConfigError::AlphaOutOfRange {
            index,
            value: value.to_string(),
            range,
        })
    }
}
