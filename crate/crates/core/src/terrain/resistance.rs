//! Digging resistance on the bucket.
//!
//! Per unit width, with cutting depth `d` and forward tip speed `v`:
//!
//! ```text
//! separation  Fs = ρ·g·d²·Nγ + c·d·Nc
//! penetration Fp = k_pen·(c + ρ·g·(d/2)·tan φ)·d
//! inertial    Fi = ρ·d·v²·tan(45° + φ/2)
//! ```
//!
//! `Fs` acts on the tool face at `δ` from its normal, so it resolves into
//! `Fs·sin(β+δ)` horizontally and `Fs·cos(β+δ)` vertically (positive down);
//! `Fp` and `Fi` oppose forward motion.

use super::wedge::{passive_wedge_coefficients, WedgeFactors};
use super::{PileState, Point2};
use crate::config::SoilSpec;
use crate::GRAVITY;

/// Soil-tool friction as a fraction of φ.
pub const TOOL_FRICTION_RATIO: f64 = 2.0 / 3.0;
/// Penetration resistance coefficient.
pub const PENETRATION_COEFF: f64 = 0.35;
pub const RAKE_MIN_DEG: f64 = 20.0;
pub const RAKE_MAX_DEG: f64 = 85.0;
/// Rake resolution of the cached wedge factors (deg).
const RAKE_STEP_DEG: f64 = 0.1;

/// Soil reaction on the bucket.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DigForce {
    /// Resistance against forward motion (N).
    pub horizontal: f64,
    /// Vertical reaction, positive pushing the bucket down (N).
    pub vertical: f64,
    pub magnitude: f64,
    pub penetration: f64,
    pub separation: f64,
    pub inertial: f64,
    /// Cutting depth (m).
    pub depth: f64,
}

/// Rake angle (deg) of the cutting face for a bucket angle (rad).
pub fn rake_angle_deg(bucket_angle: f64) -> f64 {
    (90.0 - bucket_angle.to_degrees()).clamp(RAKE_MIN_DEG, RAKE_MAX_DEG)
}

/// Lazily filled wedge factors over the admissible rake range for one soil.
#[derive(Clone, Debug)]
pub struct WedgeTable {
    phi_deg: f64,
    delta_deg: f64,
    entries: Vec<Option<WedgeFactors>>,
}

impl WedgeTable {
    pub fn new(soil: &SoilSpec) -> Self {
        let n = ((RAKE_MAX_DEG - RAKE_MIN_DEG) / RAKE_STEP_DEG).round() as usize + 1;
        Self {
            phi_deg: soil.phi_deg,
            delta_deg: TOOL_FRICTION_RATIO * soil.phi_deg,
            entries: vec![None; n],
        }
    }

    pub fn delta_deg(&self) -> f64 {
        self.delta_deg
    }

    fn entry(&mut self, k: usize) -> WedgeFactors {
        if let Some(f) = self.entries[k] {
            return f;
        }
        let rake = RAKE_MIN_DEG + k as f64 * RAKE_STEP_DEG;
        // soil specs are validated, and δ < φ keeps every rake in [20°, 85°] admissible
        let f = passive_wedge_coefficients(self.phi_deg, self.delta_deg, rake)
            .expect("wedge admissible over the clamped rake range");
        self.entries[k] = Some(f);
        f
    }

    /// Factors at `rake_deg`, linear between 0.1° nodes.
    pub fn factors(&mut self, rake_deg: f64) -> WedgeFactors {
        let u = (rake_deg.clamp(RAKE_MIN_DEG, RAKE_MAX_DEG) - RAKE_MIN_DEG) / RAKE_STEP_DEG;
        let k = u.floor() as usize;
        let t = u - k as f64;
        let a = self.entry(k.min(self.entries.len() - 1));
        if t < 1e-9 || k + 1 >= self.entries.len() {
            return a;
        }
        let b = self.entry(k + 1);
        let lerp = |x: f64, y: f64| x + (y - x) * t;
        WedgeFactors {
            n_gamma: lerp(a.n_gamma, b.n_gamma),
            n_c: lerp(a.n_c, b.n_c),
            rho_gamma_deg: lerp(a.rho_gamma_deg, b.rho_gamma_deg),
            rho_c_deg: lerp(a.rho_c_deg, b.rho_c_deg),
        }
    }
}

/// Force components for a given depth, forward speed, rake and wedge factors.
pub fn dig_force_components(
    soil: &SoilSpec,
    width: f64,
    depth: f64,
    forward_speed: f64,
    rake_deg: f64,
    delta_deg: f64,
    factors: &WedgeFactors,
) -> DigForce {
    if !(depth > 0.0) {
        return DigForce::default();
    }
    let rho = soil.density;
    let c = soil.cohesion_pa();
    let phi = soil.phi_deg.to_radians();
    let separation = width * (rho * GRAVITY * depth * depth * factors.n_gamma + c * depth * factors.n_c);
    let penetration = width * PENETRATION_COEFF * (c + rho * GRAVITY * 0.5 * depth * phi.tan()) * depth;
    let v = forward_speed.max(0.0);
    let n_a = (std::f64::consts::FRAC_PI_4 + 0.5 * phi).tan();
    let inertial = width * rho * depth * v * v * n_a;
    let face = (rake_deg + delta_deg).to_radians();
    let horizontal = separation * face.sin() + penetration + inertial;
    let vertical = separation * face.cos();
    DigForce {
        horizontal,
        vertical,
        magnitude: horizontal.hypot(vertical),
        penetration,
        separation,
        inertial,
        depth,
    }
}

/// Soil reaction on a bucket whose cutting edge is at `tip`, moving at `tip_velocity`.
pub fn dig_resistance(
    pile: &PileState,
    wedge: &mut WedgeTable,
    tip: Point2,
    tip_velocity: Point2,
    bucket_angle: f64,
) -> DigForce {
    let depth = (pile.surface_height(tip.x) - tip.z).max(0.0);
    if depth <= 0.0 {
        return DigForce::default();
    }
    let rake = rake_angle_deg(bucket_angle);
    let factors = wedge.factors(rake);
    dig_force_components(pile.soil(), pile.width(), depth, tip_velocity.x, rake, wedge.delta_deg(), &factors)
}
