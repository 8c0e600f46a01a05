//! Planar pile terrain: height field, digging resistance, excavation and slope failure.

mod pile;
mod resistance;
pub mod wedge;

pub use pile::{ColumnLedger, Excavation, PileState, Provenance, MAX_RELAX_ITERATIONS};
pub use resistance::{
    dig_force_components, dig_resistance, rake_angle_deg, DigForce, WedgeTable, PENETRATION_COEFF,
    TOOL_FRICTION_RATIO,
};
pub use wedge::{n_c_at, n_gamma_at, passive_wedge_coefficients, WedgeFactors};

/// Point or vector in the vertical plane: `x` forward, `z` up.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub z: f64,
}

impl Point2 {
    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }
}
