//! Passive trial-wedge factors of the earthmoving equation.
//!
//! For a flat tool of rake `β` (from horizontal), soil-tool friction `δ` and
//! internal friction `φ`, a planar failure surface at angle `ρ` gives
//!
//! ```text
//! D(ρ)  = cos(β + δ) + sin(β + δ)·cot(ρ + φ)
//! Nγ(ρ) = (cot β + cot ρ) / (2·D(ρ))
//! Nc(ρ) = (1 + cot ρ·cot(ρ + φ)) / D(ρ)
//! ```
//!
//! and the soil fails along the wedge that minimises each factor. Only
//! wedges with `D(ρ) > 0` are admissible.

use crate::error::TerrainError;

/// Coarse scan step over the failure angle (deg).
pub const SCAN_STEP_DEG: f64 = 0.1;
/// Golden-section stopping width (deg).
pub const REFINE_TOL_DEG: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WedgeFactors {
    pub n_gamma: f64,
    pub n_c: f64,
    /// Failure angle minimising `n_gamma` (deg).
    pub rho_gamma_deg: f64,
    /// Failure angle minimising `n_c` (deg).
    pub rho_c_deg: f64,
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

fn denominator(phi: f64, delta: f64, rake: f64, rho: f64) -> f64 {
    (rake + delta).cos() + (rake + delta).sin() * cot(rho + phi)
}

/// `Nγ` for one trial wedge; `None` when the wedge is inadmissible. Angles in degrees.
pub fn n_gamma_at(phi_deg: f64, delta_deg: f64, rake_deg: f64, rho_deg: f64) -> Option<f64> {
    let (phi, delta, rake, rho) = (
        phi_deg.to_radians(),
        delta_deg.to_radians(),
        rake_deg.to_radians(),
        rho_deg.to_radians(),
    );
    let d = denominator(phi, delta, rake, rho);
    let value = (cot(rake) + cot(rho)) / (2.0 * d);
    (d > 1e-12 && value.is_finite() && value > 0.0).then_some(value)
}

/// `Nc` for one trial wedge; `None` when the wedge is inadmissible. Angles in degrees.
pub fn n_c_at(phi_deg: f64, delta_deg: f64, rake_deg: f64, rho_deg: f64) -> Option<f64> {
    let (phi, delta, rake, rho) = (
        phi_deg.to_radians(),
        delta_deg.to_radians(),
        rake_deg.to_radians(),
        rho_deg.to_radians(),
    );
    let d = denominator(phi, delta, rake, rho);
    let value = (1.0 + cot(rho) * cot(rho + phi)) / d;
    (d > 1e-12 && value.is_finite() && value > 0.0).then_some(value)
}

/// Minimise `f` over `(0, 90)` deg: 0.1° scan, then golden-section around the best node.
fn minimise(f: impl Fn(f64) -> Option<f64>) -> Option<(f64, f64)> {
    let steps = (90.0 / SCAN_STEP_DEG).round() as usize;
    let mut best: Option<(f64, f64)> = None;
    for k in 1..steps {
        let rho = k as f64 * SCAN_STEP_DEG;
        if let Some(v) = f(rho) {
            if best.map_or(true, |(_, b)| v < b) {
                best = Some((rho, v));
            }
        }
    }
    let (rho0, v0) = best?;

    let eval = |rho: f64| f(rho).unwrap_or(f64::INFINITY);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = (rho0 - SCAN_STEP_DEG).max(1e-9);
    let mut b = (rho0 + SCAN_STEP_DEG).min(90.0 - 1e-9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    while b - a > REFINE_TOL_DEG {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    let rho = 0.5 * (a + b);
    let v = eval(rho);
    // never return something worse than the scan node
    Some(if v <= v0 { (rho, v) } else { (rho0, v0) })
}

/// Minimising passive factors for one tool configuration. Angles in degrees.
pub fn passive_wedge_coefficients(phi_deg: f64, delta_deg: f64, rake_deg: f64) -> Result<WedgeFactors, TerrainError> {
    if !(0.0..90.0).contains(&phi_deg) {
        return Err(TerrainError::WedgeInput(format!("phi {phi_deg} outside [0, 90)")));
    }
    if !(0.0..=phi_deg).contains(&delta_deg) {
        return Err(TerrainError::WedgeInput(format!("delta {delta_deg} outside [0, phi]")));
    }
    if !(rake_deg > 0.0 && rake_deg < 90.0) {
        return Err(TerrainError::WedgeInput(format!("rake {rake_deg} outside (0, 90)")));
    }
    let degenerate = || TerrainError::DegenerateWedge {
        phi: phi_deg,
        delta: delta_deg,
        rake: rake_deg,
    };
    let (rho_gamma_deg, n_gamma) =
        minimise(|rho| n_gamma_at(phi_deg, delta_deg, rake_deg, rho)).ok_or_else(degenerate)?;
    let (rho_c_deg, n_c) = minimise(|rho| n_c_at(phi_deg, delta_deg, rake_deg, rho)).ok_or_else(degenerate)?;
    Ok(WedgeFactors {
        n_gamma,
        n_c,
        rho_gamma_deg,
        rho_c_deg,
    })
}
