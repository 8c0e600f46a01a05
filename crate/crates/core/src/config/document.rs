//! TOML configuration document.
//!
//! ```toml
//! schema_version = 1
//!
//! [machine]            # optional overrides of MachineSpec fields
//! operating_mass = 15590.0
//!
//! [control]            # optional overrides of ControlConstants fields
//! dt = 0.01
//!
//! [[soils]]            # optional extra soils
//! name = "clay"
//! phi_deg = 30.0
//! psi_deg = 5.0
//! cohesion_kpa = 12.0
//! density = 1800.0
//!
//! [[piles]]            # default: the six reference piles
//! soil = "gravel"
//! slope_deg = 30.0
//! # name, toe_x, crest_height, grid_dx are optional
//!
//! [grid]               # default: the 45,000-action reference grid
//! alpha1 = [0.4, 0.6, 0.8]
//! ```

use serde::Deserialize;

use super::{reference_alpha_values, AlphaValues, ControlConstants, Decimal, MachineSpec, PileSpec, SoilSpec};
use crate::error::ConfigError;

pub const SCHEMA_VERSION: u32 = 1;

/// Whether keys with built-in defaults may be omitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefaultPolicy {
    /// Missing sections fall back to built-ins; `schema_version` may be omitted.
    Allow,
    /// `schema_version` is required.
    Strict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedConfig {
    pub machine: MachineSpec,
    pub control: ControlConstants,
    pub soils: Vec<SoilSpec>,
    pub piles: Vec<PileSpec>,
    pub grid_values: AlphaValues,
}

impl Default for ResolvedConfig {
    fn default() -> Self {
        validate_config("", DefaultPolicy::Allow).expect("built-in defaults are valid")
    }
}

impl ResolvedConfig {
    pub fn pile(&self, name: &str) -> Option<&PileSpec> {
        self.piles.iter().find(|p| p.name == name)
    }

    pub fn soil(&self, name: &str) -> Option<&SoilSpec> {
        self.soils.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    schema_version: Option<u32>,
    machine: Option<MachineSpec>,
    control: Option<ControlConstants>,
    #[serde(default)]
    soils: Vec<SoilEntry>,
    piles: Option<Vec<PileEntry>>,
    grid: Option<GridEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SoilEntry {
    name: String,
    phi_deg: f64,
    psi_deg: f64,
    cohesion_kpa: f64,
    density: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PileEntry {
    name: Option<String>,
    soil: String,
    slope_deg: f64,
    toe_x: Option<f64>,
    crest_height: Option<f64>,
    grid_dx: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridEntry {
    alpha1: Option<Vec<Decimal>>,
    alpha2: Option<Vec<Decimal>>,
    alpha3: Option<Vec<Decimal>>,
    alpha4: Option<Vec<Decimal>>,
    alpha5: Option<Vec<Decimal>>,
    alpha6: Option<Vec<Decimal>>,
    alpha7: Option<Vec<Decimal>>,
    alpha8: Option<Vec<Decimal>>,
}

/// Parse and validate a configuration document, applying defaults.
pub fn validate_config(document: &str, policy: DefaultPolicy) -> Result<ResolvedConfig, ConfigError> {
    let doc: Document = toml::from_str(document).map_err(|e| ConfigError::Parse(e.to_string()))?;

    match (doc.schema_version, policy) {
        (Some(v), _) if v != SCHEMA_VERSION => {
            return Err(ConfigError::SchemaVersion {
                found: v,
                expected: SCHEMA_VERSION,
            })
        }
        (None, DefaultPolicy::Strict) => return Err(ConfigError::MissingKey("schema_version".into())),
        _ => {}
    }

    let machine = doc.machine.unwrap_or_default();
    machine.validate()?;
    let control = doc.control.unwrap_or_default();
    control.validate()?;

    let mut soils = vec![SoilSpec::gravel(), SoilSpec::sand(), SoilSpec::dirt()];
    for entry in doc.soils {
        if soils.iter().any(|s| s.name == entry.name) {
            return Err(ConfigError::invalid(format!("soil `{}`", entry.name), "name already defined"));
        }
        soils.push(SoilSpec::new(entry.name, entry.phi_deg, entry.psi_deg, entry.cohesion_kpa, entry.density)?);
    }

    let piles = match doc.piles {
        None => PileSpec::reference_piles(),
        Some(entries) => {
            let mut piles = Vec::with_capacity(entries.len());
            for entry in entries {
                let soil = soils
                    .iter()
                    .find(|s| s.name == entry.soil)
                    .cloned()
                    .ok_or_else(|| ConfigError::UnknownSoil(entry.soil.clone()))?;
                let pile = PileSpec {
                    name: entry.name.unwrap_or_else(|| PileSpec::default_name(&soil.name, entry.slope_deg)),
                    soil,
                    slope_deg: entry.slope_deg,
                    toe_x: entry.toe_x.unwrap_or(PileSpec::DEFAULT_TOE_X),
                    crest_height: entry.crest_height.unwrap_or(PileSpec::DEFAULT_CREST_HEIGHT),
                    grid_dx: entry.grid_dx.unwrap_or(PileSpec::DEFAULT_GRID_DX),
                };
                pile.validate()?;
                if piles.iter().any(|p: &PileSpec| p.name == pile.name) {
                    return Err(ConfigError::DuplicatePile(pile.name));
                }
                piles.push(pile);
            }
            piles
        }
    };

    let mut grid_values = reference_alpha_values();
    if let Some(grid) = doc.grid {
        let overrides = [
            grid.alpha1, grid.alpha2, grid.alpha3, grid.alpha4, grid.alpha5, grid.alpha6, grid.alpha7, grid.alpha8,
        ];
        for (slot, value) in grid_values.iter_mut().zip(overrides) {
            if let Some(v) = value {
                *slot = v;
            }
        }
        // validates ranges and emptiness
        super::build_parameter_grid(&grid_values)?;
    }

    Ok(ResolvedConfig {
        machine,
        control,
        soils,
        piles,
        grid_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gravel_by_name() {
        let cfg = validate_config("schema_version = 1\n[[piles]]\nsoil = \"gravel\"\nslope_deg = 30.0\n", DefaultPolicy::Strict)
            .unwrap();
        let soil = &cfg.piles[0].soil;
        assert_eq!((soil.phi_deg, soil.psi_deg, soil.cohesion_kpa, soil.density), (44.0, 11.0, 0.0, 1400.0));
        assert_eq!(cfg.piles[0].name, "gravel-30");
        assert_eq!(cfg.piles[0].grid_dx, 0.2);
    }

    #[test]
    fn empty_document_gives_builtins() {
        let cfg = validate_config("", DefaultPolicy::Allow).unwrap();
        assert_eq!(cfg.machine.operating_mass, 15_590.0);
        assert_eq!(cfg.machine.wheelbase, 3.030);
        assert_eq!(cfg.machine.bucket_capacity, 3.0);
        assert_eq!(cfg.control, ControlConstants::default());
        assert_eq!(cfg.piles.len(), 6);
        assert_eq!(cfg.grid_values, reference_alpha_values());
    }

    #[test]
    fn strict_policy_requires_schema_version() {
        assert_eq!(
            validate_config("", DefaultPolicy::Strict).unwrap_err(),
            ConfigError::MissingKey("schema_version".into())
        );
        assert!(matches!(
            validate_config("schema_version = 2", DefaultPolicy::Allow).unwrap_err(),
            ConfigError::SchemaVersion { found: 2, .. }
        ));
    }

    #[test]
    fn negative_cohesion_rejected() {
        let doc = "[[soils]]\nname = \"bad\"\nphi_deg = 30.0\npsi_deg = 5.0\ncohesion_kpa = -1.0\ndensity = 1400.0\n";
        assert!(matches!(validate_config(doc, DefaultPolicy::Allow).unwrap_err(), ConfigError::Invalid { .. }));
    }

    #[test]
    fn unknown_keys_and_soils_rejected() {
        assert!(matches!(
            validate_config("colour = \"red\"", DefaultPolicy::Allow).unwrap_err(),
            ConfigError::Parse(_)
        ));
        assert!(matches!(
            validate_config("[machine]\nturbo = true", DefaultPolicy::Allow).unwrap_err(),
            ConfigError::Parse(_)
        ));
        assert_eq!(
            validate_config("[[piles]]\nsoil = \"clay\"\nslope_deg = 30.0", DefaultPolicy::Allow).unwrap_err(),
            ConfigError::UnknownSoil("clay".into())
        );
    }

    #[test]
    fn missing_pile_key_rejected() {
        let err = validate_config("[[piles]]\nsoil = \"sand\"", DefaultPolicy::Allow).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(ref m) if m.contains("slope_deg")), "{err:?}");
    }

    #[test]
    fn unit_violations_rejected() {
        assert!(validate_config("[[piles]]\nsoil = \"sand\"\nslope_deg = 95.0", DefaultPolicy::Allow).is_err());
        assert!(validate_config("[control]\ndt = 0.0", DefaultPolicy::Allow).is_err());
        assert!(validate_config("[machine]\nwheel_friction = 2.5", DefaultPolicy::Allow).is_err());
    }

    #[test]
    fn custom_soil_and_grid_override() {
        let doc = r#"
            schema_version = 1
            [[soils]]
            name = "clay"
            phi_deg = 30.0
            psi_deg = 5.0
            cohesion_kpa = 12.0
            density = 1800.0
            [[piles]]
            name = "clay-steep"
            soil = "clay"
            slope_deg = 35.0
            crest_height = 2.5
            [grid]
            alpha1 = [0.5]
            alpha8 = [30.0]
        "#;
        let cfg = validate_config(doc, DefaultPolicy::Strict).unwrap();
        assert_eq!(cfg.piles[0].name, "clay-steep");
        assert_eq!(cfg.piles[0].crest_height, 2.5);
        assert_eq!(cfg.grid_values[0], vec![Decimal::from_milli(500)]);
        assert_eq!(cfg.grid_values[7], vec![Decimal::from_int(30)]);
        assert_eq!(cfg.grid_values[1].len(), 3);
        assert!(cfg.soil("clay").is_some());
    }

    #[test]
    fn grid_override_validated() {
        assert!(matches!(
            validate_config("[grid]\nalpha3 = [2.0]", DefaultPolicy::Allow).unwrap_err(),
            ConfigError::AlphaOutOfRange { index: 3, .. }
        ));
        assert_eq!(
            validate_config("[grid]\nalpha2 = []", DefaultPolicy::Allow).unwrap_err(),
            ConfigError::EmptyAlphaList(2)
        );
    }
}
