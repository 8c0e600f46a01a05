use std::collections::HashSet;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::{ActionParams, MachineSpec, PileSpec, SCHEMA_VERSION};
use crate::error::ConfigError;

/// One planned loading cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestRow {
    /// 16 hex digits derived from the pile and action.
    pub run_id: String,
    /// Index into [`CampaignManifest::piles`].
    pub pile: usize,
    pub action: ActionParams,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignManifest {
    pub schema_version: u32,
    pub machine_hash: String,
    pub piles: Vec<PileSpec>,
    pub rows: Vec<ManifestRow>,
}

impl CampaignManifest {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn pile_of(&self, row: &ManifestRow) -> &PileSpec {
        &self.piles[row.pile]
    }

    /// Manifest as CSV text: `run_id,pile,alpha1..alpha8,seed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run_id,pile,alpha1,alpha2,alpha3,alpha4,alpha5,alpha6,alpha7_deg,alpha8_deg,seed\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                row.run_id,
                self.piles[row.pile].name,
                row.action.canonical(),
                row.seed
            );
        }
        out
    }

    /// Digest over the machine hash and every row; stable across builds.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("schema={};machine={}\n", self.schema_version, self.machine_hash));
        hasher.update(self.to_csv());
        hex16(&hasher.finalize())
    }

    /// Restrict to the given rows, keeping pile indices valid.
    pub fn with_rows(&self, rows: Vec<ManifestRow>) -> Self {
        Self {
            schema_version: self.schema_version,
            machine_hash: self.machine_hash.clone(),
            piles: self.piles.clone(),
            rows,
        }
    }
}

fn hex16(bytes: &[u8]) -> String {
    bytes[..8].iter().fold(String::with_capacity(16), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Stable run id of a (pile, action) pair.
pub fn run_id(pile: &PileSpec, action: &ActionParams) -> String {
    run_id_from(&pile_hasher(pile), &action.canonical())
}

fn pile_hasher(pile: &PileSpec) -> Sha256 {
    let mut hasher = Sha256::new();
    hasher.update(pile.canonical());
    hasher.update(b"|");
    hasher
}

fn run_id_from(prefix: &Sha256, canonical_action: &str) -> String {
    let mut hasher = prefix.clone();
    hasher.update(canonical_action);
    hex16(&hasher.finalize())
}

/// Seed derived from the run id. Reserved for stochastic soil variants.
pub fn run_seed(run_id: &str) -> u64 {
    let digest = Sha256::digest(run_id.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Cross every pile with every action. Rows are pile-major, in grid order.
pub fn enumerate_campaign(
    piles: &[PileSpec],
    grid: &[ActionParams],
    machine: &MachineSpec,
) -> Result<CampaignManifest, ConfigError> {
    if piles.is_empty() {
        return Err(ConfigError::EmptyCampaign("pile"));
    }
    if grid.is_empty() {
        return Err(ConfigError::EmptyCampaign("action"));
    }
    let mut names = HashSet::new();
    for pile in piles {
        if !names.insert(pile.name.as_str()) {
            return Err(ConfigError::DuplicatePile(pile.name.clone()));
        }
    }

    let mut rows = Vec::with_capacity(piles.len() * grid.len());
    let mut ids = HashSet::with_capacity(piles.len() * grid.len());
    let canonical: Vec<String> = grid.iter().map(ActionParams::canonical).collect();
    for (p, pile) in piles.iter().enumerate() {
        let prefix = pile_hasher(pile);
        for (action, text) in grid.iter().zip(&canonical) {
            let id = run_id_from(&prefix, text);
            if !ids.insert(id.clone()) {
                return Err(ConfigError::invalid("manifest", format!("run id collision on {id}")));
            }
            rows.push(ManifestRow {
                seed: run_seed(&id),
                run_id: id,
                pile: p,
                action: *action,
            });
        }
    }

    Ok(CampaignManifest {
        schema_version: SCHEMA_VERSION,
        machine_hash: hex16(&Sha256::digest(machine.canonical())),
        piles: piles.to_vec(),
        rows,
    })
}
