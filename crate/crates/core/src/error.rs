use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Terrain(#[from] TerrainError),

    #[error(transparent)]
    Machine(#[from] MachineError),

    #[error(transparent)]
    Metrics(#[from] MetricsError),

    #[error(transparent)]
    Sweep(#[from] SweepError),

    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("failed to parse config: {0}")]
    Parse(String),

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("unknown soil `{0}`")]
    UnknownSoil(String),

    #[error("invalid value for {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("alpha{index} value {value} is outside its admissible range {range}")]
    AlphaOutOfRange {
        index: usize,
        value: String,
        range: &'static str,
    },

    #[error("value list for alpha{0} is empty")]
    EmptyAlphaList(usize),

    #[error("expected 8 alpha value lists, got {0}")]
    AlphaListCount(usize),

    #[error("{0} is not representable with three decimals")]
    InexactDecimal(f64),

    #[error("duplicate pile name `{0}`")]
    DuplicatePile(String),

    #[error("campaign needs at least one {0}")]
    EmptyCampaign(&'static str),
}

impl ConfigError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TerrainError {
    #[error("domain of {domain:.3} m cannot hold a pile ramp ending at {needed:.3} m")]
    DomainTooShort { domain: f64, needed: f64 },

    #[error("no admissible trial wedge for phi={phi}°, delta={delta}°, rake={rake}°")]
    DegenerateWedge { phi: f64, delta: f64, rake: f64 },

    #[error("invalid wedge input: {0}")]
    WedgeInput(String),

    #[error("slope relaxation did not settle within {0} iterations")]
    RelaxationDiverged(usize),

    #[error("invalid pile: {0}")]
    InvalidPile(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum MachineError {
    #[error("non-finite machine state after integration at x={x}, v={v}")]
    NonFinite { x: f64, v: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("load of {m_load} kg with non-positive duration {t_load} s")]
    NonPositiveDuration { m_load: f64, t_load: f64 },

    #[error("load of {m_load} kg with non-positive work {work} kJ")]
    NonPositiveWork { m_load: f64, work: f64 },
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("result store at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("worker_count must be at least 1")]
    NoWorkers,

    #[error("malformed result row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("store at {0} belongs to a different campaign")]
    ManifestMismatch(PathBuf),

    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

impl SweepError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("invalid bins: {0}")]
    InvalidBins(String),

    #[error("no records for pile `{0}`")]
    EmptyPile(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
