//! Parallel, resumable campaign execution.
//!
//! A store directory holds:
//!
//! - `manifest.csv`: the planned runs,
//! - `campaign.meta`: manifest hash, checked on resume,
//! - `results.log`: one CSV row per finished run, appended and flushed as runs complete,
//! - `results.csv`: the log sorted by run id, written once every run is done.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::config::{ActionParams, CampaignManifest, ControlConstants, Decimal, MachineSpec, ManifestRow, PileSpec};
use crate::error::SweepError;
use crate::sim::{run_loading_cycle, Flag, LoadingRecord};

pub const RESULTS_HEADER: &str = "run_id,soil,slope_deg,alpha1,alpha2,alpha3,alpha4,alpha5,alpha6,alpha7_deg,alpha8_deg,m_load_kg,t_load_s,W_kJ,s_load_pct,P_e_kg_per_kJ,P_p_kg_per_s,P_b,flag";
const RESULTS_FIELDS: usize = 19;

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const META_FILE: &str = "campaign.meta";
pub const LOG_FILE: &str = "results.log";
pub const RESULTS_FILE: &str = "results.csv";

/// One results row, without the trailing newline. Floats use the shortest round-trip form.
pub fn format_record(r: &LoadingRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.run_id,
        r.soil,
        r.slope_deg,
        r.action.canonical(),
        r.m_load,
        r.t_load,
        r.work,
        r.s_load,
        r.p_e,
        r.p_p,
        r.p_b,
        r.flag
    )
}

/// Parse one results row. The pile name is rebuilt as `{soil}-{slope}`.
pub fn parse_record(line: &str) -> Result<LoadingRecord, String> {
    let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split(',').collect();
    if fields.len() != RESULTS_FIELDS {
        return Err(format!("expected {RESULTS_FIELDS} fields, found {}", fields.len()));
    }
    let num = |i: usize| -> Result<f64, String> {
        fields[i]
            .parse::<f64>()
            .map_err(|_| format!("field {} is not a number: `{}`", i + 1, fields[i]))
    };
    let mut alpha = [Decimal::ZERO; 8];
    for (k, slot) in alpha.iter_mut().enumerate() {
        *slot = Decimal::from_str(fields[3 + k]).map_err(|e| e.to_string())?;
    }
    let action = ActionParams::new(alpha).map_err(|e| e.to_string())?;
    let slope_deg = num(2)?;
    Ok(LoadingRecord {
        run_id: fields[0].to_string(),
        pile: PileSpec::default_name(fields[1], slope_deg),
        soil: fields[1].to_string(),
        slope_deg,
        action,
        m_load: num(11)?,
        t_load: num(12)?,
        work: num(13)?,
        s_load: num(14)?,
        p_e: num(15)?,
        p_p: num(16)?,
        p_b: num(17)?,
        flag: Flag::from_str(fields[18])?,
    })
}

/// Read a finalized results file.
pub fn read_results(path: &Path) -> Result<Vec<LoadingRecord>, SweepError> {
    let text = fs::read_to_string(path).map_err(|e| SweepError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(RESULTS_HEADER) => {}
        _ => {
            return Err(SweepError::MalformedRow {
                line: 1,
                reason: "missing results header".into(),
            })
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| parse_record(l).map_err(|reason| SweepError::MalformedRow { line: i + 2, reason }))
        .collect()
}

/// Durable store for one campaign.
#[derive(Debug)]
pub struct ResultStore {
    dir: PathBuf,
    log: File,
    completed: BTreeSet<String>,
}

impl ResultStore {
    /// Start a fresh campaign in `dir`, discarding any earlier log.
    pub fn create(dir: &Path, manifest: &CampaignManifest) -> Result<Self, SweepError> {
        fs::create_dir_all(dir).map_err(|e| SweepError::io(dir, e))?;
        write_atomic(&dir.join(MANIFEST_FILE), manifest.to_csv().as_bytes())?;
        write_atomic(&dir.join(META_FILE), meta_text(manifest).as_bytes())?;
        let _ = fs::remove_file(dir.join(RESULTS_FILE));
        let log_path = dir.join(LOG_FILE);
        let log = File::create(&log_path).map_err(|e| SweepError::io(&log_path, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            log,
            completed: BTreeSet::new(),
        })
    }

    /// Reopen an interrupted campaign. A partially written last row is dropped.
    pub fn resume(dir: &Path, manifest: &CampaignManifest) -> Result<Self, SweepError> {
        let meta_path = dir.join(META_FILE);
        let meta = fs::read_to_string(&meta_path).map_err(|e| SweepError::io(&meta_path, e))?;
        if meta != meta_text(manifest) {
            return Err(SweepError::ManifestMismatch(dir.to_path_buf()));
        }

        let log_path = dir.join(LOG_FILE);
        let mut log = OpenOptions::new()
            .read(true)
            .append(true)
            .open(&log_path)
            .map_err(|e| SweepError::io(&log_path, e))?;
        let mut text = String::new();
        log.read_to_string(&mut text).map_err(|e| SweepError::io(&log_path, e))?;
        let complete_len = text.rfind('\n').map_or(0, |i| i + 1);
        if complete_len < text.len() {
            log.set_len(complete_len as u64).map_err(|e| SweepError::io(&log_path, e))?;
            log.seek(SeekFrom::End(0)).map_err(|e| SweepError::io(&log_path, e))?;
        }

        let known: BTreeSet<&str> = manifest.rows.iter().map(|r| r.run_id.as_str()).collect();
        let mut completed = BTreeSet::new();
        for (i, line) in text[..complete_len].lines().enumerate() {
            let id = line.split(',').next().unwrap_or_default();
            if !known.contains(id) || line.split(',').count() != RESULTS_FIELDS {
                return Err(SweepError::MalformedRow {
                    line: i + 1,
                    reason: format!("`{id}` is not a complete row of this campaign"),
                });
            }
            completed.insert(id.to_string());
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            log,
            completed,
        })
    }

    /// `resume` when asked to and a log exists, otherwise `create`.
    pub fn open(dir: &Path, manifest: &CampaignManifest, resume: bool) -> Result<Self, SweepError> {
        if resume && dir.join(LOG_FILE).exists() {
            Self::resume(dir, manifest)
        } else {
            Self::create(dir, manifest)
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn results_path(&self) -> PathBuf {
        self.dir.join(RESULTS_FILE)
    }

    pub fn completed(&self) -> &BTreeSet<String> {
        &self.completed
    }

    /// Manifest rows without a stored result, in manifest order.
    pub fn pending<'m>(&self, manifest: &'m CampaignManifest) -> Vec<&'m ManifestRow> {
        manifest.rows.iter().filter(|r| !self.completed.contains(&r.run_id)).collect()
    }

    /// Append one record and flush it to the log.
    pub fn append(&mut self, record: &LoadingRecord) -> Result<(), SweepError> {
        if !self.completed.insert(record.run_id.clone()) {
            return Ok(());
        }
        let line = format_record(record) + "\n";
        let path = self.dir.join(LOG_FILE);
        self.log
            .write_all(line.as_bytes())
            .and_then(|_| self.log.flush())
            .map_err(|e| SweepError::io(path, e))
    }

    /// Write `results.csv`: the header then every logged row sorted by run id.
    pub fn finalize(&self) -> Result<PathBuf, SweepError> {
        let log_path = self.dir.join(LOG_FILE);
        let text = fs::read_to_string(&log_path).map_err(|e| SweepError::io(&log_path, e))?;
        let mut rows: BTreeMap<&str, &str> = BTreeMap::new();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let id = line.split(',').next().unwrap_or_default();
            rows.entry(id).or_insert(line);
        }
        let mut out = String::with_capacity(text.len() + RESULTS_HEADER.len() + 1);
        out.push_str(RESULTS_HEADER);
        out.push('\n');
        for line in rows.values() {
            out.push_str(line);
            out.push('\n');
        }
        let path = self.results_path();
        write_atomic(&path, out.as_bytes())?;
        Ok(path)
    }
}

fn meta_text(manifest: &CampaignManifest) -> String {
    format!(
        "schema_version={}\nmachine_hash={}\nmanifest_hash={}\nruns={}\n",
        manifest.schema_version,
        manifest.machine_hash,
        manifest.hash(),
        manifest.len()
    )
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SweepError> {
    let tmp = path.with_extension("tmp");
    let mut file = File::create(&tmp).map_err(|e| SweepError::io(&tmp, e))?;
    file.write_all(bytes)
        .and_then(|_| file.sync_all())
        .map_err(|e| SweepError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| SweepError::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecOptions {
    pub workers: usize,
    /// Stop after this many new runs; the campaign stays resumable.
    pub limit: Option<usize>,
}

impl ExecOptions {
    pub fn workers(workers: usize) -> Self {
        Self { workers, limit: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompletionSummary {
    pub total: usize,
    /// Runs already stored before this call.
    pub skipped: usize,
    pub executed: usize,
    pub remaining: usize,
    pub flags: BTreeMap<String, usize>,
    pub workers: usize,
    pub wall: Duration,
    /// Cores actually available to the pool: `min(workers, host parallelism)`.
    pub cores: usize,
    /// Set once every run is stored and `results.csv` is written.
    pub results: Option<PathBuf>,
}

/// Run every pending manifest row on a pool of `options.workers` threads.
///
/// Per-run failures end up as flagged rows; only store I/O errors abort.
pub fn execute_campaign(
    manifest: &CampaignManifest,
    machine: &MachineSpec,
    constants: &ControlConstants,
    options: ExecOptions,
    store: &mut ResultStore,
) -> Result<CompletionSummary, SweepError> {
    if options.workers == 0 {
        return Err(SweepError::NoWorkers);
    }
    let pending = store.pending(manifest);
    let skipped = manifest.len() - pending.len();
    let batch: Vec<&ManifestRow> = match options.limit {
        Some(n) => pending.into_iter().take(n).collect(),
        None => pending,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let flags = Mutex::new(BTreeMap::<String, usize>::new());
    let shared = Mutex::new(&mut *store);
    let started = Instant::now();
    pool.install(|| {
        batch.par_iter().try_for_each(|row| {
            let record = run_loading_cycle(manifest.pile_of(row), machine, &row.action, constants, row.seed);
            *flags.lock().expect("flag counter").entry(record.flag.to_string()).or_default() += 1;
            shared.lock().expect("result store").append(&record)
        })
    })?;
    let wall = started.elapsed();

    let remaining = store.pending(manifest).len();
    let results = if remaining == 0 { Some(store.finalize()?) } else { None };
    let host = std::thread::available_parallelism().map_or(1, |n| n.get());
    Ok(CompletionSummary {
        total: manifest.len(),
        skipped,
        executed: batch.len(),
        remaining,
        flags: flags.into_inner().expect("flag counter"),
        workers: options.workers,
        wall,
        cores: options.workers.min(host),
        results,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThroughputReport {
    pub runs: usize,
    pub wall_seconds: f64,
    pub core_seconds: f64,
    pub runs_per_core_hour: f64,
    pub runs_per_wall_hour: f64,
}

impl ThroughputReport {
    pub fn from_core_seconds(runs: usize, wall_seconds: f64, core_seconds: f64) -> Self {
        let per_hour = |secs: f64| if secs > 0.0 { runs as f64 * 3600.0 / secs } else { 0.0 };
        Self {
            runs,
            wall_seconds,
            core_seconds,
            runs_per_core_hour: per_hour(core_seconds),
            runs_per_wall_hour: per_hour(wall_seconds),
        }
    }
}

/// Throughput of the runs executed in `summary`.
pub fn throughput_report(summary: &CompletionSummary) -> ThroughputReport {
    let wall = summary.wall.as_secs_f64();
    ThroughputReport::from_core_seconds(summary.executed, wall, wall * summary.cores as f64)
}
