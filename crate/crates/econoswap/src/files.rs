//! On-disk formats.
//!
//! Floating-point values are written in shortest round-trip form, so every
//! `f64` reads back bit-identical. Files are written to a temporary sibling
//! and renamed into place once complete.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use econoswap_core::analysis::{Bin, BinScheme, Distribution};
use econoswap_core::{SimulationConfig, SimulationResult, SweepResult};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::AnalysisReport;

pub const FORMAT_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 5] = ["bin_lo", "bin_hi", "bin_center", "count", "density"];

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: invalid {what}: {msg}", path.display())]
    Format {
        path: PathBuf,
        what: &'static str,
        msg: String,
    },
    #[error("{}: unsupported format_version {found} (expected {FORMAT_VERSION})", path.display())]
    Version { path: PathBuf, found: u32 },
}

impl FileError {
    fn io(path: &Path, source: io::Error) -> Self {
        FileError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(path: &Path, what: &'static str, msg: impl ToString) -> Self {
        FileError::Format {
            path: path.to_path_buf(),
            what,
            msg: msg.to_string(),
        }
    }
}

/// A serialized [`SimulationResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub format_version: u32,
    pub simulation: SimulationResult,
}

/// A β sweep together with the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFile {
    pub format_version: u32,
    pub rule: String,
    pub base_config: SimulationConfig,
    pub scheme: BinScheme,
    pub bins: usize,
    pub min_count: u64,
    pub threshold: f64,
    pub sweep: SweepResult,
    /// Worst trace drift over all grid points.
    pub conservation_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisFile {
    pub format_version: u32,
    pub source: String,
    pub report: AnalysisReport,
}

/// Config echo, artifact paths and timing of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: String,
    pub config: Option<SimulationConfig>,
    pub artifacts: Vec<String>,
    pub wall_clock_seconds: f64,
    pub conservation_drift: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, config: Option<SimulationConfig>) -> Self {
        RunManifest {
            format_version: FORMAT_VERSION,
            command: command.to_string(),
            config,
            artifacts: Vec::new(),
            wall_clock_seconds: 0.0,
            conservation_drift: None,
        }
    }
}

/// `out.json` → `out.manifest.json`.
pub fn manifest_path(primary: &Path) -> PathBuf {
    let stem = primary
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    primary.with_file_name(format!("{stem}.manifest.json"))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FileError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let run = || -> io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    run().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        FileError::io(path, e)
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> Result<(), FileError> {
    let mut bytes = if pretty {
        serde_json::to_vec_pretty(value)
    } else {
        serde_json::to_vec(value)
    }
    .map_err(|e| FileError::format(path, "json", e))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &'static str) -> Result<T, FileError> {
    let bytes = fs::read(path).map_err(|e| FileError::io(path, e))?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(FileError::format(path, what, "file is empty"));
    }
    #[derive(Deserialize)]
    struct Versioned {
        format_version: Option<u32>,
    }
    let v: Versioned =
        serde_json::from_slice(&bytes).map_err(|e| FileError::format(path, what, e))?;
    match v.format_version {
        Some(FORMAT_VERSION) => {}
        Some(found) => {
            return Err(FileError::Version {
                path: path.to_path_buf(),
                found,
            })
        }
        None => return Err(FileError::format(path, what, "missing format_version")),
    }
    serde_json::from_slice(&bytes).map_err(|e| FileError::format(path, what, e))
}

pub fn result_to_bytes(result: &SimulationResult) -> Vec<u8> {
    let file = ResultFile {
        format_version: FORMAT_VERSION,
        simulation: result.clone(),
    };
    let mut bytes = serde_json::to_vec(&file).expect("simulation results are always finite");
    bytes.push(b'\n');
    bytes
}

pub fn write_result(path: &Path, result: &SimulationResult) -> Result<(), FileError> {
    write_atomic(path, &result_to_bytes(result))
}

pub fn read_result(path: &Path) -> Result<SimulationResult, FileError> {
    let file: ResultFile = read_json(path, "result file")?;
    let sim = file.simulation;
    if sim.realizations.is_empty() {
        return Err(FileError::format(path, "result file", "no realizations"));
    }
    if sim
        .realizations
        .iter()
        .any(|r| r.final_wealths.len() != sim.config.n_agents)
    {
        return Err(FileError::format(
            path,
            "result file",
            "realization length differs from n_agents",
        ));
    }
    Ok(sim)
}

pub fn write_sweep(path: &Path, sweep: &SweepFile) -> Result<(), FileError> {
    write_json(path, sweep, true)
}

pub fn read_sweep(path: &Path) -> Result<SweepFile, FileError> {
    read_json(path, "sweep file")
}

pub fn write_analysis(path: &Path, analysis: &AnalysisFile) -> Result<(), FileError> {
    write_json(path, analysis, true)
}

pub fn read_analysis(path: &Path) -> Result<AnalysisFile, FileError> {
    read_json(path, "analysis file")
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), FileError> {
    write_json(path, manifest, true)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, FileError> {
    read_json(path, "manifest")
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    bin_lo: f64,
    bin_hi: f64,
    bin_center: f64,
    count: u64,
    density: f64,
}

pub fn distribution_to_csv(dist: &Distribution) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for b in &dist.bins {
        w.serialize(CsvRow {
            bin_lo: b.lo,
            bin_hi: b.hi,
            bin_center: b.center,
            count: b.count,
            density: b.density,
        })
        .expect("writing to memory");
    }
    let mut bytes = w.into_inner().expect("writing to memory");
    if dist.bins.is_empty() {
        bytes = format!("{}\n", CSV_HEADER.join(",")).into_bytes();
    }
    bytes
}

pub fn write_distribution_csv(path: &Path, dist: &Distribution) -> Result<(), FileError> {
    write_atomic(path, &distribution_to_csv(dist))
}

/// Reads the bins of a distribution CSV.
pub fn read_distribution_csv(path: &Path) -> Result<Vec<Bin>, FileError> {
    let bytes = fs::read(path).map_err(|e| FileError::io(path, e))?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let headers = r
        .headers()
        .map_err(|e| FileError::format(path, "distribution csv", e))?;
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(FileError::format(
            path,
            "distribution csv",
            format!("expected header {}", CSV_HEADER.join(",")),
        ));
    }
    r.deserialize::<CsvRow>()
        .map(|row| {
            let row = row.map_err(|e| FileError::format(path, "distribution csv", e))?;
            Ok(Bin {
                lo: row.bin_lo,
                hi: row.bin_hi,
                center: row.bin_center,
                count: row.count,
                density: row.density,
            })
        })
        .collect()
}
