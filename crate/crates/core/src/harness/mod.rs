//! Scenario files, Monte-Carlo experiment runners, end-to-end audio
//! processing and the files they write.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acoustics::AcousticsError;
use crate::beamforming::BeamformingError;
use crate::geometry::GeometryError;
use crate::metrics::MetricsError;
use crate::stft::StftError;

pub mod config;
pub mod design;
pub mod experiments;
pub mod process;
pub mod simulate;

pub use config::{Scenario, ScenarioConfig, PRESETS, SCHEMA_VERSION};
pub use design::{design_scenario, scenario_beampattern, weights_json};
pub use experiments::{
    run_sinr_vs_freq, run_sinr_vs_k, run_snr_gain, run_udr_vs_k, ExperimentKind, ExperimentResult, ExperimentSummary,
    MetricValue, TrialRecord,
};
pub use process::{process_audio, AudioInputs, ProcessResult};
pub use simulate::{simulate, Simulation};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Acoustics(#[from] AcousticsError),
    #[error(transparent)]
    Beamforming(#[from] BeamformingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Stft(#[from] StftError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}

/// What produced a set of result files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// SHA-256 of the scenario after command-line overrides.
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_trials: Option<usize>,
}

impl Provenance {
    pub fn new(command: &str, scenario: &Scenario, num_trials: Option<usize>) -> Self {
        Self {
            tool: "rakeroom".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: scenario.seed(),
            config_hash: scenario.config.hash(),
            num_trials,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("provenance serializes") + "\n"
    }
}

/// Create `dir` if needed and write `bytes` to `dir/name`.
pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Render rows of already formatted fields as CSV.
pub(crate) fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>, HarnessError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
}

/// Shortest round-trip decimal form; non-finite values become empty fields.
pub(crate) fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

/// Spectrogram as CSV: one row per frame, `time_s` then one column per bin
/// labelled with its frequency in Hz.
pub fn spectrogram_csv(
    spec: &[Vec<f64>],
    stft: &crate::stft::StftConfig,
    sampling_rate: f64,
) -> Result<Vec<u8>, HarnessError> {
    let labels: Vec<String> = std::iter::once("time_s".to_string())
        .chain((0..stft.num_bins()).map(|i| format!("{}", stft.bin_frequency(i, sampling_rate))))
        .collect();
    let header: Vec<&str> = labels.iter().map(String::as_str).collect();
    let pad = stft.padding() as f64;
    csv_bytes(
        &header,
        spec.iter().enumerate().map(|(t, row)| {
            // Frame t is centred on padded sample t·hop + L/2.
            let centre = (t * stft.hop) as f64 + stft.frame_length as f64 / 2.0 - pad;
            std::iter::once(fmt_f64(centre / sampling_rate))
                .chain(row.iter().map(|v| fmt_f64(*v)))
                .collect::<Vec<_>>()
        }),
    )
}
