//! End-to-end processing: render the scene, design per-bin weights, run the
//! STFT beamformer and score the output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acoustics::{
    mic_noise, noise_std_for_snr, read_wav, render_mic_signals, write_wav, HighpassFilter, RenderSource, WavFormat,
};
use crate::beamforming::{BeamWeights, Design, DesignProblem};
use crate::geometry::enumerate_images;
use crate::metrics::{spectrogram, to_db};
use crate::stft::beamform;

use super::config::Scenario;
use super::{spectrogram_csv, write_file, ConfigError, HarnessError, Provenance};

/// Dry source signals at the scenario sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioInputs {
    pub desired: Vec<f64>,
    pub interferer: Option<Vec<f64>>,
}

impl AudioInputs {
    /// Read the WAV files named by the scenario (first channel of each).
    pub fn load(scenario: &Scenario) -> Result<Self, HarnessError> {
        let fs = scenario.sampling_rate_hz();
        let path = scenario
            .config
            .source
            .wav
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("source.wav is required for processing".into()))?;
        let desired = read_wav(path)?.mono_at(fs)?;
        let interferer = match &scenario.config.interferer {
            Some(i) => {
                let path = i
                    .wav
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("interferer.wav is required for processing".into()))?;
                Some(read_wav(path)?.mono_at(fs)?)
            }
            None => None,
        };
        Ok(Self { desired, interferer })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessResult {
    pub design: Design,
    pub sample_rate: u32,
    /// Dry desired signal after input scaling and high-pass filtering.
    pub clean: Vec<f64>,
    /// Microphone 0: desired, interferer and noise.
    pub degraded: Vec<f64>,
    /// Beamformer output for the full mixture.
    pub output: Vec<f64>,
    pub weights: BeamWeights,
    /// Desired over interferer-plus-noise power at microphone 0.
    pub input_sinr_db: f64,
    /// Desired over interferer-plus-noise power at the beamformer output.
    pub output_sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ProcessReport {
    design: Design,
    k: usize,
    k_interferer: usize,
    sample_rate: u32,
    num_samples: usize,
    input_sinr_db: f64,
    output_sinr_db: f64,
    provenance: Provenance,
}

fn power(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }
}

fn unit_peak(x: &[f64]) -> Vec<f64> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter().map(|v| v / peak).collect()
    } else {
        x.to_vec()
    }
}

fn pad_to(rows: &mut [Vec<f64>], len: usize) {
    for r in rows {
        r.resize(len, 0.0);
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Render desired, interferer and noise separately at every microphone,
/// high-pass them, beamform each with the same per-bin weights and score the
/// output. Rendering uses every image up to `room.max_order`; the design
/// only knows `K` and `K′` of them.
pub fn process_audio(scenario: &Scenario, inputs: &AudioInputs) -> Result<ProcessResult, HarnessError> {
    let cfg = &scenario.config;
    let p = &cfg.processing;
    if inputs.desired.is_empty() {
        return Err(ConfigError::Invalid("desired signal is empty".into()).into());
    }
    if inputs.interferer.is_some() != scenario.interferer.is_some() {
        return Err(ConfigError::Invalid(
            "an interferer signal must be given exactly when the scenario has an interferer".into(),
        )
        .into());
    }
    let prep = |x: &[f64]| if p.normalize_inputs { unit_peak(x) } else { x.to_vec() };
    let desired = prep(&inputs.desired);
    let interferer = inputs.interferer.as_deref().map(prep);

    let order = cfg.room.max_order;
    let s_set = enumerate_images(&scenario.room, scenario.source, order)?;
    let q_set = match scenario.interferer {
        Some(q) => Some(enumerate_images(&scenario.room, q, order)?),
        None => None,
    };
    let m = scenario.array.len();
    let hw = cfg.room.rir_halfwidth;
    let silent = vec![0.0; m];

    let mut y_s = render_mic_signals(
        &[RenderSource {
            images: &s_set,
            signal: &desired,
        }],
        &scenario.array,
        &scenario.medium,
        hw,
        &silent,
        0,
    )?;
    let mut y_q = match (&q_set, &interferer) {
        (Some(set), Some(sig)) => render_mic_signals(
            &[RenderSource { images: set, signal: sig }],
            &scenario.array,
            &scenario.medium,
            hw,
            &silent,
            0,
        )?,
        _ => vec![Vec::new(); m],
    };
    let len = y_s[0].len().max(y_q[0].len());
    pad_to(&mut y_s, len);
    pad_to(&mut y_q, len);
    let std = if p.snr_db.is_finite() {
        noise_std_for_snr(&desired, scenario.source, scenario.array.centroid(), p.snr_db)
    } else {
        0.0
    };
    let mut y_n = mic_noise(&vec![std; m], len, scenario.seed());

    let fs = scenario.medium.sampling_rate;
    let mut clean = desired.clone();
    if p.highpass_hz > 0.0 {
        let hp = HighpassFilter::butterworth4(p.highpass_hz, fs);
        for row in y_s.iter_mut().chain(y_q.iter_mut()).chain(y_n.iter_mut()) {
            *row = hp.process(row);
        }
        clean = hp.process(&clean);
    }

    let problem = DesignProblem {
        design: scenario.design(),
        array: &scenario.array,
        medium: &scenario.medium,
        desired: &s_set,
        interferer: q_set.as_ref(),
        noise: &scenario.noise,
        k: scenario.k(),
        k_interferer: scenario.k_interferer(),
    };
    let weights = problem.design_bins(&scenario.stft)?;
    let out_s = beamform(&y_s, &weights.bins, &scenario.stft)?;
    let out_q = beamform(&y_q, &weights.bins, &scenario.stft)?;
    let out_n = beamform(&y_n, &weights.bins, &scenario.stft)?;
    let out_qn = add(&out_q, &out_n);
    let output = add(&out_s, &out_qn);

    let in_qn = add(&y_q[0], &y_n[0]);
    let degraded = add(&y_s[0], &in_qn);
    Ok(ProcessResult {
        design: scenario.design(),
        sample_rate: scenario.sampling_rate_hz(),
        clean,
        degraded,
        output,
        weights,
        input_sinr_db: to_db(power(&y_s[0]) / power(&in_qn)),
        output_sinr_db: to_db(power(&out_s) / power(&out_qn)),
    })
}

impl ProcessResult {
    /// Writes `output.wav`, `degraded.wav`, `clean.wav`, the three
    /// `spectrogram_*.csv` matrices and `process.json`.
    pub fn write(&self, dir: &Path, scenario: &Scenario) -> Result<Vec<PathBuf>, HarnessError> {
        let mut written = Vec::new();
        for (name, signal) in [("output", &self.output), ("degraded", &self.degraded), ("clean", &self.clean)] {
            std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            let path = dir.join(format!("{name}.wav"));
            write_wav(&path, std::slice::from_ref(signal), self.sample_rate, WavFormat::Float32)?;
            written.push(path);
        }
        let fs = self.sample_rate as f64;
        for (name, signal) in [("clean", &self.clean), ("degraded", &self.degraded), ("processed", &self.output)] {
            let spec = spectrogram(signal, &scenario.stft)?;
            written.push(write_file(
                dir,
                &format!("spectrogram_{name}.csv"),
                &spectrogram_csv(&spec, &scenario.stft, fs)?,
            )?);
        }
        let report = ProcessReport {
            design: self.design,
            k: self.weights.k,
            k_interferer: self.weights.k_interferer,
            sample_rate: self.sample_rate,
            num_samples: self.output.len(),
            input_sinr_db: self.input_sinr_db,
            output_sinr_db: self.output_sinr_db,
            provenance: Provenance::new("process", scenario, None),
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        written.push(write_file(dir, "process.json", json.as_bytes())?);
        Ok(written)
    }
}
