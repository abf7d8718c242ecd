//! Short-time Fourier analysis, per-bin weighting and overlap-add synthesis.
//!
//! Analysis uses a periodic Hann window, synthesis is rectangular; the
//! overlap-add is divided by the window's constant overlap sum, so with the
//! default 50% overlap analysis followed by synthesis is the identity.
//! Signals are zero-padded by `frame_length - hop` samples on both ends before
//! framing (half a frame at 50% overlap).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const COLA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StftError {
    #[error("invalid STFT configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty signal")]
    EmptySignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftConfig {
    pub frame_length: usize,
    pub hop: usize,
    pub fft_length: usize,
    #[serde(default)]
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self::with_frame_length(4096)
    }
}

impl StftConfig {
    /// Half-overlapping frames of `frame_length` with a transform twice as long.
    pub fn with_frame_length(frame_length: usize) -> Self {
        Self {
            frame_length,
            hop: frame_length / 2,
            fft_length: 2 * frame_length,
            window: WindowKind::Hann,
        }
    }

    pub fn num_bins(&self) -> usize {
        self.fft_length / 2 + 1
    }

    pub fn bin_frequency(&self, bin: usize, sampling_rate: f64) -> f64 {
        bin as f64 * sampling_rate / self.fft_length as f64
    }

    /// Bin whose centre frequency is nearest to `hz`.
    pub fn nearest_bin(&self, hz: f64, sampling_rate: f64) -> usize {
        let b = (hz * self.fft_length as f64 / sampling_rate).round();
        (b.max(0.0) as usize).min(self.num_bins() - 1)
    }

    /// Zero padding applied on each side of the signal.
    pub fn padding(&self) -> usize {
        self.frame_length - self.hop
    }

    pub fn num_frames(&self, signal_len: usize) -> usize {
        (signal_len + 2 * self.padding()).div_ceil(self.hop)
    }

    pub fn window(&self) -> Vec<f64> {
        let l = self.frame_length as f64;
        match self.window {
            WindowKind::Hann => (0..self.frame_length)
                .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / l).cos())
                .collect(),
        }
    }

    /// Overlap sum of the analysis window when it is constant.
    pub fn cola_constant(&self) -> Result<f64, StftError> {
        let w = self.window();
        let sums: Vec<f64> = (0..self.hop)
            .map(|r| w.iter().skip(r).step_by(self.hop).sum())
            .collect();
        let c = sums[0];
        if sums.iter().any(|s| (s - c).abs() > COLA_TOLERANCE * c.abs().max(1.0)) {
            return Err(StftError::InvalidConfig(format!(
                "window with frame length {} and hop {} is not constant-overlap-add",
                self.frame_length, self.hop
            )));
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), StftError> {
        if self.frame_length < 2 || !self.frame_length.is_multiple_of(2) {
            return Err(StftError::InvalidConfig(format!(
                "frame length must be even and at least 2, got {}",
                self.frame_length
            )));
        }
        if self.hop == 0 || self.hop > self.frame_length {
            return Err(StftError::InvalidConfig(format!(
                "hop must lie in 1..={}, got {}",
                self.frame_length, self.hop
            )));
        }
        if self.fft_length < self.frame_length || !self.fft_length.is_multiple_of(2) {
            return Err(StftError::InvalidConfig(format!(
                "FFT length must be even and at least the frame length, got {}",
                self.fft_length
            )));
        }
        self.cola_constant().map(|_| ())
    }
}

/// Positive-frequency spectra of consecutive frames of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrames {
    /// `frames[t][i]` is bin `i` of frame `t`.
    pub frames: Vec<Vec<Complex64>>,
    /// Length of the analyzed signal before padding.
    pub signal_len: usize,
}

impl SpectralFrames {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn num_bins(&self) -> usize {
        self.frames.first().map_or(0, Vec::len)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            frames: vec![vec![Complex64::new(0.0, 0.0); self.num_bins()]; self.num_frames()],
            signal_len: self.signal_len,
        }
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Plans {
    let mut planner = FftPlanner::new();
    Plans {
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    }
}

pub fn analyze(signal: &[f64], cfg: &StftConfig) -> Result<SpectralFrames, StftError> {
    cfg.validate()?;
    if signal.is_empty() {
        return Err(StftError::EmptySignal);
    }
    let pad = cfg.padding();
    let t = cfg.num_frames(signal.len());
    let window = cfg.window();
    let p = plans(cfg.fft_length);
    let bins = cfg.num_bins();
    let frames = (0..t)
        .into_par_iter()
        .map(|f| {
            let mut buf = vec![Complex64::new(0.0, 0.0); cfg.fft_length];
            let start = (f * cfg.hop) as isize - pad as isize;
            for (n, w) in window.iter().enumerate() {
                let idx = start + n as isize;
                if idx >= 0 && (idx as usize) < signal.len() {
                    buf[n].re = signal[idx as usize] * w;
                }
            }
            p.forward.process(&mut buf);
            buf.truncate(bins);
            buf
        })
        .collect();
    Ok(SpectralFrames {
        frames,
        signal_len: signal.len(),
    })
}

pub fn synthesize(frames: &SpectralFrames, cfg: &StftConfig) -> Result<Vec<f64>, StftError> {
    cfg.validate()?;
    let bins = cfg.num_bins();
    if let Some((t, f)) = frames.frames.iter().enumerate().find(|(_, f)| f.len() != bins) {
        return Err(StftError::ShapeMismatch(format!(
            "frame {t} has {} bins, configuration expects {bins}",
            f.len()
        )));
    }
    if frames.num_frames() != cfg.num_frames(frames.signal_len) {
        return Err(StftError::ShapeMismatch(format!(
            "{} frames for a signal of {} samples, expected {}",
            frames.num_frames(),
            frames.signal_len,
            cfg.num_frames(frames.signal_len)
        )));
    }
    let n = cfg.fft_length;
    let p = plans(n);
    let scale = 1.0 / (n as f64 * cfg.cola_constant()?);
    let segments: Vec<Vec<f64>> = frames
        .frames
        .par_iter()
        .map(|spec| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            buf[..bins].copy_from_slice(spec);
            // Real output requires real DC and Nyquist bins.
            buf[0].im = 0.0;
            buf[n / 2].im = 0.0;
            for i in 1..n / 2 {
                buf[n - i] = buf[i].conj();
            }
            p.inverse.process(&mut buf);
            buf.iter().map(|z| z.re * scale).collect()
        })
        .collect();
    let total = (segments.len().saturating_sub(1)) * cfg.hop + n;
    let mut out = vec![0.0; total];
    for (t, seg) in segments.iter().enumerate() {
        for (o, v) in out[t * cfg.hop..].iter_mut().zip(seg) {
            *o += v;
        }
    }
    let pad = cfg.padding();
    Ok(out[pad..pad + frames.signal_len].to_vec())
}

/// Beamformer output `wᴴ(i) y(t, i)` for every frame `t` and bin `i`.
///
/// `channels[m]` holds the frames of microphone `m`, `weights[i]` the weight
/// vector of bin `i`.
pub fn apply_weights(channels: &[SpectralFrames], weights: &[Vec<Complex64>]) -> Result<SpectralFrames, StftError> {
    let first = channels
        .first()
        .ok_or_else(|| StftError::ShapeMismatch("no input channels".into()))?;
    let (t, bins, m) = (first.num_frames(), first.num_bins(), channels.len());
    if channels
        .iter()
        .any(|c| c.num_frames() != t || c.num_bins() != bins || c.signal_len != first.signal_len)
    {
        return Err(StftError::ShapeMismatch("channels differ in frame layout".into()));
    }
    if weights.len() != bins {
        return Err(StftError::ShapeMismatch(format!(
            "{} weight vectors for {bins} bins",
            weights.len()
        )));
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| w.len() != m) {
        return Err(StftError::ShapeMismatch(format!(
            "weight vector of bin {i} has length {}, expected {m}",
            w.len()
        )));
    }
    let frames = (0..t)
        .into_par_iter()
        .map(|f| {
            (0..bins)
                .map(|i| {
                    weights[i]
                        .iter()
                        .zip(channels)
                        .map(|(w, c)| w.conj() * c.frames[f][i])
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(SpectralFrames {
        frames,
        signal_len: first.signal_len,
    })
}

/// Analyze → weight → synthesize for a multichannel signal.
pub fn beamform(channels: &[Vec<f64>], weights: &[Vec<Complex64>], cfg: &StftConfig) -> Result<Vec<f64>, StftError> {
    let spectra = channels
        .iter()
        .map(|c| analyze(c, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    synthesize(&apply_weights(&spectra, weights)?, cfg)
}
