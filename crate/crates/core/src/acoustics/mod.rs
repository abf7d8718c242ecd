//! Microphone arrays, free-space steering vectors, sampled room impulse
//! responses and multichannel rendering.

mod filter;
mod render;
mod rir;
mod wav;

pub use filter::{highpass, Biquad, HighpassFilter, HIGHPASS_CUTOFF_HZ};
pub use render::{fft_convolve, mic_noise, noise_std_for_snr, noise_stream, render_mic_signals, RenderSource};
pub use rir::{synthesize_rir, synthesize_rir_from, SampledRir, DEFAULT_TRUNC_HALFWIDTH};
pub use wav::{read_wav, write_wav, WavData, WavFormat};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ImageSource, ImageSourceSet, Vec2};
use crate::numerics::CMatrix;

/// Distance below which a source is considered to sit on a microphone.
pub const MIN_SOURCE_DISTANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AcousticsError {
    #[error("microphone array is empty")]
    EmptyArray,
    #[error("microphones {0} and {1} share a position")]
    DuplicateMicrophones(usize, usize),
    #[error("invalid array parameter: {0}")]
    InvalidArray(String),
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("source at {position} is {distance:e} m from microphone {mic}")]
    SourceOnMicrophone { mic: usize, position: Vec2, distance: f64 },
    #[error("requested {requested} sources but only {available} are available")]
    NotEnoughImages { requested: usize, available: usize },
    #[error("sinc truncation half-width must be at least 16 samples, got {0}")]
    TruncationTooShort(usize),
    #[error("empty signal")]
    EmptySignal,
    #[error("expected {expected} noise levels, got {found}")]
    NoiseLevelCount { expected: usize, found: usize },
    #[error("sample rate mismatch: expected {expected} Hz, file has {found} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },
    #[error("WAV error: {0}")]
    Wav(#[from] hound::Error),
    #[error("WAV channels have different lengths")]
    RaggedChannels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayLayout {
    Linear,
    Circular,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicArray {
    positions: Vec<Vec2>,
    layout: ArrayLayout,
}

impl MicArray {
    pub fn custom(positions: Vec<Vec2>) -> Result<Self, AcousticsError> {
        Self::with_layout(positions, ArrayLayout::Custom)
    }

    /// `count` microphones `spacing` apart on a line through `center` at
    /// `orientation` radians from the x axis.
    pub fn linear(center: Vec2, count: usize, spacing: f64, orientation: f64) -> Result<Self, AcousticsError> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(AcousticsError::InvalidArray(format!("spacing must be positive, got {spacing}")));
        }
        let dir = Vec2::from_polar(1.0, orientation);
        let mid = (count as f64 - 1.0) / 2.0;
        let positions = (0..count)
            .map(|m| center + dir * ((m as f64 - mid) * spacing))
            .collect();
        Self::with_layout(positions, ArrayLayout::Linear)
    }

    /// `count` microphones evenly spaced on a circle, the first on the
    /// positive x axis through `center`.
    pub fn circular(center: Vec2, count: usize, diameter: f64) -> Result<Self, AcousticsError> {
        if !(diameter > 0.0) || !diameter.is_finite() {
            return Err(AcousticsError::InvalidArray(format!("diameter must be positive, got {diameter}")));
        }
        let positions = (0..count)
            .map(|m| center + Vec2::from_polar(diameter / 2.0, 2.0 * PI * m as f64 / count as f64))
            .collect();
        Self::with_layout(positions, ArrayLayout::Circular)
    }

    fn with_layout(positions: Vec<Vec2>, layout: ArrayLayout) -> Result<Self, AcousticsError> {
        if positions.is_empty() {
            return Err(AcousticsError::EmptyArray);
        }
        if let Some(bad) = positions.iter().find(|p| !p.is_finite()) {
            return Err(AcousticsError::InvalidArray(format!("non-finite position {bad}")));
        }
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                if positions[i].distance(positions[j]) < MIN_SOURCE_DISTANCE {
                    return Err(AcousticsError::DuplicateMicrophones(i, j));
                }
            }
        }
        Ok(Self { positions, layout })
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn layout(&self) -> ArrayLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn centroid(&self) -> Vec2 {
        let sum = self.positions.iter().fold(Vec2::new(0.0, 0.0), |acc, &p| acc + p);
        sum * (1.0 / self.len() as f64)
    }

    /// Largest distance between two microphones.
    pub fn aperture(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                best = best.max(a.distance(*b));
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    /// m/s
    pub speed_of_sound: f64,
    /// Hz
    pub sampling_rate: f64,
}

impl Default for Medium {
    fn default() -> Self {
        Self {
            speed_of_sound: 343.0,
            sampling_rate: 8000.0,
        }
    }
}

impl Medium {
    pub fn new(speed_of_sound: f64, sampling_rate: f64) -> Result<Self, AcousticsError> {
        let m = Self {
            speed_of_sound,
            sampling_rate,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), AcousticsError> {
        if !(self.speed_of_sound > 0.0) || !self.speed_of_sound.is_finite() {
            return Err(AcousticsError::InvalidMedium(format!(
                "speed of sound must be positive, got {}",
                self.speed_of_sound
            )));
        }
        if !(self.sampling_rate > 0.0) || !self.sampling_rate.is_finite() {
            return Err(AcousticsError::InvalidMedium(format!(
                "sampling rate must be positive, got {}",
                self.sampling_rate
            )));
        }
        Ok(())
    }

    pub fn wavenumber(&self, omega: f64) -> f64 {
        omega / self.speed_of_sound
    }

    /// Propagation delay over `distance` in (fractional) samples.
    pub fn delay_samples(&self, distance: f64) -> f64 {
        self.sampling_rate * distance / self.speed_of_sound
    }
}

/// Angular frequency of `hz`.
pub fn omega(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// Free-space response of the array to a point source of attenuation
/// `attenuation` at `position`.
pub fn steering_vector_at(
    array: &MicArray,
    position: Vec2,
    attenuation: f64,
    omega: f64,
    medium: &Medium,
) -> Result<Vec<Complex64>, AcousticsError> {
    let kappa = medium.wavenumber(omega);
    array
        .positions
        .iter()
        .enumerate()
        .map(|(m, r)| {
            let d = r.distance(position);
            if d < MIN_SOURCE_DISTANCE {
                return Err(AcousticsError::SourceOnMicrophone { mic: m, position, distance: d });
            }
            Ok(Complex64::from_polar(attenuation / (4.0 * PI * d), -kappa * d))
        })
        .collect()
}

pub fn steering_vector(
    array: &MicArray,
    src: &ImageSource,
    omega: f64,
    medium: &Medium,
) -> Result<Vec<Complex64>, AcousticsError> {
    steering_vector_at(array, src.position, src.attenuation, omega, medium)
}

/// M×(K+1) matrix whose columns are steering vectors of a source and K of
/// its images.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringMatrix {
    matrix: CMatrix,
}

impl SteeringMatrix {
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Self {
        Self {
            matrix: CMatrix::from_columns(columns).expect("steering columns share the array size"),
        }
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_mics(&self) -> usize {
        self.matrix.rows()
    }

    /// K+1
    pub fn num_sources(&self) -> usize {
        self.matrix.cols()
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        self.matrix.column(k)
    }

    pub fn columns(&self) -> Vec<Vec<Complex64>> {
        (0..self.num_sources()).map(|k| self.column(k)).collect()
    }

    /// `A·1`, the coherent sum of all columns.
    pub fn summed(&self) -> Vec<Complex64> {
        self.matrix.column_sum()
    }

    /// The first `count` columns.
    pub fn leading(&self, count: usize) -> SteeringMatrix {
        let cols: Vec<_> = (0..count.min(self.num_sources())).map(|k| self.column(k)).collect();
        Self::from_columns(&cols)
    }
}

/// Steering matrix of the true source and the next `k` entries of `set`.
pub fn steering_matrix(
    array: &MicArray,
    set: &ImageSourceSet,
    omega: f64,
    medium: &Medium,
    k: usize,
) -> Result<SteeringMatrix, AcousticsError> {
    if k + 1 > set.len() {
        return Err(AcousticsError::NotEnoughImages {
            requested: k + 1,
            available: set.len(),
        });
    }
    let columns = set
        .first(k + 1)
        .map(|src| steering_vector(array, src, omega, medium))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SteeringMatrix::from_columns(&columns))
}
