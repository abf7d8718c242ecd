use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use serde::{Deserialize, Serialize};

use super::AcousticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WavFormat {
    /// 16-bit signed PCM, full scale ±1.
    Pcm16,
    #[default]
    Float32,
}

/// Deinterleaved audio with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct WavData {
    pub sample_rate: u32,
    pub channels: Vec<Vec<f64>>,
}

impl WavData {
    pub fn num_frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    /// First channel, erroring on sample-rate mismatch.
    pub fn mono_at(self, sample_rate: u32) -> Result<Vec<f64>, AcousticsError> {
        if self.sample_rate != sample_rate {
            return Err(AcousticsError::SampleRateMismatch {
                expected: sample_rate,
                found: self.sample_rate,
            });
        }
        self.channels.into_iter().next().ok_or(AcousticsError::EmptySignal)
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<WavData, AcousticsError> {
    let mut reader = WavReader::open(path)?;
    let spec = reader.spec();
    let nch = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, _) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()?,
        (SampleFormat::Int, bits) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<Result<_, _>>()?
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / nch.max(1)); nch];
    for (i, v) in interleaved.into_iter().enumerate() {
        channels[i % nch].push(v);
    }
    Ok(WavData {
        sample_rate: spec.sample_rate,
        channels,
    })
}

/// Write equal-length channels. PCM samples are clipped to full scale.
pub fn write_wav(
    path: impl AsRef<Path>,
    channels: &[Vec<f64>],
    sample_rate: u32,
    format: WavFormat,
) -> Result<(), AcousticsError> {
    let frames = channels.first().map_or(0, Vec::len);
    if channels.is_empty() {
        return Err(AcousticsError::EmptySignal);
    }
    if channels.iter().any(|c| c.len() != frames) {
        return Err(AcousticsError::RaggedChannels);
    }
    let spec = WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: match format {
            WavFormat::Pcm16 => 16,
            WavFormat::Float32 => 32,
        },
        sample_format: match format {
            WavFormat::Pcm16 => SampleFormat::Int,
            WavFormat::Float32 => SampleFormat::Float,
        },
    };
    let mut writer = WavWriter::create(path, spec)?;
    for n in 0..frames {
        for c in channels {
            match format {
                WavFormat::Pcm16 => {
                    let v = (c[n] * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(v)?;
                }
                WavFormat::Float32 => writer.write_sample(c[n] as f32)?,
            }
        }
    }
    writer.finalize()?;
    Ok(())
}
