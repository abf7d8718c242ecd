use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::geometry::{ImageSourceSet, Vec2};

use super::rir::synthesize_rir;
use super::{AcousticsError, Medium, MicArray};

/// One emitting source: its image set and its dry signal.
#[derive(Debug, Clone, Copy)]
pub struct RenderSource<'a> {
    pub images: &'a ImageSourceSet,
    pub signal: &'a [f64],
}

/// Linear convolution. Short kernels are done directly, the rest by FFT.
pub fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let n = a.len() + b.len() - 1;
    if a.len().min(b.len()) <= 32 {
        let mut out = vec![0.0; n];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let size = n.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let load = |x: &[f64]| {
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (d, &s) in buf.iter_mut().zip(x) {
            d.re = s;
        }
        buf
    };
    let mut fa = load(a);
    let mut fb = load(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa[..n].iter().map(|z| z.re * scale).collect()
}

/// Microphone signals for a set of sources plus independent white Gaussian
/// noise of standard deviation `noise_std[m]` on microphone `m`.
///
/// Output sample `j` corresponds to time `j - trunc_halfwidth`: all signals
/// carry the fixed latency of the truncated sinc. Every row has the length of
/// the longest source-times-response convolution. Microphone `m` draws its
/// noise from stream `m` of a ChaCha8 generator seeded with `seed`.
pub fn render_mic_signals(
    sources: &[RenderSource<'_>],
    array: &MicArray,
    medium: &Medium,
    trunc_halfwidth: usize,
    noise_std: &[f64],
    seed: u64,
) -> Result<Vec<Vec<f64>>, AcousticsError> {
    if sources.is_empty() || sources.iter().any(|s| s.signal.is_empty()) {
        return Err(AcousticsError::EmptySignal);
    }
    if noise_std.len() != array.len() {
        return Err(AcousticsError::NoiseLevelCount {
            expected: array.len(),
            found: noise_std.len(),
        });
    }
    let rirs = array
        .positions()
        .iter()
        .map(|&mic| {
            sources
                .iter()
                .map(|s| synthesize_rir(mic, s.images, medium, trunc_halfwidth))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let len = rirs
        .iter()
        .flat_map(|per_src| per_src.iter().zip(sources).map(|(r, s)| r.taps.len() + s.signal.len() - 1))
        .max()
        .unwrap_or(0);

    let rows = rirs
        .par_iter()
        .enumerate()
        .map(|(m, per_src)| {
            let mut y = vec![0.0; len];
            for (rir, s) in per_src.iter().zip(sources) {
                for (acc, v) in y.iter_mut().zip(fft_convolve(&rir.taps, s.signal)) {
                    *acc += v;
                }
            }
            for (v, z) in y.iter_mut().zip(noise_stream(len, noise_std[m], seed, m as u64)) {
                *v += z;
            }
            y
        })
        .collect();
    Ok(rows)
}

/// `len` samples of white Gaussian noise from stream `stream` of a ChaCha8
/// generator seeded with `seed`. All zeros when `std` is not positive.
pub fn noise_stream(len: usize, std: f64, seed: u64, stream: u64) -> Vec<f64> {
    if !(std > 0.0) {
        return vec![0.0; len];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            std * z
        })
        .collect()
}

/// Independent noise on every microphone, laid out as [`render_mic_signals`]
/// adds it.
pub fn mic_noise(noise_std: &[f64], len: usize, seed: u64) -> Vec<Vec<f64>> {
    noise_std
        .iter()
        .enumerate()
        .map(|(m, &s)| noise_stream(len, s, seed, m as u64))
        .collect()
}

/// Noise standard deviation giving `snr_db` between the direct sound of
/// `signal` emitted at `source` and received at `reference`, and the noise.
pub fn noise_std_for_snr(signal: &[f64], source: Vec2, reference: Vec2, snr_db: f64) -> f64 {
    if signal.is_empty() {
        return 0.0;
    }
    let d = source.distance(reference);
    let gain = 1.0 / (4.0 * PI * d);
    let power = gain * gain * signal.iter().map(|x| x * x).sum::<f64>() / signal.len() as f64;
    (power / 10f64.powf(snr_db / 10.0)).sqrt()
}
