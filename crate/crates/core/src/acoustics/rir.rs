use std::f64::consts::PI;

use crate::geometry::{ImageSource, ImageSourceSet, Vec2};

use super::{AcousticsError, Medium, MIN_SOURCE_DISTANCE};

pub const DEFAULT_TRUNC_HALFWIDTH: usize = 81;

/// Sampled impulse response; `taps[i]` is the value at sample `offset + i`.
///
/// The offset is always `-halfwidth`, so every response from the same
/// synthesis parameters shares one time origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRir {
    pub taps: Vec<f64>,
    pub offset: i64,
}

impl SampledRir {
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }

    /// Value at absolute sample index `n` (zero outside the support).
    pub fn at(&self, n: i64) -> f64 {
        let i = n - self.offset;
        if i < 0 {
            return 0.0;
        }
        self.taps.get(i as usize).copied().unwrap_or(0.0)
    }

    /// `Σ_n h[n] e^{-iωn}` for normalized angular frequency `omega` (rad/sample).
    pub fn dtft(&self, omega: f64) -> num_complex::Complex64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(i, &t)| num_complex::Complex64::from_polar(t, -omega * (self.offset + i as i64) as f64))
            .sum()
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Hann taper over `[-halfwidth, halfwidth]`.
fn taper(t: f64, halfwidth: f64) -> f64 {
    if t.abs() >= halfwidth {
        0.0
    } else {
        0.5 * (1.0 + (PI * t / halfwidth).cos())
    }
}

/// Impulse response from every entry of `set` to `mic`.
pub fn synthesize_rir(
    mic: Vec2,
    set: &ImageSourceSet,
    medium: &Medium,
    trunc_halfwidth: usize,
) -> Result<SampledRir, AcousticsError> {
    synthesize_rir_from(mic, set.iter(), medium, trunc_halfwidth)
}

/// Impulse response from an arbitrary collection of (image) sources.
///
/// Each arrival is a band-limited impulse `α/(4πd)·sinc(n − F_s d/c)`
/// truncated to `±trunc_halfwidth` samples around its peak and tapered.
pub fn synthesize_rir_from<'a>(
    mic: Vec2,
    sources: impl IntoIterator<Item = &'a ImageSource>,
    medium: &Medium,
    trunc_halfwidth: usize,
) -> Result<SampledRir, AcousticsError> {
    if trunc_halfwidth < 16 {
        return Err(AcousticsError::TruncationTooShort(trunc_halfwidth));
    }
    let hw = trunc_halfwidth as f64;
    let arrivals = sources
        .into_iter()
        .map(|s| {
            let d = mic.distance(s.position);
            if d < MIN_SOURCE_DISTANCE {
                return Err(AcousticsError::SourceOnMicrophone {
                    mic: 0,
                    position: s.position,
                    distance: d,
                });
            }
            Ok((s.attenuation / (4.0 * PI * d), medium.delay_samples(d)))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let offset = -(trunc_halfwidth as i64);
    let max_delay = arrivals.iter().map(|&(_, tau)| tau).fold(0.0f64, f64::max);
    let len = ((max_delay + hw).floor() as i64 - offset + 1) as usize;
    let mut taps = vec![0.0; len];
    for (gain, tau) in arrivals {
        let first = (tau - hw).ceil() as i64;
        let last = (tau + hw).floor() as i64;
        for n in first..=last {
            let t = n as f64 - tau;
            taps[(n - offset) as usize] += gain * taper(t, hw) * sinc(t);
        }
    }
    Ok(SampledRir { taps, offset })
}
