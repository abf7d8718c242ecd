use std::f64::consts::PI;

pub const HIGHPASS_CUTOFF_HZ: f64 = 300.0;

/// Direct-form I second-order section, `a0` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Bilinear high-pass section with quality factor `q`, prewarped so the
    /// analog corner lands on `cutoff`.
    pub fn highpass(cutoff: f64, q: f64, sampling_rate: f64) -> Self {
        let w0 = 2.0 * PI * cutoff / sampling_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self {
            b: [(1.0 + cos) / 2.0 / a0, -(1.0 + cos) / a0, (1.0 + cos) / 2.0 / a0],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    pub fn process(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&x0| {
                let y0 = self.b[0] * x0 + self.b[1] * x1 + self.b[2] * x2 - self.a[0] * y1 - self.a[1] * y2;
                x2 = x1;
                x1 = x0;
                y2 = y1;
                y1 = y0;
                y0
            })
            .collect()
    }
}

/// Fourth-order Butterworth high-pass as a cascade of two biquads.
#[derive(Debug, Clone, PartialEq)]
pub struct HighpassFilter {
    sections: [Biquad; 2],
}

impl HighpassFilter {
    pub fn butterworth4(cutoff: f64, sampling_rate: f64) -> Self {
        // Pole-pair quality factors of a 4th-order Butterworth prototype.
        let q1 = 1.0 / (2.0 * (PI / 8.0).cos());
        let q2 = 1.0 / (2.0 * (3.0 * PI / 8.0).cos());
        Self {
            sections: [
                Biquad::highpass(cutoff, q1, sampling_rate),
                Biquad::highpass(cutoff, q2, sampling_rate),
            ],
        }
    }

    pub fn process(&self, x: &[f64]) -> Vec<f64> {
        self.sections.iter().fold(x.to_vec(), |acc, s| s.process(&acc))
    }
}

/// 300 Hz high-pass applied to every signal before beamforming.
pub fn highpass(x: &[f64], sampling_rate: f64) -> Vec<f64> {
    HighpassFilter::butterworth4(HIGHPASS_CUTOFF_HZ, sampling_rate).process(x)
}
