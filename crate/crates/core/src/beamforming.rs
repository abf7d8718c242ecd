//! Narrowband beamformer weight designs and the noise-plus-interference
//! covariance they are designed against.
//!
//! Every design returns a weight vector `w` applied as `u = wᴴ y`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acoustics::{omega, steering_matrix, steering_vector_at, AcousticsError, Medium, MicArray, SteeringMatrix};
use crate::geometry::{ImageSourceSet, Vec2};
use crate::numerics::{
    cholesky, dominant_eigpair, inner, norm, CMatrix, Cholesky, HermitianMatrix, NumericsError,
};
use crate::stft::StftConfig;

/// Relative ridge `δ` added as `δ·trace(K)/M·I` to every designed covariance.
pub const RIDGE: f64 = 1e-10;

/// Constraint sets whose whitened steering matrix is worse conditioned than
/// this are rejected by One-Forcing.
pub const MAX_CONSTRAINT_CONDITION: f64 = 1e8;

#[derive(Debug, Error)]
pub enum BeamformingError {
    #[error("steering vector is zero")]
    ZeroSteeringVector,
    #[error("steering vectors cancel: ‖A·1‖ = {summed:e} against ‖A‖ = {total:e}")]
    CancellingSteeringVectors { summed: f64, total: f64 },
    #[error("{constraints} constraints exceed the {mics} microphones")]
    TooManyConstraints { constraints: usize, mics: usize },
    #[error("constraint matrix condition number {condition:e} exceeds {MAX_CONSTRAINT_CONDITION:e}")]
    IllConditionedConstraints { condition: f64 },
    #[error("dimension mismatch: {0}")]
    ShapeMismatch(String),
    #[error("beamformer has no response toward the desired source")]
    ZeroResponse,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Acoustics(#[from] AcousticsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Design {
    #[serde(rename = "ds")]
    Ds,
    #[serde(rename = "max-sinr")]
    MaxSinr,
    #[serde(rename = "rake-ds")]
    RakeDs,
    #[serde(rename = "rake-one-forcing", alias = "rake-of")]
    RakeOneForcing,
    #[serde(rename = "rake-max-sinr")]
    RakeMaxSinr,
    #[serde(rename = "rake-max-udr")]
    RakeMaxUdr,
}

impl Design {
    pub const ALL: [Design; 6] = [
        Design::Ds,
        Design::MaxSinr,
        Design::RakeDs,
        Design::RakeOneForcing,
        Design::RakeMaxSinr,
        Design::RakeMaxUdr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Design::Ds => "ds",
            Design::MaxSinr => "max-sinr",
            Design::RakeDs => "rake-ds",
            Design::RakeOneForcing => "rake-one-forcing",
            Design::RakeMaxSinr => "rake-max-sinr",
            Design::RakeMaxUdr => "rake-max-udr",
        }
    }

    /// Whether the design uses image sources at all.
    pub fn is_rake(self) -> bool {
        !matches!(self, Design::Ds | Design::MaxSinr)
    }

    /// Whether the design uses the noise-plus-interference covariance.
    pub fn uses_covariance(self) -> bool {
        !matches!(self, Design::Ds | Design::RakeDs)
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rake-of" => Ok(Design::RakeOneForcing),
            _ => Design::ALL.into_iter().find(|d| d.name() == s).ok_or_else(|| {
                let names: Vec<_> = Design::ALL.iter().map(|d| d.name()).collect();
                format!("unknown design '{s}', expected one of {}", names.join(", "))
            }),
        }
    }
}

/// Second-order statistics assumed by the designs.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub k_n: HermitianMatrix,
    pub sigma_x2: f64,
    pub sigma_z2: f64,
}

impl NoiseModel {
    /// Spatially white noise of the given per-microphone variance, unit
    /// source and interferer powers.
    pub fn white(num_mics: usize, variance: f64) -> Self {
        Self {
            k_n: HermitianMatrix::scaled_identity(num_mics, variance),
            sigma_x2: 1.0,
            sigma_z2: 1.0,
        }
    }

    /// `K_n = 1e-3·I`, `σ_x² = σ_z² = 1`.
    pub fn standard(num_mics: usize) -> Self {
        Self::white(num_mics, 1e-3)
    }
}

/// `K_n + σ_z²(A_q·1)(A_q·1)ᴴ + δ·trace/M·I`.
///
/// The ridge is part of the returned matrix so that designs and the metrics
/// scoring them see the same covariance.
pub fn build_covariance(
    k_n: &HermitianMatrix,
    a_q: Option<&SteeringMatrix>,
    sigma_z2: f64,
) -> Result<HermitianMatrix, BeamformingError> {
    let m = k_n.dim();
    let mut k = k_n.clone();
    if let Some(a_q) = a_q {
        if a_q.num_mics() != m {
            return Err(BeamformingError::ShapeMismatch(format!(
                "interferer steering has {} rows, covariance is {m}×{m}",
                a_q.num_mics()
            )));
        }
        if sigma_z2 != 0.0 {
            k = k.rank_one_update(&a_q.summed(), sigma_z2);
        }
    }
    let trace = k.trace();
    Ok(k.shifted(RIDGE * trace / m as f64))
}

fn check_dims(a_rows: usize, k: &HermitianMatrix) -> Result<(), BeamformingError> {
    if a_rows != k.dim() {
        return Err(BeamformingError::ShapeMismatch(format!(
            "steering vectors of length {a_rows} against a {0}×{0} covariance",
            k.dim()
        )));
    }
    Ok(())
}

fn summed_nonzero(a: &SteeringMatrix) -> Result<Vec<Complex64>, BeamformingError> {
    let summed = a.summed();
    let total = a.as_matrix().frobenius_norm();
    let s = norm(&summed);
    if total == 0.0 || s < 1e-12 * total {
        return Err(BeamformingError::CancellingSteeringVectors { summed: s, total });
    }
    Ok(summed)
}

/// `a / ‖a‖`
pub fn weights_ds(a_s: &[Complex64]) -> Result<Vec<Complex64>, BeamformingError> {
    let n = norm(a_s);
    if n == 0.0 || !n.is_finite() {
        return Err(BeamformingError::ZeroSteeringVector);
    }
    Ok(a_s.iter().map(|x| x / n).collect())
}

fn max_sinr_with(f: &Cholesky, a: &[Complex64]) -> Vec<Complex64> {
    let x = f.solve(a);
    let denom = inner(a, &x);
    x.into_iter().map(|v| v / denom).collect()
}

/// `K⁻¹a / (aᴴK⁻¹a)`, distortionless toward `a`.
pub fn weights_max_sinr(a_s: &[Complex64], k: &HermitianMatrix) -> Result<Vec<Complex64>, BeamformingError> {
    check_dims(a_s.len(), k)?;
    if norm(a_s) == 0.0 {
        return Err(BeamformingError::ZeroSteeringVector);
    }
    Ok(max_sinr_with(&cholesky(k)?, a_s))
}

/// `A·1 / ‖A·1‖`
pub fn weights_rake_ds(a: &SteeringMatrix) -> Result<Vec<Complex64>, BeamformingError> {
    let summed = summed_nonzero(a)?;
    weights_ds(&summed)
}

/// `K⁻¹A·1 / (1ᴴAᴴK⁻¹A·1)`, distortionless toward the coherent sum `A·1`.
pub fn weights_rake_max_sinr(a: &SteeringMatrix, k: &HermitianMatrix) -> Result<Vec<Complex64>, BeamformingError> {
    check_dims(a.num_mics(), k)?;
    let summed = summed_nonzero(a)?;
    Ok(max_sinr_with(&cholesky(k)?, &summed))
}

/// Thin QR factorization by modified Gram-Schmidt with one
/// reorthogonalization pass.
fn thin_qr(b: &CMatrix) -> (Vec<Vec<Complex64>>, CMatrix) {
    let n = b.cols();
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut v = b.column(j);
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = inner(qi, &v);
                r.set(i, j, r.get(i, j) + c);
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= c * qk;
                }
            }
        }
        let nv = norm(&v);
        r.set(j, j, Complex64::new(nv, 0.0));
        if nv > 0.0 {
            v.iter_mut().for_each(|x| *x /= nv);
        }
        q.push(v);
    }
    (q, r)
}

/// Solve `Rᴴ y = b` for upper-triangular `R`.
fn solve_r_adjoint(r: &CMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = r.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for p in 0..i {
            s -= r.get(p, i).conj() * y[p];
        }
        y[i] = s / r.get(i, i).conj();
    }
    y
}

/// Inverse of an upper-triangular matrix.
fn invert_upper(r: &CMatrix) -> CMatrix {
    let n = r.rows();
    let mut inv = CMatrix::zeros(n, n);
    for j in 0..n {
        // Column j of R⁻¹ solves R x = e_j.
        for i in (0..=j).rev() {
            let mut s = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            for p in i + 1..=j {
                s -= r.get(i, p) * inv.get(p, j);
            }
            inv.set(i, j, s / r.get(i, i));
        }
    }
    inv
}

/// 2-norm condition number of an upper-triangular `R`.
fn triangular_condition(r: &CMatrix) -> Result<f64, BeamformingError> {
    if (0..r.rows()).any(|i| r.get(i, i).norm() == 0.0) {
        return Ok(f64::INFINITY);
    }
    let gram = |m: &CMatrix| HermitianMatrix::new(m.adjoint().matmul(m));
    let (top, _) = dominant_eigpair(&gram(r)?)?;
    let (inv_top, _) = dominant_eigpair(&gram(&invert_upper(r))?)?;
    Ok((top * inv_top).sqrt())
}

/// `K⁻¹A(AᴴK⁻¹A)⁻¹·1`: unit response toward every column of `A` with
/// minimum noise-plus-interference output power.
///
/// Solved in the whitened domain `B = C⁻ᴴA` as the least-norm solution of
/// `Bᴴv = 1` via a QR factorization of `B`, followed by two steps of
/// iterative refinement on the original constraints.
pub fn weights_rake_one_forcing(a: &SteeringMatrix, k: &HermitianMatrix) -> Result<Vec<Complex64>, BeamformingError> {
    check_dims(a.num_mics(), k)?;
    let (m, n) = (a.num_mics(), a.num_sources());
    if n > m {
        return Err(BeamformingError::TooManyConstraints { constraints: n, mics: m });
    }
    let f = cholesky(k)?;
    let columns: Vec<Vec<Complex64>> = (0..n).map(|j| f.solve_lower(&a.column(j))).collect();
    let b = CMatrix::from_columns(&columns)?;
    let (q, r) = thin_qr(&b);
    let condition = triangular_condition(&r)?;
    if !(condition < MAX_CONSTRAINT_CONDITION) {
        return Err(BeamformingError::IllConditionedConstraints { condition });
    }

    // Correction of w for a constraint defect `d` (wanted Aᴴ Δw = d).
    let correction = |d: &[Complex64]| {
        let y = solve_r_adjoint(&r, d);
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        for (qi, yi) in q.iter().zip(&y) {
            for (vk, qk) in v.iter_mut().zip(qi) {
                *vk += qk * yi;
            }
        }
        f.solve_upper(&v)
    };
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let mut w = correction(&ones);
    for _ in 0..2 {
        let response = a.as_matrix().adjoint_mul_vec(&w);
        let defect: Vec<Complex64> = ones.iter().zip(&response).map(|(o, r)| o - r).collect();
        let dw = correction(&defect);
        for (wi, di) in w.iter_mut().zip(&dw) {
            *wi += di;
        }
    }
    Ok(w)
}

/// Result of the Rake-Max-UDR design.
#[derive(Debug, Clone, PartialEq)]
pub struct UdrSolution {
    pub weights: Vec<Complex64>,
    /// Largest eigenvalue of `C⁻ᴴAAᴴC⁻¹`, the attained `wᴴAAᴴw / wᴴKw`.
    pub lambda: f64,
}

/// Maximizer of `wᴴAAᴴw / wᴴKw`: `w = C⁻¹ṽ` with `ṽ` the dominant
/// eigenvector of `C⁻ᴴAAᴴC⁻¹` and `K = CᴴC`.
pub fn rake_max_udr(a: &SteeringMatrix, k: &HermitianMatrix) -> Result<UdrSolution, BeamformingError> {
    check_dims(a.num_mics(), k)?;
    if a.as_matrix().frobenius_norm() == 0.0 {
        return Err(BeamformingError::ZeroSteeringVector);
    }
    let f = cholesky(k)?;
    let columns: Vec<Vec<Complex64>> = (0..a.num_sources()).map(|j| f.solve_lower(&a.column(j))).collect();
    let b = CMatrix::from_columns(&columns)?;
    let h = HermitianMatrix::new(b.matmul(&b.adjoint()))?;
    let (lambda, v) = dominant_eigpair(&h)?;
    Ok(UdrSolution {
        weights: f.solve_upper(&v),
        lambda,
    })
}

pub fn weights_rake_max_udr(a: &SteeringMatrix, k: &HermitianMatrix) -> Result<Vec<Complex64>, BeamformingError> {
    rake_max_udr(a, k).map(|s| s.weights)
}

/// Weights of `design` for the desired-source steering matrix `a`
/// (true source first) and covariance `k`. Non-rake designs only look at the
/// first column.
pub fn design_weights(design: Design, a: &SteeringMatrix, k: &HermitianMatrix) -> Result<Vec<Complex64>, BeamformingError> {
    match design {
        Design::Ds => weights_ds(&a.column(0)),
        Design::MaxSinr => weights_max_sinr(&a.column(0), k),
        Design::RakeDs => weights_rake_ds(a),
        Design::RakeOneForcing => weights_rake_one_forcing(a, k),
        Design::RakeMaxSinr => weights_rake_max_sinr(a, k),
        Design::RakeMaxUdr => weights_rake_max_udr(a, k),
    }
}

/// The response a design is meant to keep at unit gain: `a(s₀)` for the
/// non-rake designs, `A·1` for the rake designs.
pub fn desired_response_vector(design: Design, a: &SteeringMatrix) -> Vec<Complex64> {
    if design.is_rake() {
        a.summed()
    } else {
        a.column(0)
    }
}

/// Rescale `w` so that `wᴴ target = 1`.
pub fn normalize_response(w: &[Complex64], target: &[Complex64]) -> Result<Vec<Complex64>, BeamformingError> {
    let r = inner(w, target);
    if r.norm() <= 1e-300 || !r.norm().is_finite() {
        return Err(BeamformingError::ZeroResponse);
    }
    let s = r.conj().inv();
    Ok(w.iter().map(|x| x * s).collect())
}

/// Per-bin weights of one design over the positive-frequency bins of an STFT.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    pub design: Design,
    pub k: usize,
    pub k_interferer: usize,
    pub frequencies: Vec<f64>,
    pub bins: Vec<Vec<Complex64>>,
}

impl BeamWeights {
    pub fn num_mics(&self) -> usize {
        self.bins.first().map_or(0, Vec::len)
    }
}

/// What to design for at every bin.
#[derive(Debug, Clone, Copy)]
pub struct DesignProblem<'a> {
    pub design: Design,
    pub array: &'a MicArray,
    pub medium: &'a Medium,
    pub desired: &'a ImageSourceSet,
    pub interferer: Option<&'a ImageSourceSet>,
    pub noise: &'a NoiseModel,
    pub k: usize,
    pub k_interferer: usize,
}

impl DesignProblem<'_> {
    /// Steering matrix of the desired source and the covariance at `hz`.
    pub fn model_at(&self, hz: f64) -> Result<(SteeringMatrix, HermitianMatrix), BeamformingError> {
        let w = omega(hz);
        let a_s = steering_matrix(self.array, self.desired, w, self.medium, self.k)?;
        let a_q = match self.interferer {
            Some(set) => Some(steering_matrix(self.array, set, w, self.medium, self.k_interferer)?),
            None => None,
        };
        let k = build_covariance(&self.noise.k_n, a_q.as_ref(), self.noise.sigma_z2)?;
        Ok((a_s, k))
    }

    /// Weights at `hz`, rescaled to unit desired response.
    pub fn weights_at(&self, hz: f64) -> Result<Vec<Complex64>, BeamformingError> {
        let (a_s, k) = self.model_at(hz)?;
        let w = design_weights(self.design, &a_s, &k)?;
        normalize_response(&w, &desired_response_vector(self.design, &a_s))
    }

    /// Weights for every bin of `stft`, designed in parallel.
    pub fn design_bins(&self, stft: &StftConfig) -> Result<BeamWeights, BeamformingError> {
        let frequencies: Vec<f64> = (0..stft.num_bins())
            .map(|i| stft.bin_frequency(i, self.medium.sampling_rate))
            .collect();
        let bins = frequencies
            .par_iter()
            .map(|&f| self.weights_at(f))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BeamWeights {
            design: self.design,
            k: self.k,
            k_interferer: self.k_interferer,
            frequencies,
            bins,
        })
    }
}

/// `n` angles (radians) evenly covering a full turn, starting at 0.
pub fn angle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

/// `|wᴴ a(θ)|` for unit-strength points at `radius` from the array centroid,
/// normalized to a maximum of 1.
pub fn beampattern(
    w: &[Complex64],
    array: &MicArray,
    omega: f64,
    medium: &Medium,
    angles: &[f64],
    radius: f64,
) -> Result<Vec<f64>, BeamformingError> {
    if w.len() != array.len() {
        return Err(BeamformingError::ShapeMismatch(format!(
            "{} weights for {} microphones",
            w.len(),
            array.len()
        )));
    }
    let center = array.centroid();
    let mut response = angles
        .iter()
        .map(|&theta| {
            let p = center + Vec2::from_polar(radius, theta);
            Ok(inner(w, &steering_vector_at(array, p, 1.0, omega, medium)?).norm())
        })
        .collect::<Result<Vec<f64>, BeamformingError>>()?;
    let peak = response.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        response.iter_mut().for_each(|r| *r /= peak);
    }
    Ok(response)
}

/// `angle_deg,magnitude` rows.
pub fn beampattern_csv(angles: &[f64], magnitudes: &[f64]) -> String {
    let mut out = String::from("angle_deg,magnitude\n");
    for (a, m) in angles.iter().zip(magnitudes) {
        out.push_str(&format!("{},{}\n", a.to_degrees(), m));
    }
    out
}

pub const WEIGHTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsBinRecord {
    pub frequency_hz: f64,
    pub weights: Vec<[f64; 2]>,
}

/// JSON layout of exported weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsDocument {
    pub schema_version: u32,
    pub design: Design,
    pub k: usize,
    pub k_interferer: usize,
    pub sampling_rate: f64,
    pub fft_length: usize,
    pub num_mics: usize,
    pub bins: Vec<WeightsBinRecord>,
}

impl WeightsDocument {
    pub fn new(weights: &BeamWeights, sampling_rate: f64, fft_length: usize) -> Self {
        Self {
            schema_version: WEIGHTS_SCHEMA_VERSION,
            design: weights.design,
            k: weights.k,
            k_interferer: weights.k_interferer,
            sampling_rate,
            fft_length,
            num_mics: weights.num_mics(),
            bins: weights
                .frequencies
                .iter()
                .zip(&weights.bins)
                .map(|(&f, w)| WeightsBinRecord {
                    frequency_hz: f,
                    weights: w.iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn to_weights(&self) -> BeamWeights {
        BeamWeights {
            design: self.design,
            k: self.k,
            k_interferer: self.k_interferer,
            frequencies: self.bins.iter().map(|b| b.frequency_hz).collect(),
            bins: self
                .bins
                .iter()
                .map(|b| b.weights.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .collect(),
        }
    }
}
