//! Monte-Carlo runners. Trial `t` draws its geometry from stream `t` of a
//! ChaCha8 generator seeded with the scenario seed, so results do not depend
//! on scheduling.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::{omega, steering_matrix, steering_vector_at, Medium, MicArray, SteeringMatrix};
use crate::beamforming::{build_covariance, design_weights, weights_max_sinr, weights_rake_max_sinr, Design};
use crate::geometry::{enumerate_images, ImageSourceSet, Room, Vec2};
use crate::metrics::{output_sinr, predicted_gain, to_db, udr, GainReport, Summary};
use crate::numerics::HermitianMatrix;

use super::config::{order_for_count, Scenario};
use super::{csv_bytes, fmt_f64, write_file, HarnessError, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SnrGain,
    SinrVsK,
    UdrVsK,
    SinrVsFreq,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [Self::SnrGain, Self::SinrVsK, Self::UdrVsK, Self::SinrVsFreq];

    pub fn name(self) -> &'static str {
        match self {
            Self::SnrGain => "snr-gain",
            Self::SinrVsK => "sinr-vs-k",
            Self::UdrVsK => "udr-vs-k",
            Self::SinrVsFreq => "sinr-vs-freq",
        }
    }

    pub fn run(self, scenario: &Scenario) -> Result<ExperimentResult, HarnessError> {
        match self {
            Self::SnrGain => run_snr_gain(scenario),
            Self::SinrVsK => run_sinr_vs_k(scenario),
            Self::UdrVsK => run_udr_vs_k(scenario),
            Self::SinrVsFreq => run_sinr_vs_freq(scenario),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            format!("unknown experiment '{s}', expected one of {}", names.join(", "))
        })
    }
}

/// One measured quantity of a trial, in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub k: usize,
    pub frequency_hz: f64,
    pub design: Design,
    /// NaN when the design failed for this geometry.
    pub value_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub source: Vec2,
    pub interferer: Option<Vec2>,
    pub values: Vec<MetricValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub k: usize,
    pub report: GainReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub k: usize,
    pub design: Design,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub frequency_hz: f64,
    pub design: Design,
    pub mean_db: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExperimentSummary {
    Gain(Vec<GainRow>),
    Quantiles(Vec<QuantileRow>),
    FrequencyMeans(Vec<FrequencyRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub records: Vec<TrialRecord>,
    pub summary: ExperimentSummary,
    pub provenance: Provenance,
}

impl ExperimentResult {
    pub fn num_trials(&self) -> usize {
        self.records.len()
    }

    /// Quantile row of `design` at `k`, if this is a K sweep.
    pub fn quantiles(&self, k: usize, design: Design) -> Option<&Summary> {
        match &self.summary {
            ExperimentSummary::Quantiles(rows) => rows
                .iter()
                .find(|r| r.k == k && r.design == design)
                .map(|r| &r.summary),
            _ => None,
        }
    }

    pub fn summary_csv(&self) -> Result<Vec<u8>, HarnessError> {
        match &self.summary {
            ExperimentSummary::Gain(rows) => csv_bytes(
                &["k", "beta", "predicted_gain_db", "empirical_gain_db", "num_trials"],
                rows.iter().map(|r| {
                    vec![
                        r.k.to_string(),
                        fmt_f64(r.report.beta),
                        fmt_f64(r.report.predicted_gain_db),
                        r.report.empirical_gain_db.map(fmt_f64).unwrap_or_default(),
                        r.report.num_trials.to_string(),
                    ]
                }),
            ),
            ExperimentSummary::Quantiles(rows) => {
                let metric = if self.kind == ExperimentKind::UdrVsK { "udr" } else { "sinr" };
                let header = [
                    "k".to_string(),
                    "design".into(),
                    format!("median_{metric}_db"),
                    "q25_db".into(),
                    "q75_db".into(),
                    "count".into(),
                ];
                csv_bytes(
                    &header.iter().map(String::as_str).collect::<Vec<_>>(),
                    rows.iter().map(|r| {
                        vec![
                            r.k.to_string(),
                            r.design.name().to_string(),
                            fmt_f64(r.summary.median),
                            fmt_f64(r.summary.q25),
                            fmt_f64(r.summary.q75),
                            r.summary.count.to_string(),
                        ]
                    }),
                )
            }
            ExperimentSummary::FrequencyMeans(rows) => csv_bytes(
                &["frequency_hz", "design", "mean_sinr_db", "count"],
                rows.iter().map(|r| {
                    vec![
                        fmt_f64(r.frequency_hz),
                        r.design.name().to_string(),
                        fmt_f64(r.mean_db),
                        r.count.to_string(),
                    ]
                }),
            ),
        }
    }

    /// Long format, one row per measured value. Positions in metres.
    pub fn trials_csv(&self) -> Result<Vec<u8>, HarnessError> {
        let value = match self.kind {
            ExperimentKind::SnrGain => "snr_db",
            ExperimentKind::UdrVsK => "udr_db",
            _ => "sinr_db",
        };
        csv_bytes(
            &[
                "trial",
                "source_x_m",
                "source_y_m",
                "interferer_x_m",
                "interferer_y_m",
                "k",
                "frequency_hz",
                "design",
                value,
            ],
            self.records.iter().flat_map(|r| {
                let (qx, qy) = r
                    .interferer
                    .map_or((String::new(), String::new()), |q| (fmt_f64(q.x), fmt_f64(q.y)));
                r.values.iter().map(move |v| {
                    vec![
                        r.trial.to_string(),
                        fmt_f64(r.source.x),
                        fmt_f64(r.source.y),
                        qx.clone(),
                        qy.clone(),
                        v.k.to_string(),
                        fmt_f64(v.frequency_hz),
                        v.design.name().to_string(),
                        fmt_f64(v.value_db),
                    ]
                })
            }),
        )
    }

    /// Writes `<kind>.csv`, `<kind>_trials.csv` and `<kind>_provenance.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        let name = self.kind.name();
        Ok(vec![
            write_file(dir, &format!("{name}.csv"), &self.summary_csv()?)?,
            write_file(dir, &format!("{name}_trials.csv"), &self.trials_csv()?)?,
            write_file(dir, &format!("{name}_provenance.json"), self.provenance.to_json().as_bytes())?,
        ])
    }
}

/// Generator for trial `trial`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Uniform point of the room at least `margin` from every wall and every
/// microphone.
pub fn random_position(rng: &mut impl Rng, room: &Room, array: &MicArray, margin: f64) -> Vec2 {
    loop {
        let p = Vec2::new(
            rng.gen_range(margin..room.width() - margin),
            rng.gen_range(margin..room.height() - margin),
        );
        if array.positions().iter().all(|m| m.distance(p) >= margin) {
            return p;
        }
    }
}

/// Steering matrix of the first `k + 1` sources of `set` with attenuations
/// chosen so every source is received with unit amplitude at the array
/// centroid.
pub fn equal_power_steering(
    array: &MicArray,
    set: &ImageSourceSet,
    omega: f64,
    medium: &Medium,
    k: usize,
) -> Result<SteeringMatrix, HarnessError> {
    let center = array.centroid();
    let columns = set
        .first(k + 1)
        .map(|img| steering_vector_at(array, img.position, 4.0 * PI * center.distance(img.position), omega, medium))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SteeringMatrix::from_columns(&columns))
}

fn db_or_nan(x: Result<f64, impl std::fmt::Debug>) -> f64 {
    x.map(to_db).unwrap_or(f64::NAN)
}

/// Empirical raking gain for each `K` of the sweep: the mean output SNR of
/// Rake-Max-SINR over that of Max-SINR, with spatially white noise and every
/// image received with the power of the direct sound.
pub fn run_snr_gain(scenario: &Scenario) -> Result<ExperimentResult, HarnessError> {
    scenario.check_experiment()?;
    let e = &scenario.config.experiment;
    let ks = e.snr_gain_k.clone();
    let k_max = ks.iter().copied().max().unwrap_or(0);
    let order = order_for_count(k_max + 1);
    let w = omega(e.frequency_hz);
    let cov = build_covariance(&scenario.noise.k_n, None, 0.0)?;
    let sx = scenario.noise.sigma_x2;

    let trials = (0..e.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(scenario.seed(), t);
            let source = random_position(&mut rng, &scenario.room, &scenario.array, e.placement_margin);
            let set = enumerate_images(&scenario.room, source, order)?;
            let a = equal_power_steering(&scenario.array, &set, w, &scenario.medium, k_max)?;
            let a0 = a.leading(1);
            let plain = output_sinr(&weights_max_sinr(&a0.column(0), &cov)?, &a0, &cov, sx)?;
            let mut values = Vec::new();
            let mut linear = Vec::new();
            for &k in &ks {
                let ak = a.leading(k + 1);
                let rake = output_sinr(&weights_rake_max_sinr(&ak, &cov)?, &ak, &cov, sx)?;
                for (d, v) in [(Design::MaxSinr, plain), (Design::RakeMaxSinr, rake)] {
                    values.push(MetricValue {
                        k,
                        frequency_hz: e.frequency_hz,
                        design: d,
                        value_db: to_db(v),
                    });
                }
                linear.push((plain, rake));
            }
            Ok((
                TrialRecord {
                    trial: t,
                    source,
                    interferer: None,
                    values,
                },
                linear,
            ))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut rows = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let (plain, rake) = trials
            .iter()
            .fold((0.0, 0.0), |(p, r), (_, lin)| (p + lin[i].0, r + lin[i].1));
        let mut report = predicted_gain(&vec![1.0; k + 1])?;
        report.empirical_gain_db = Some(to_db(rake / plain));
        report.num_trials = trials.len();
        rows.push(GainRow { k, report });
    }
    Ok(ExperimentResult {
        kind: ExperimentKind::SnrGain,
        records: trials.into_iter().map(|(r, _)| r).collect(),
        summary: ExperimentSummary::Gain(rows),
        provenance: Provenance::new(ExperimentKind::SnrGain.name(), scenario, Some(e.trials)),
    })
}

/// Steering matrices and covariances for `K = K′ = 0..=k_max` at one
/// frequency.
struct Models {
    a_s: Vec<SteeringMatrix>,
    cov: Vec<HermitianMatrix>,
}

impl Models {
    fn new(
        scenario: &Scenario,
        s: &ImageSourceSet,
        q: &ImageSourceSet,
        hz: f64,
        ks: impl Iterator<Item = usize>,
    ) -> Result<Self, HarnessError> {
        let w = omega(hz);
        let mut a_s = Vec::new();
        let mut cov = Vec::new();
        for k in ks {
            let aq = steering_matrix(&scenario.array, q, w, &scenario.medium, k)?;
            a_s.push(steering_matrix(&scenario.array, s, w, &scenario.medium, k)?);
            cov.push(build_covariance(&scenario.noise.k_n, Some(&aq), scenario.noise.sigma_z2)?);
        }
        Ok(Self { a_s, cov })
    }

    /// Weights of `d` designed at sweep position `i`; the non-rake designs
    /// only know the direct paths.
    fn weights(&self, d: Design, i: usize) -> Option<Vec<Complex64>> {
        let j = if d.is_rake() { i } else { 0 };
        design_weights(d, &self.a_s[j], &self.cov[j]).ok()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SweepMetric {
    Sinr,
    Udr,
}

fn random_pair(scenario: &Scenario, t: usize, order: usize) -> Result<(Vec2, Vec2, ImageSourceSet, ImageSourceSet), HarnessError> {
    let e = &scenario.config.experiment;
    let mut rng = trial_rng(scenario.seed(), t);
    let source = random_position(&mut rng, &scenario.room, &scenario.array, e.placement_margin);
    let interferer = random_position(&mut rng, &scenario.room, &scenario.array, e.placement_margin);
    let s = enumerate_images(&scenario.room, source, order)?;
    let q = enumerate_images(&scenario.room, interferer, order)?;
    Ok((source, interferer, s, q))
}

fn run_k_sweep(scenario: &Scenario, metric: SweepMetric) -> Result<ExperimentResult, HarnessError> {
    scenario.check_experiment()?;
    let e = &scenario.config.experiment;
    let k_max = e.k_max;
    let order = order_for_count(k_max + 1);
    let hz = e.frequency_hz;
    let sx = scenario.noise.sigma_x2;
    let kind = match metric {
        SweepMetric::Sinr => ExperimentKind::SinrVsK,
        SweepMetric::Udr => ExperimentKind::UdrVsK,
    };

    let records = (0..e.trials)
        .into_par_iter()
        .map(|t| {
            let (source, interferer, s, q) = random_pair(scenario, t, order)?;
            let models = Models::new(scenario, &s, &q, hz, 0..=k_max)?;
            let mut values = Vec::new();
            for d in Design::ALL {
                let fixed = if d.is_rake() { None } else { Some(models.weights(d, 0)) };
                for k in 0..=k_max {
                    let w = fixed.clone().unwrap_or_else(|| models.weights(d, k));
                    let value_db = match (w, metric) {
                        (None, _) => f64::NAN,
                        (Some(w), SweepMetric::Sinr) => {
                            db_or_nan(output_sinr(&w, &models.a_s[k_max], &models.cov[k_max], sx))
                        }
                        (Some(w), SweepMetric::Udr) => db_or_nan(udr(&w, &models.a_s[k], &models.cov[k], sx)),
                    };
                    values.push(MetricValue {
                        k,
                        frequency_hz: hz,
                        design: d,
                        value_db,
                    });
                }
            }
            Ok(TrialRecord {
                trial: t,
                source,
                interferer: Some(interferer),
                values,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut rows = Vec::new();
    for k in 0..=k_max {
        for d in Design::ALL {
            let vals: Vec<f64> = records
                .iter()
                .flat_map(|r| r.values.iter().filter(|v| v.k == k && v.design == d).map(|v| v.value_db))
                .collect();
            rows.push(QuantileRow {
                k,
                design: d,
                summary: Summary::of(&vals),
            });
        }
    }
    Ok(ExperimentResult {
        kind,
        records,
        summary: ExperimentSummary::Quantiles(rows),
        provenance: Provenance::new(kind.name(), scenario, Some(e.trials)),
    })
}

/// Output SINR of every design against the number `K = K′` of images used
/// in the design, with random source and interferer positions. Every design
/// is scored against the same scene model, the one with `k_max` desired and
/// interferer images, so DS and Max-SINR are flat in `K`.
pub fn run_sinr_vs_k(scenario: &Scenario) -> Result<ExperimentResult, HarnessError> {
    run_k_sweep(scenario, SweepMetric::Sinr)
}

/// Output UDR of every design against `K = K′`, all scored on the model
/// with `K` desired and `K′` interferer images.
pub fn run_udr_vs_k(scenario: &Scenario) -> Result<ExperimentResult, HarnessError> {
    run_k_sweep(scenario, SweepMetric::Udr)
}

/// dB-domain mean output SINR of every design at every `freq_bin_step`-th
/// STFT bin, with `K = K′ = k_max` and every design scored against the
/// `k_max` scene model.
pub fn run_sinr_vs_freq(scenario: &Scenario) -> Result<ExperimentResult, HarnessError> {
    scenario.check_experiment()?;
    let e = &scenario.config.experiment;
    let k = e.k_max;
    let order = order_for_count(k + 1);
    let fs = scenario.medium.sampling_rate;
    let frequencies: Vec<f64> = (e.freq_bin_step..scenario.stft.num_bins())
        .step_by(e.freq_bin_step)
        .map(|b| scenario.stft.bin_frequency(b, fs))
        .collect();
    let sx = scenario.noise.sigma_x2;

    let records = (0..e.trials)
        .into_par_iter()
        .map(|t| {
            let (source, interferer, s, q) = random_pair(scenario, t, order)?;
            let mut values = Vec::new();
            for &hz in &frequencies {
                let models = Models::new(scenario, &s, &q, hz, [0, k].into_iter())?;
                for d in Design::ALL {
                    let value_db = match models.weights(d, 1) {
                        Some(w) => db_or_nan(output_sinr(&w, &models.a_s[1], &models.cov[1], sx)),
                        None => f64::NAN,
                    };
                    values.push(MetricValue {
                        k,
                        frequency_hz: hz,
                        design: d,
                        value_db,
                    });
                }
            }
            Ok(TrialRecord {
                trial: t,
                source,
                interferer: Some(interferer),
                values,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let n_designs = Design::ALL.len();
    let mut rows = Vec::new();
    for (fi, &hz) in frequencies.iter().enumerate() {
        for (di, d) in Design::ALL.into_iter().enumerate() {
            let vals: Vec<f64> = records
                .iter()
                .map(|r| r.values[fi * n_designs + di].value_db)
                .filter(|v| v.is_finite())
                .collect();
            let mean_db = if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            };
            rows.push(FrequencyRow {
                frequency_hz: hz,
                design: d,
                mean_db,
                count: vals.len(),
            });
        }
    }
    Ok(ExperimentResult {
        kind: ExperimentKind::SinrVsFreq,
        records,
        summary: ExperimentSummary::FrequencyMeans(rows),
        provenance: Provenance::new(ExperimentKind::SinrVsFreq.name(), scenario, Some(e.trials)),
    })
}
