//! Scenario files: a versioned TOML tree with defaults for every field.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acoustics::{Medium, MicArray, DEFAULT_TRUNC_HALFWIDTH};
use crate::beamforming::{Design, NoiseModel};
use crate::geometry::{Room, Vec2};
use crate::stft::StftConfig;

use super::ConfigError;

pub const SCHEMA_VERSION: u32 = 1;

/// Names accepted by [`ScenarioConfig::preset`].
pub const PRESETS: [&str; 5] = ["default", "quiet", "interferer", "interferer-udr", "occluded"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub room: RoomConfig,
    #[serde(default)]
    pub medium: MediumConfig,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub interferer: Option<SourceConfig>,
    #[serde(default)]
    pub beamformer: BeamformerConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub stft: StftSection,
    #[serde(default)]
    pub processing: ProcessingConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoomConfig {
    pub width: f64,
    pub height: f64,
    pub reflectivity: f64,
    /// Image generations rendered and available to the designs.
    pub max_order: usize,
    /// Half-width in samples of the tapered sinc used to render responses.
    pub rir_halfwidth: usize,
}

impl Default for RoomConfig {
    fn default() -> Self {
        Self {
            width: 4.0,
            height: 6.0,
            reflectivity: 0.9,
            max_order: 10,
            rir_halfwidth: DEFAULT_TRUNC_HALFWIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MediumConfig {
    pub speed_of_sound: f64,
    pub sampling_rate: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        let m = Medium::default();
        Self {
            speed_of_sound: m.speed_of_sound,
            sampling_rate: m.sampling_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArrayConfig {
    Circular {
        center: [f64; 2],
        count: usize,
        diameter: f64,
    },
    Linear {
        center: [f64; 2],
        count: usize,
        spacing: f64,
        #[serde(default)]
        orientation_deg: f64,
    },
    Custom {
        positions: Vec<[f64; 2]>,
    },
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig::Circular {
            center: [2.0, 1.5],
            count: 12,
            diameter: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub position: [f64; 2],
    /// Dry signal; relative paths are resolved against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wav: Option<PathBuf>,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            position: [1.0, 4.5],
            wav: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamformerConfig {
    pub design: Design,
    /// Desired-source images used by the rake designs.
    pub k: usize,
    /// Interferer images in the covariance; defaults to `k`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_interferer: Option<usize>,
}

impl Default for BeamformerConfig {
    fn default() -> Self {
        Self {
            design: Design::RakeMaxSinr,
            k: 4,
            k_interferer: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Per-microphone variance of the white noise in `K_n`.
    pub variance: f64,
    pub sigma_x2: f64,
    pub sigma_z2: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            variance: 1e-3,
            sigma_x2: 1.0,
            sigma_z2: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StftSection {
    /// Frame length `L`; hop is `L/2` and the FFT has `2L` points.
    pub frame_length: usize,
}

impl Default for StftSection {
    fn default() -> Self {
        Self { frame_length: 4096 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessingConfig {
    /// High-pass cutoff applied to every rendered signal; 0 disables it.
    pub highpass_hz: f64,
    /// Direct-path SNR of the desired source at the array centroid; `inf`
    /// renders without noise.
    pub snr_db: f64,
    /// Scale dry inputs to unit peak amplitude before rendering.
    pub normalize_inputs: bool,
}

impl Default for ProcessingConfig {
    fn default() -> Self {
        Self {
            highpass_hz: 300.0,
            snr_db: 20.0,
            normalize_inputs: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub frequency_hz: f64,
    /// Image counts swept by `snr-gain`.
    pub snr_gain_k: Vec<usize>,
    /// Largest `K = K′` swept by `sinr-vs-k` and `udr-vs-k`, and the value
    /// used by `sinr-vs-freq`.
    pub k_max: usize,
    /// `sinr-vs-freq` evaluates every `freq_bin_step`-th STFT bin.
    pub freq_bin_step: usize,
    /// Minimum distance of random sources from walls and microphones (m).
    pub placement_margin: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 2000,
            frequency_hz: 1000.0,
            snr_gain_k: (0..=16).collect(),
            k_max: 10,
            freq_bin_step: 64,
            placement_margin: 0.1,
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: default_seed(),
            room: RoomConfig::default(),
            medium: MediumConfig::default(),
            array: ArrayConfig::default(),
            source: SourceConfig::default(),
            interferer: Some(SourceConfig {
                position: [2.8, 4.3],
                wav: None,
            }),
            beamformer: BeamformerConfig::default(),
            noise: NoiseConfig::default(),
            stft: StftSection::default(),
            processing: ProcessingConfig::default(),
            experiment: ExperimentConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Built-in scenarios. `default` uses the 12-microphone circular array of
    /// 30 cm diameter; the other presets use a 12-microphone linear array
    /// with 8 cm spacing centred at (2, 1.5), first-order images, and
    ///
    /// * `quiet`: no interferer, Rake-Max-SINR
    /// * `interferer`: interferer at (2.8, 4.3), Rake-Max-SINR
    /// * `interferer-udr`: interferer at (2.8, 4.3), Rake-Max-UDR
    /// * `occluded`: interferer at (1.5, 3) between source and array, Rake-Max-SINR
    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if name == "default" {
            return Ok(cfg);
        }
        let (interferer, design) = match name {
            "quiet" => (None, Design::RakeMaxSinr),
            "interferer" => (Some([2.8, 4.3]), Design::RakeMaxSinr),
            "interferer-udr" => (Some([2.8, 4.3]), Design::RakeMaxUdr),
            "occluded" => (Some([1.5, 3.0]), Design::RakeMaxSinr),
            _ => {
                return Err(ConfigError::Invalid(format!(
                    "unknown preset '{name}', expected one of {}",
                    PRESETS.join(", ")
                )))
            }
        };
        cfg.array = ArrayConfig::Linear {
            center: [2.0, 1.5],
            count: 12,
            spacing: 0.08,
            orientation_deg: 0.0,
        };
        cfg.interferer = interferer.map(|p| SourceConfig { position: p, wav: None });
        cfg.beamformer = BeamformerConfig {
            design,
            k: 4,
            k_interferer: None,
        };
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Parse a config file and make WAV paths relative to its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for s in std::iter::once(&mut cfg.source).chain(cfg.interferer.as_mut()) {
            if let Some(w) = s.wav.as_mut() {
                if w.is_relative() {
                    *w = base.join(&*w);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    /// Hex SHA-256 of the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn k_interferer(&self) -> usize {
        self.beamformer.k_interferer.unwrap_or(self.beamformer.k)
    }
}

/// A validated scenario with its geometry built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub room: Room,
    pub array: MicArray,
    pub medium: Medium,
    pub source: Vec2,
    pub interferer: Option<Vec2>,
    pub noise: NoiseModel,
    pub stft: StftConfig,
}

/// Number of image sources, the true source included, up to `order`
/// generations in a rectangle.
pub fn images_up_to_order(order: usize) -> usize {
    1 + 2 * order * (order + 1)
}

/// Smallest generation count giving at least `count` sources.
pub fn order_for_count(count: usize) -> usize {
    (0..).find(|&n| images_up_to_order(n) >= count).unwrap()
}

fn vec2(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

fn check_inside(room: &Room, what: &str, p: Vec2) -> Result<(), ConfigError> {
    if !p.is_finite() || !room.contains_strictly(p) {
        return Err(ConfigError::Invalid(format!(
            "{what} position ({}, {}) lies outside the {} × {} m room",
            p.x,
            p.y,
            room.width(),
            room.height()
        )));
    }
    Ok(())
}

fn check_k(what: &str, k: usize, cfg: &ScenarioConfig, num_mics: usize, design: Design) -> Result<(), ConfigError> {
    let available = images_up_to_order(cfg.room.max_order);
    if k + 1 > available {
        return Err(ConfigError::Invalid(format!(
            "{what} = {k} needs {} sources but max_order {} provides {available}",
            k + 1,
            cfg.room.max_order
        )));
    }
    if design == Design::RakeOneForcing && k + 1 > num_mics {
        return Err(ConfigError::Invalid(format!(
            "{what} = {k} gives {} One-Forcing constraints for {num_mics} microphones",
            k + 1
        )));
    }
    Ok(())
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self, ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        let c = &config;
        let room = Room::rectangle(c.room.width, c.room.height, c.room.reflectivity).map_err(|e| invalid(&e))?;
        let medium = Medium::new(c.medium.speed_of_sound, c.medium.sampling_rate).map_err(|e| invalid(&e))?;
        if c.medium.sampling_rate.fract() != 0.0 || c.medium.sampling_rate > u32::MAX as f64 {
            return Err(ConfigError::Invalid(format!(
                "sampling_rate {} must be a whole number of hertz",
                c.medium.sampling_rate
            )));
        }
        let array = match &c.array {
            ArrayConfig::Circular { center, count, diameter } => MicArray::circular(vec2(*center), *count, *diameter),
            ArrayConfig::Linear {
                center,
                count,
                spacing,
                orientation_deg,
            } => MicArray::linear(vec2(*center), *count, *spacing, orientation_deg.to_radians()),
            ArrayConfig::Custom { positions } => MicArray::custom(positions.iter().copied().map(vec2).collect()),
        }
        .map_err(|e| invalid(&e))?;
        for (m, &p) in array.positions().iter().enumerate() {
            check_inside(&room, &format!("microphone {m}"), p)?;
        }
        let source = vec2(c.source.position);
        check_inside(&room, "source", source)?;
        let interferer = c.interferer.as_ref().map(|i| vec2(i.position));
        if let Some(q) = interferer {
            check_inside(&room, "interferer", q)?;
        } else if c.beamformer.k_interferer.is_some_and(|k| k > 0) {
            return Err(ConfigError::Invalid(
                "beamformer.k_interferer is set but the scenario has no interferer".into(),
            ));
        }
        check_k("beamformer.k", c.beamformer.k, c, array.len(), c.beamformer.design)?;
        check_k("beamformer.k_interferer", c.k_interferer(), c, usize::MAX, Design::RakeMaxSinr)?;
        if c.room.rir_halfwidth < 16 {
            return Err(ConfigError::Invalid(format!(
                "room.rir_halfwidth {} is below the minimum of 16 samples",
                c.room.rir_halfwidth
            )));
        }

        let n = &c.noise;
        if !(n.variance > 0.0) || !(n.sigma_x2 > 0.0) || !(n.sigma_z2 >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "noise needs variance > 0, sigma_x2 > 0, sigma_z2 ≥ 0; got {}, {}, {}",
                n.variance, n.sigma_x2, n.sigma_z2
            )));
        }
        let mut noise = NoiseModel::white(array.len(), n.variance);
        noise.sigma_x2 = n.sigma_x2;
        noise.sigma_z2 = n.sigma_z2;

        let stft = StftConfig::with_frame_length(c.stft.frame_length);
        stft.validate().map_err(|e| invalid(&e))?;

        let p = &c.processing;
        if !(p.highpass_hz >= 0.0) || p.highpass_hz >= c.medium.sampling_rate / 2.0 {
            return Err(ConfigError::Invalid(format!(
                "processing.highpass_hz {} must lie in [0, {})",
                p.highpass_hz,
                c.medium.sampling_rate / 2.0
            )));
        }
        if p.snr_db.is_nan() {
            return Err(ConfigError::Invalid("processing.snr_db must be a number".into()));
        }

        let e = &c.experiment;
        if e.trials == 0 {
            return Err(ConfigError::Invalid("experiment.trials must be positive".into()));
        }
        if !(e.frequency_hz > 0.0) || e.frequency_hz > c.medium.sampling_rate / 2.0 {
            return Err(ConfigError::Invalid(format!(
                "experiment.frequency_hz {} must lie in (0, {}]",
                e.frequency_hz,
                c.medium.sampling_rate / 2.0
            )));
        }
        if e.freq_bin_step == 0 {
            return Err(ConfigError::Invalid("experiment.freq_bin_step must be positive".into()));
        }
        if !(e.placement_margin >= 0.0) || 2.0 * e.placement_margin >= c.room.width.min(c.room.height) {
            return Err(ConfigError::Invalid(format!(
                "experiment.placement_margin {} leaves no room for sources",
                e.placement_margin
            )));
        }

        Ok(Self {
            room,
            array,
            medium,
            source,
            interferer,
            noise,
            stft,
            config,
        })
    }

    /// Image counts of the experiment sweeps against the available images.
    /// Checked by the runners rather than [`Scenario::new`] so scenarios with
    /// few generations can still be processed.
    pub fn check_experiment(&self) -> Result<(), ConfigError> {
        let c = &self.config;
        for &k in &c.experiment.snr_gain_k {
            check_k("experiment.snr_gain_k entry", k, c, usize::MAX, Design::RakeMaxSinr)?;
        }
        check_k("experiment.k_max", c.experiment.k_max, c, usize::MAX, Design::RakeMaxSinr)
    }

    pub fn k(&self) -> usize {
        self.config.beamformer.k
    }

    /// `K′`, zero without an interferer.
    pub fn k_interferer(&self) -> usize {
        if self.interferer.is_some() {
            self.config.k_interferer()
        } else {
            0
        }
    }

    pub fn design(&self) -> Design {
        self.config.beamformer.design
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn sampling_rate_hz(&self) -> u32 {
        self.config.medium.sampling_rate as u32
    }
}
