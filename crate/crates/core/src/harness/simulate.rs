//! Scene rendering without beamforming: image lists, impulse responses and,
//! when dry signals are available, the microphone mixture.

use std::path::{Path, PathBuf};

use crate::acoustics::{
    noise_std_for_snr, render_mic_signals, synthesize_rir, write_wav, RenderSource, SampledRir, WavFormat,
};
use crate::geometry::{enumerate_images, ImageSourceSet};

use super::config::Scenario;
use super::process::AudioInputs;
use super::{csv_bytes, fmt_f64, write_file, HarnessError, Provenance};

#[derive(Debug, Clone)]
pub struct Simulation {
    pub desired: ImageSourceSet,
    pub interferer: Option<ImageSourceSet>,
    /// Desired-source response at every microphone.
    pub rirs: Vec<SampledRir>,
    /// Desired plus interferer plus noise at every microphone.
    pub mics: Option<Vec<Vec<f64>>>,
}

pub fn simulate(scenario: &Scenario, inputs: Option<&AudioInputs>) -> Result<Simulation, HarnessError> {
    let cfg = &scenario.config;
    let order = cfg.room.max_order;
    let desired = enumerate_images(&scenario.room, scenario.source, order)?;
    let interferer = match scenario.interferer {
        Some(q) => Some(enumerate_images(&scenario.room, q, order)?),
        None => None,
    };
    let rirs = scenario
        .array
        .positions()
        .iter()
        .map(|&m| synthesize_rir(m, &desired, &scenario.medium, cfg.room.rir_halfwidth))
        .collect::<Result<Vec<_>, _>>()?;
    let mics = match inputs {
        Some(inp) => {
            let mut sources = vec![RenderSource {
                images: &desired,
                signal: &inp.desired,
            }];
            if let (Some(set), Some(sig)) = (&interferer, &inp.interferer) {
                sources.push(RenderSource { images: set, signal: sig });
            }
            let std = if cfg.processing.snr_db.is_finite() {
                noise_std_for_snr(&inp.desired, scenario.source, scenario.array.centroid(), cfg.processing.snr_db)
            } else {
                0.0
            };
            Some(render_mic_signals(
                &sources,
                &scenario.array,
                &scenario.medium,
                cfg.room.rir_halfwidth,
                &vec![std; scenario.array.len()],
                scenario.seed(),
            )?)
        }
        None => None,
    };
    Ok(Simulation {
        desired,
        interferer,
        rirs,
        mics,
    })
}

impl Simulation {
    /// `source,generation,x_m,y_m,attenuation` for every image of both sources.
    pub fn images_csv(&self) -> Result<Vec<u8>, HarnessError> {
        let sets = std::iter::once(("desired", &self.desired)).chain(self.interferer.iter().map(|s| ("interferer", s)));
        csv_bytes(
            &["source", "generation", "x_m", "y_m", "attenuation"],
            sets.flat_map(|(name, set)| {
                set.iter().map(move |img| {
                    vec![
                        name.to_string(),
                        img.generation.to_string(),
                        fmt_f64(img.position.x),
                        fmt_f64(img.position.y),
                        fmt_f64(img.attenuation),
                    ]
                })
            }),
        )
    }

    /// `sample,time_s,mic_0,…`; sample indices include the negative lead-in
    /// of the tapered sinc.
    pub fn rir_csv(&self, sampling_rate: f64) -> Result<Vec<u8>, HarnessError> {
        let labels: Vec<String> = ["sample".to_string(), "time_s".to_string()]
            .into_iter()
            .chain((0..self.rirs.len()).map(|m| format!("mic_{m}")))
            .collect();
        let header: Vec<&str> = labels.iter().map(String::as_str).collect();
        let offset = self.rirs.iter().map(|r| r.offset).min().unwrap_or(0);
        let end = self.rirs.iter().map(|r| r.offset + r.taps.len() as i64).max().unwrap_or(0);
        csv_bytes(
            &header,
            (offset..end).map(|n| {
                [n.to_string(), fmt_f64(n as f64 / sampling_rate)]
                    .into_iter()
                    .chain(self.rirs.iter().map(|r| fmt_f64(r.at(n))))
                    .collect::<Vec<_>>()
            }),
        )
    }

    /// Writes `images.csv`, `rir.csv`, `simulate_provenance.json` and, with
    /// signals, `mics.wav`.
    pub fn write(&self, dir: &Path, scenario: &Scenario) -> Result<Vec<PathBuf>, HarnessError> {
        let mut written = vec![
            write_file(dir, "images.csv", &self.images_csv()?)?,
            write_file(dir, "rir.csv", &self.rir_csv(scenario.medium.sampling_rate)?)?,
            write_file(
                dir,
                "simulate_provenance.json",
                Provenance::new("simulate", scenario, None).to_json().as_bytes(),
            )?,
        ];
        if let Some(mics) = &self.mics {
            let path = dir.join("mics.wav");
            write_wav(&path, mics, scenario.sampling_rate_hz(), WavFormat::Float32)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ScenarioConfig;

    #[test]
    fn rir_table_and_images() {
        let mut c = ScenarioConfig::preset("interferer").unwrap();
        c.room.max_order = 2;
        let s = Scenario::new(c).unwrap();
        let sim = simulate(&s, None).unwrap();
        assert!(sim.mics.is_none());
        let images = String::from_utf8(sim.images_csv().unwrap()).unwrap();
        // 13 desired and 13 interferer sources up to second order.
        assert_eq!(images.lines().count(), 1 + 26);
        assert!(images.starts_with("source,generation,x_m,y_m,attenuation\ndesired,0,1,4.5,1\n"));
        let rir = String::from_utf8(sim.rir_csv(8000.0).unwrap()).unwrap();
        let first = rir.lines().nth(1).unwrap();
        assert!(first.starts_with("-81,"));
        assert_eq!(first.split(',').count(), 2 + 12);
    }

    #[test]
    fn mixture_with_signals() {
        let s = Scenario::new(ScenarioConfig::preset("interferer").unwrap()).unwrap();
        let inputs = AudioInputs {
            desired: vec![1.0; 100],
            interferer: Some(vec![0.5; 50]),
        };
        let sim = simulate(&s, Some(&inputs)).unwrap();
        let mics = sim.mics.unwrap();
        assert_eq!(mics.len(), 12);
        assert!(mics.iter().all(|r| r.len() == mics[0].len()));
    }
}
