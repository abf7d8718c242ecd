//! Weight design and beampatterns for the fixed geometry of a scenario.

use crate::acoustics::omega;
use crate::beamforming::{angle_grid, beampattern, BeamWeights, DesignProblem, WeightsDocument};
use crate::geometry::{enumerate_images, ImageSourceSet};

use super::config::Scenario;
use super::HarnessError;

fn image_sets(scenario: &Scenario) -> Result<(ImageSourceSet, Option<ImageSourceSet>), HarnessError> {
    let order = scenario.config.room.max_order;
    let s = enumerate_images(&scenario.room, scenario.source, order)?;
    let q = match scenario.interferer {
        Some(q) => Some(enumerate_images(&scenario.room, q, order)?),
        None => None,
    };
    Ok((s, q))
}

fn with_problem<T>(
    scenario: &Scenario,
    f: impl FnOnce(&DesignProblem<'_>) -> Result<T, HarnessError>,
) -> Result<T, HarnessError> {
    let (s, q) = image_sets(scenario)?;
    let problem = DesignProblem {
        design: scenario.design(),
        array: &scenario.array,
        medium: &scenario.medium,
        desired: &s,
        interferer: q.as_ref(),
        noise: &scenario.noise,
        k: scenario.k(),
        k_interferer: scenario.k_interferer(),
    };
    f(&problem)
}

/// Weights of the scenario's design at every STFT bin, unit desired response.
pub fn design_scenario(scenario: &Scenario) -> Result<BeamWeights, HarnessError> {
    with_problem(scenario, |p| Ok(p.design_bins(&scenario.stft)?))
}

/// JSON weight dump of [`design_scenario`].
pub fn weights_json(scenario: &Scenario, weights: &BeamWeights) -> String {
    let doc = WeightsDocument::new(weights, scenario.medium.sampling_rate, scenario.stft.fft_length);
    serde_json::to_string(&doc).expect("weights serialize") + "\n"
}

/// Normalized response of the scenario's design at `hz` toward `num_angles`
/// directions, for points at `radius` from the array centroid. Returns the
/// angles in radians and the magnitudes.
pub fn scenario_beampattern(
    scenario: &Scenario,
    hz: f64,
    radius: f64,
    num_angles: usize,
) -> Result<(Vec<f64>, Vec<f64>), HarnessError> {
    with_problem(scenario, |p| {
        let w = p.weights_at(hz)?;
        let angles = angle_grid(num_angles);
        let mags = beampattern(&w, &scenario.array, omega(hz), &scenario.medium, &angles, radius)?;
        Ok((angles, mags))
    })
}
