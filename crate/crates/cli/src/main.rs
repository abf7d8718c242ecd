//! `rakeroom`: simulate rooms, design rake beamformers, run the Monte-Carlo
//! experiments and process audio.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rakeroom::beamforming::{beampattern_csv, Design};
use rakeroom::harness::experiments::ExperimentKind;
use rakeroom::harness::process::AudioInputs;
use rakeroom::harness::{
    design_scenario, process_audio, scenario_beampattern, simulate, weights_json, write_file, ConfigError, HarnessError,
    Provenance, Scenario, ScenarioConfig, PRESETS,
};

const SEED_ENV: &str = "RAKEROOM_SEED";

#[derive(Debug, Parser)]
#[command(name = "rakeroom", version, about = "Acoustic rake receiver simulation and experiments")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: default, quiet, interferer, interferer-udr or occluded.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Random seed; falls back to $RAKEROOM_SEED, then to the scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Directory for result files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Beamformer design.
    #[arg(long, global = true)]
    design: Option<Design>,
    /// Number of image sources; for experiments, the swept K.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write image positions, impulse responses and, with WAV inputs, the
    /// microphone mixture.
    Simulate,
    /// Design weights for every STFT bin and dump them as JSON.
    Design,
    /// Write the beampattern at one frequency.
    Beampattern {
        #[arg(long, default_value_t = 1000.0)]
        freq: f64,
        /// Distance of the evaluation points from the array centroid;
        /// defaults to the distance of the desired source.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 360)]
        angles: usize,
    },
    /// Run a Monte-Carlo experiment.
    Experiment {
        /// snr-gain, sinr-vs-k, udr-vs-k or sinr-vs-freq.
        kind: ExperimentKind,
        #[arg(long)]
        freq: Option<f64>,
    },
    /// Render the scenario's WAV inputs, beamform and write the results.
    Process,
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(name)) => ScenarioConfig::preset(name)?,
        (None, None) => ScenarioConfig::preset(PRESETS[0])?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    } else if let Ok(text) = std::env::var(SEED_ENV) {
        cfg.seed = text
            .trim()
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("{SEED_ENV}='{text}' is not a 64-bit unsigned integer")))?;
    }
    if let Some(t) = cli.trials {
        cfg.experiment.trials = t;
    }
    if let Some(d) = cli.design {
        cfg.beamformer.design = d;
    }
    if let Some(k) = cli.k {
        cfg.beamformer.k = k;
    }
    if let Command::Experiment { kind, freq } = &cli.command {
        if let Some(f) = freq {
            cfg.experiment.frequency_hz = *f;
        }
        if let Some(k) = cli.k {
            match kind {
                ExperimentKind::SnrGain => cfg.experiment.snr_gain_k = vec![k],
                _ => cfg.experiment.k_max = k,
            }
            // The sweep replaces the design's K; keep the scenario valid.
            cfg.beamformer.k = cfg.beamformer.k.min(k);
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, HarnessError> {
    let scenario = Scenario::new(load_config(cli)?)?;
    let dir = &cli.out_dir;
    match &cli.command {
        Command::Simulate => {
            let inputs = if scenario.config.source.wav.is_some() {
                Some(AudioInputs::load(&scenario)?)
            } else {
                None
            };
            simulate(&scenario, inputs.as_ref())?.write(dir, &scenario)
        }
        Command::Design => {
            let weights = design_scenario(&scenario)?;
            Ok(vec![
                write_file(dir, "weights.json", weights_json(&scenario, &weights).as_bytes())?,
                write_file(
                    dir,
                    "design_provenance.json",
                    Provenance::new("design", &scenario, None).to_json().as_bytes(),
                )?,
            ])
        }
        Command::Beampattern { freq, radius, angles } => {
            if !(*freq > 0.0) || *freq > scenario.medium.sampling_rate / 2.0 || *angles == 0 {
                return Err(ConfigError::Invalid(format!(
                    "beampattern needs 0 < freq ≤ {} Hz and at least one angle",
                    scenario.medium.sampling_rate / 2.0
                ))
                .into());
            }
            let r = radius.unwrap_or_else(|| scenario.array.centroid().distance(scenario.source));
            if !(r > 0.0) {
                return Err(ConfigError::Invalid(format!("radius {r} must be positive")).into());
            }
            let (a, m) = scenario_beampattern(&scenario, *freq, r, *angles)?;
            Ok(vec![
                write_file(dir, "beampattern.csv", beampattern_csv(&a, &m).as_bytes())?,
                write_file(
                    dir,
                    "beampattern_provenance.json",
                    Provenance::new("beampattern", &scenario, None).to_json().as_bytes(),
                )?,
            ])
        }
        Command::Experiment { kind, .. } => kind.run(&scenario)?.write(dir),
        Command::Process => {
            let inputs = AudioInputs::load(&scenario)?;
            let result = process_audio(&scenario, &inputs)?;
            eprintln!(
                "{}: input SINR {:.2} dB, output SINR {:.2} dB",
                result.design, result.input_sinr_db, result.output_sinr_db
            );
            result.write(dir, &scenario)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
