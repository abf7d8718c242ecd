use rakeroom::acoustics::{noise_stream, read_wav, write_wav, WavFormat};
use rakeroom::beamforming::Design;
use rakeroom::harness::{
    process_audio, run_snr_gain, AudioInputs, ExperimentKind, ExperimentSummary, HarnessError, Scenario,
    ScenarioConfig, PRESETS,
};

fn small(name: &str) -> ScenarioConfig {
    let mut c = ScenarioConfig::preset(name).unwrap();
    c.experiment.trials = 20;
    c.experiment.k_max = 3;
    c.experiment.freq_bin_step = 128;
    c.stft.frame_length = 256;
    c
}

#[test]
fn presets_survive_toml() {
    for name in PRESETS {
        let c = ScenarioConfig::preset(name).unwrap();
        assert_eq!(ScenarioConfig::from_toml(&c.to_toml()).unwrap(), c, "{name}");
        Scenario::new(c).unwrap();
    }
}

#[test]
fn unknown_keys_and_bad_values_are_config_errors() {
    let text = ScenarioConfig::preset("default").unwrap().to_toml();
    assert!(ScenarioConfig::from_toml(&format!("bogus = 1\n{text}")).is_err());

    let mut c = ScenarioConfig::preset("default").unwrap();
    c.source.position = [5.0, 1.0];
    assert!(Scenario::new(c).is_err());

    let mut c = ScenarioConfig::preset("quiet").unwrap();
    c.beamformer.k_interferer = Some(2);
    assert!(Scenario::new(c).is_err());

    let mut c = ScenarioConfig::preset("default").unwrap();
    c.experiment.snr_gain_k = vec![500];
    let s = Scenario::new(c).unwrap();
    let err = run_snr_gain(&s).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_)), "{err}");
}

#[test]
fn load_resolves_wav_paths_next_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ScenarioConfig::preset("quiet").unwrap();
    c.source.wav = Some("speech.wav".into());
    std::fs::write(dir.path().join("scene.toml"), c.to_toml()).unwrap();
    let loaded = ScenarioConfig::load(dir.path().join("scene.toml")).unwrap();
    assert_eq!(loaded.source.wav.unwrap(), dir.path().join("speech.wav"));
}

#[test]
fn gain_without_images_is_zero_db() {
    let mut c = small("default");
    c.experiment.snr_gain_k = vec![0, 2];
    let r = run_snr_gain(&Scenario::new(c).unwrap()).unwrap();
    let ExperimentSummary::Gain(rows) = &r.summary else {
        panic!("expected a gain summary")
    };
    assert_eq!(rows[0].k, 0);
    assert!(rows[0].report.empirical_gain_db.unwrap().abs() < 1e-12);
    assert_eq!(rows[0].report.predicted_gain_db, 0.0);
    assert!(rows[1].report.empirical_gain_db.unwrap() > 0.0);
}

#[test]
fn experiments_write_summary_trials_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario::new(small("interferer")).unwrap();
    for kind in [ExperimentKind::SinrVsK, ExperimentKind::UdrVsK, ExperimentKind::SinrVsFreq] {
        let r = kind.run(&s).unwrap();
        assert_eq!(r.num_trials(), 20);
        let paths = r.write(dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let summary = std::fs::read_to_string(&paths[0]).unwrap();
        assert!(summary.lines().count() > 1, "{kind}");
        let prov: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{kind}_provenance.json"))).unwrap())
                .unwrap();
        assert_eq!(prov["seed"], 1);
        assert_eq!(prov["num_trials"], 20);
    }
}

#[test]
fn distortionless_design_returns_the_dry_signal() {
    // Direct path only, no noise, no filtering: DS has unit response toward
    // the source, so the output reproduces the dry input, late by the
    // rendering latency.
    let mut c = ScenarioConfig::preset("quiet").unwrap();
    c.room.max_order = 0;
    c.beamformer.design = Design::Ds;
    c.beamformer.k = 0;
    c.processing.highpass_hz = 0.0;
    c.processing.snr_db = f64::INFINITY;
    c.stft.frame_length = 1024;
    let s = Scenario::new(c).unwrap();
    let x = noise_stream(16_000, 0.3, 5, 0);
    let r = process_audio(
        &s,
        &AudioInputs {
            desired: x,
            interferer: None,
        },
    )
    .unwrap();
    let h = s.config.room.rir_halfwidth;
    let (a, b) = (&r.clean[2000..14_000], &r.output[2000 + h..14_000 + h]);
    let err: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    let den: f64 = a.iter().map(|p| p * p).sum::<f64>();
    assert!((err / den).sqrt() < 0.05, "relative error {}", (err / den).sqrt());
    assert!(r.output_sinr_db.is_infinite());
}

#[test]
fn raking_helps_in_the_occlusion_scene() {
    let inputs = AudioInputs {
        desired: noise_stream(16_000, 1.0, 3, 0),
        interferer: Some(noise_stream(16_000, 1.0, 3, 1)),
    };
    let sinr = |d| {
        let mut c = ScenarioConfig::preset("occluded").unwrap();
        c.beamformer.design = d;
        c.stft.frame_length = 1024;
        process_audio(&Scenario::new(c).unwrap(), &inputs).unwrap().output_sinr_db
    };
    let rake = sinr(Design::RakeMaxSinr);
    assert!(rake > sinr(Design::MaxSinr));
    assert!(rake > sinr(Design::Ds));
}

#[test]
fn process_writes_wavs_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let s_path = dir.path().join("s.wav");
    let q_path = dir.path().join("q.wav");
    write_wav(&s_path, &[noise_stream(4000, 0.3, 1, 0)], 8000, WavFormat::Pcm16).unwrap();
    write_wav(&q_path, &[noise_stream(4000, 0.3, 1, 1)], 8000, WavFormat::Pcm16).unwrap();
    let mut c = small("interferer");
    c.source.wav = Some(s_path);
    c.interferer.as_mut().unwrap().wav = Some(q_path);
    let s = Scenario::new(c).unwrap();
    let r = process_audio(&s, &AudioInputs::load(&s).unwrap()).unwrap();
    let out = dir.path().join("out");
    r.write(&out, &s).unwrap();
    let wav = read_wav(out.join("output.wav")).unwrap();
    assert_eq!(wav.sample_rate, 8000);
    assert_eq!(wav.num_frames(), r.output.len());
    assert!(r.output.len() > 4000);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("process.json")).unwrap()).unwrap();
    assert_eq!(report["design"], "rake-max-sinr");
    let header = std::fs::read_to_string(out.join("spectrogram_processed.csv")).unwrap();
    assert!(header.starts_with("time_s,0,"));
}

#[test]
fn process_without_wav_is_a_config_error() {
    let s = Scenario::new(ScenarioConfig::preset("quiet").unwrap()).unwrap();
    assert!(AudioInputs::load(&s).unwrap_err().is_config());
}
