//! Strict JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use plsense_core::channel::{LV_PHASE_VELOCITY, MV_PHASE_VELOCITY};
use plsense_core::{
    build_two_segment_scenario, synthetic_scenario, taps_to_impulse, AccessScheme, ChannelTaps, ImpulseResponse,
    NoiseModel, Scheme, SensingScenario, SystemParams, Tap, TwoSegmentLine,
};

use crate::error::CliError;

/// Channels of one (observer, injector) pair given as echo taps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairTaps {
    pub observer: usize,
    pub injector: usize,
    pub taps: Vec<Tap>,
}

fn lv() -> f64 {
    LV_PHASE_VELOCITY
}

fn one_second() -> f64 {
    1.0
}

/// How the channels between the modems are obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    /// Built-in deterministic scenario with equal-energy reflectograms.
    Synthetic {
        #[serde(default = "lv")]
        phase_velocity: f64,
    },
    /// Tap lists per pair; pairs left out have no echo.
    Explicit {
        #[serde(default = "lv")]
        phase_velocity: f64,
        #[serde(default = "one_second")]
        coherence_time: f64,
        channels: Vec<PairTaps>,
    },
    /// Two modems at the ends of a two-segment line.
    TwoSegment {
        line: TwoSegmentLine,
        #[serde(default = "one_second")]
        coherence_time: f64,
    },
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::Synthetic { phase_velocity: lv() }
    }
}

/// A named phase velocity for the distance sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityPreset {
    pub name: String,
    pub phase_velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepAxes {
    pub bandwidth_hz: Vec<f64>,
    pub cp_length: Vec<usize>,
    pub n_plm: Vec<usize>,
    pub velocities: Vec<VelocityPreset>,
}

impl Default for SweepAxes {
    fn default() -> Self {
        Self {
            bandwidth_hz: vec![10e3, 50e3, 100e3, 200e3, 300e3, 400e3, 500e3],
            cp_length: vec![30, 52],
            n_plm: (1..=16).collect(),
            velocities: vec![
                VelocityPreset {
                    name: "lv".into(),
                    phase_velocity: LV_PHASE_VELOCITY,
                },
                VelocityPreset {
                    name: "mv".into(),
                    phase_velocity: MV_PHASE_VELOCITY,
                },
            ],
        }
    }
}

fn default_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn default_symbols() -> usize {
    10
}

fn default_trials() -> usize {
    500
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default)]
    pub system: SystemParams,
    #[serde(default)]
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub sweep: SweepAxes,
    /// Symbols per `simulate` campaign.
    #[serde(default = "default_symbols")]
    pub n_symbols: usize,
    /// Monte-Carlo trials for `compare-sinr`.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Not part of the config hash, so outputs do not depend on where they go.
    #[serde(default = "default_out", skip_serializing)]
    pub output_dir: PathBuf,
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {msg}"))
}

impl ExperimentConfig {
    /// Checks every cross-field invariant; errors name the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        let sys = &self.system;
        sys.validate().map_err(|e| invalid("system", e))?;
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "at least one scheme is required"));
        }
        for (k, s) in self.schemes.iter().enumerate() {
            AccessScheme::new(*s, sys).map_err(|e| invalid(&format!("schemes[{k}]"), format!("{s}: {e}")))?;
        }
        self.noise
            .validate(sys.sample_rate_hz / 2.0)
            .map_err(|e| invalid("noise", e))?;
        if self.n_symbols == 0 {
            return Err(invalid("n_symbols", "must be at least 1"));
        }
        if self.trials < 2 {
            return Err(invalid("trials", "must be at least 2"));
        }
        let sw = &self.sweep;
        for (name, empty) in [
            ("sweep.bandwidth_hz", sw.bandwidth_hz.is_empty()),
            ("sweep.cp_length", sw.cp_length.is_empty()),
            ("sweep.n_plm", sw.n_plm.is_empty()),
            ("sweep.velocities", sw.velocities.is_empty()),
        ] {
            if empty {
                return Err(invalid(name, "sweep axis is empty"));
            }
        }
        for (k, b) in sw.bandwidth_hz.iter().enumerate() {
            if !(*b > 0.0) {
                return Err(invalid(&format!("sweep.bandwidth_hz[{k}]"), format!("{b} is not positive")));
            }
        }
        for (k, cp) in sw.cp_length.iter().enumerate() {
            if *cp >= sys.frame_size {
                return Err(invalid(
                    &format!("sweep.cp_length[{k}]"),
                    format!("{cp} is not shorter than the frame ({})", sys.frame_size),
                ));
            }
        }
        for (k, n) in sw.n_plm.iter().enumerate() {
            if *n == 0 {
                return Err(invalid(&format!("sweep.n_plm[{k}]"), "must be at least 1"));
            }
        }
        for (k, v) in sw.velocities.iter().enumerate() {
            if !(v.phase_velocity > 0.0) {
                return Err(invalid(
                    &format!("sweep.velocities[{k}].phase_velocity"),
                    format!("{} is not positive", v.phase_velocity),
                ));
            }
        }
        match &self.scenario {
            ScenarioSpec::Explicit { channels, .. } => {
                let mut seen = Vec::new();
                for (k, pair) in channels.iter().enumerate() {
                    for (field, idx) in [("observer", pair.observer), ("injector", pair.injector)] {
                        if idx >= sys.n_plm {
                            return Err(invalid(
                                &format!("scenario.channels[{k}].{field}"),
                                format!("modem {idx} does not exist (n_plm = {})", sys.n_plm),
                            ));
                        }
                    }
                    if seen.contains(&(pair.observer, pair.injector)) {
                        return Err(invalid(
                            &format!("scenario.channels[{k}]"),
                            format!("pair ({}, {}) listed twice", pair.observer, pair.injector),
                        ));
                    }
                    seen.push((pair.observer, pair.injector));
                }
            }
            ScenarioSpec::TwoSegment { .. } if sys.n_plm != 2 => {
                return Err(invalid(
                    "system.n_plm",
                    format!("a two-segment line has 2 modems, got {}", sys.n_plm),
                ));
            }
            _ => {}
        }
        self.build_scenario()?;
        Ok(())
    }

    pub fn build_scenario(&self) -> Result<SensingScenario, CliError> {
        let sys = &self.system;
        let fs = sys.sample_rate_hz;
        match &self.scenario {
            ScenarioSpec::Synthetic { phase_velocity } => {
                synthetic_scenario(sys.n_plm, fs, *phase_velocity).map_err(|e| invalid("scenario", e))
            }
            ScenarioSpec::Explicit {
                phase_velocity,
                coherence_time,
                channels,
            } => {
                let n = sys.n_plm;
                let mut grid = vec![vec![ImpulseResponse::zero(1.0 / fs); n]; n];
                for (k, pair) in channels.iter().enumerate() {
                    let key = format!("scenario.channels[{k}].taps");
                    let taps = ChannelTaps::new(pair.taps.clone()).map_err(|e| invalid(&key, e))?;
                    grid[pair.observer][pair.injector] = taps_to_impulse(&taps, fs).map_err(|e| invalid(&key, e))?;
                }
                SensingScenario::new(grid, *phase_velocity, *coherence_time).map_err(|e| invalid("scenario", e))
            }
            ScenarioSpec::TwoSegment { line, coherence_time } => {
                build_two_segment_scenario(line, fs, *coherence_time).map_err(|e| invalid("scenario.line", e))
            }
        }
    }

    /// SHA-256 of the canonical JSON form (output directory excluded).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!("{path}: {}", e.into_inner()))
    })?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text)
}
