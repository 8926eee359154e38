//! OCDM-based reflectometry: pilot design, modulation with cyclic prefix,
//! demodulation and extraction of reflectogram/transferogram windows.
//!
//! With `n_plm` modems the `2N` subchirps are split into windows of
//! `L_rho = 2N / n_plm`; modem `u` lights the single pilot at `u * L_rho`.
//! Because the modified DFnT turns the channel's circular convolution into
//! the same circular convolution in the Fresnel domain, window `u` of the
//! received Fresnel vector at modem `i` is `h_iu` (scaled by the pilot
//! amplitude) as long as every channel fits in one window.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, SensingScenario};
use crate::error::{Error, Result};
use crate::fresnel::{FresnelBasis, FresnelSequence};
use crate::noise::{dbm_to_watts, generate_noise_with, NoiseModel};

/// Physical-layer parameters shared by every scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    /// Occupied bandwidth `B` in Hz.
    pub bandwidth_hz: f64,
    /// Sampling frequency `F_s = 2B` in Hz.
    pub sample_rate_hz: f64,
    /// Frame size `2N`.
    pub frame_size: usize,
    pub cp_length: usize,
    pub n_plm: usize,
    /// One-sided transmit PSD in dBm/Hz.
    pub tx_psd_dbm_hz: f64,
    /// Pilot spacing for a single modem (defaults to the whole frame).
    /// Ignored when `n_plm > 1`, where the spacing is `2N / n_plm`.
    pub pilot_spacing: Option<usize>,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            bandwidth_hz: 500e3,
            sample_rate_hz: 1e6,
            frame_size: 256,
            cp_length: 30,
            n_plm: 1,
            tx_psd_dbm_hz: -40.0,
            pilot_spacing: None,
        }
    }
}

impl SystemParams {
    pub fn with_modems(mut self, n_plm: usize) -> Self {
        self.n_plm = n_plm;
        self
    }

    pub fn with_cp(mut self, cp_length: usize) -> Self {
        self.cp_length = cp_length;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::NonPositive {
                name: "bandwidth",
                value: self.bandwidth_hz,
            });
        }
        if (self.sample_rate_hz - 2.0 * self.bandwidth_hz).abs() > 1e-9 * self.sample_rate_hz {
            return Err(Error::InvalidParams(format!(
                "sample rate {} Hz must equal twice the bandwidth {} Hz",
                self.sample_rate_hz, self.bandwidth_hz
            )));
        }
        if self.frame_size < 4 || !self.frame_size.is_multiple_of(4) {
            return Err(Error::InvalidFrameSize(self.frame_size));
        }
        if self.n_plm == 0 {
            return Err(Error::InvalidParams("n_plm must be >= 1".into()));
        }
        if !self.frame_size.is_multiple_of(self.n_plm) {
            return Err(Error::Indivisible {
                frame_size: self.frame_size,
                divisor: self.n_plm,
            });
        }
        if self.cp_length >= self.frame_size {
            return Err(Error::CyclicPrefixTooLong {
                cp: self.cp_length,
                frame_size: self.frame_size,
            });
        }
        if self.n_plm == 1 {
            if let Some(s) = self.pilot_spacing {
                if s == 0 || !self.frame_size.is_multiple_of(s) {
                    return Err(Error::Indivisible {
                        frame_size: self.frame_size,
                        divisor: s,
                    });
                }
            }
        }
        if !self.tx_psd_dbm_hz.is_finite() {
            return Err(Error::InvalidParams("tx PSD must be finite".into()));
        }
        Ok(())
    }

    /// Measurement window length `L_rho`.
    pub fn window_len(&self) -> usize {
        if self.n_plm == 1 {
            self.pilot_spacing.unwrap_or(self.frame_size)
        } else {
            self.frame_size / self.n_plm
        }
    }

    /// Number of windows in one received Fresnel vector.
    pub fn windows_per_frame(&self) -> usize {
        self.frame_size / self.window_len()
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    /// Symbol duration `(2N + L_cp) / F_s` in seconds.
    pub fn symbol_duration(&self) -> f64 {
        (self.frame_size + self.cp_length) as f64 / self.sample_rate_hz
    }

    /// Mean-square transmit power in W: PSD times `F_s`.
    pub fn tx_power_watts(&self) -> f64 {
        dbm_to_watts(self.tx_psd_dbm_hz) * self.sample_rate_hz
    }

    fn pilots_per_frame(&self) -> usize {
        if self.n_plm == 1 {
            self.windows_per_frame()
        } else {
            1
        }
    }

    /// Amplitude of each Fresnel-domain pilot so the frame body carries
    /// [`Self::tx_power_watts`].
    pub fn pilot_amplitude(&self) -> f64 {
        (self.tx_power_watts() * self.frame_size as f64 / self.pilots_per_frame() as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    Reflectogram,
    Transferogram,
}

impl MeasurementKind {
    pub fn for_pair(observer: usize, injector: usize) -> Self {
        if observer == injector {
            MeasurementKind::Reflectogram
        } else {
            MeasurementKind::Transferogram
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasurementKind::Reflectogram => "reflectogram",
            MeasurementKind::Transferogram => "transferogram",
        }
    }
}

/// One `L_rho`-sample channel estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub observer: usize,
    pub injector: usize,
    pub kind: MeasurementKind,
    /// Position of the window inside the received frame.
    pub window_index: usize,
    pub symbol_index: usize,
    pub window: Vec<f64>,
}

/// Fresnel-domain pilot vector of modem `u`, scaled to the transmit PSD.
pub fn make_pilot_frame(params: &SystemParams, modem: usize) -> Result<FresnelSequence> {
    params.validate()?;
    if modem >= params.n_plm {
        return Err(Error::ModemOutOfRange {
            index: modem,
            n_plm: params.n_plm,
        });
    }
    let amp = params.pilot_amplitude();
    let l_rho = params.window_len();
    let mut x = vec![0.0; params.frame_size];
    if params.n_plm == 1 {
        for k in (0..params.frame_size).step_by(l_rho) {
            x[k] = amp;
        }
    } else {
        x[modem * l_rho] = amp;
    }
    Ok(FresnelSequence(x))
}

/// Inverse DFnT followed by an `L_cp`-sample cyclic prefix.
pub fn ocdm_modulate(basis: &FresnelBasis, xdot: &FresnelSequence, cp_length: usize) -> Result<Vec<f64>> {
    if cp_length >= basis.size() {
        return Err(Error::CyclicPrefixTooLong {
            cp: cp_length,
            frame_size: basis.size(),
        });
    }
    let body = basis.inverse(xdot)?;
    let mut out = Vec::with_capacity(basis.size() + cp_length);
    out.extend_from_slice(&body[basis.size() - cp_length..]);
    out.extend_from_slice(&body);
    Ok(out)
}

/// Drops the cyclic prefix and applies the forward DFnT.
pub fn ocdm_demodulate(basis: &FresnelBasis, received: &[f64], cp_length: usize) -> Result<FresnelSequence> {
    let expected = basis.size() + cp_length;
    if received.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: received.len(),
        });
    }
    basis.forward_slice(&received[cp_length..]).map(FresnelSequence)
}

/// Splits a received Fresnel vector into its measurement windows, normalized
/// by the pilot amplitude so each window estimates a channel directly.
pub fn extract_measurements(
    ydot: &FresnelSequence,
    params: &SystemParams,
    observer: usize,
    symbol_index: usize,
) -> Result<Vec<Measurement>> {
    if ydot.len() != params.frame_size {
        return Err(Error::LengthMismatch {
            expected: params.frame_size,
            actual: ydot.len(),
        });
    }
    let l_rho = params.window_len();
    let scale = 1.0 / params.pilot_amplitude();
    Ok(ydot
        .chunks(l_rho)
        .enumerate()
        .map(|(w, chunk)| {
            let injector = if params.n_plm == 1 { observer } else { w };
            Measurement {
                observer,
                injector,
                kind: MeasurementKind::for_pair(observer, injector),
                window_index: w,
                symbol_index,
                window: chunk.iter().map(|v| v * scale).collect(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate_configuration`]. Failures are warnings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const CHECK_WINDOW: &str = "window_interference";
pub const CHECK_ISI: &str = "inter_symbol_interference";
pub const CHECK_COHERENCE: &str = "coherence_time";

/// Window, ISI and coherence-time bounds for a channel length and `T_c`.
pub fn validate_bounds(params: &SystemParams, max_channel_len: usize, coherence_time: f64) -> ValidationReport {
    let l_rho = params.window_len();
    let t_symb = params.symbol_duration();
    let checks = vec![
        Check {
            name: CHECK_WINDOW,
            passed: l_rho >= max_channel_len,
            detail: format!("L_rho = {l_rho} must be >= L_h,max = {max_channel_len}"),
        },
        Check {
            name: CHECK_ISI,
            passed: params.cp_length + 1 >= max_channel_len,
            detail: format!(
                "L_cp = {} must be >= L_h,max - 1 = {}",
                params.cp_length,
                max_channel_len.saturating_sub(1)
            ),
        },
        Check {
            name: CHECK_COHERENCE,
            passed: t_symb <= coherence_time / 10.0,
            detail: format!(
                "T_symb = {t_symb:e} s must be <= T_c / 10 = {:e} s",
                coherence_time / 10.0
            ),
        },
    ];
    ValidationReport { checks }
}

pub fn validate_configuration(params: &SystemParams, scenario: &SensingScenario) -> ValidationReport {
    validate_bounds(params, scenario.max_channel_len(), scenario.coherence_time())
}

/// Per-(observer, injector) average over symbols (and, for a single modem,
/// over its repeated windows).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragedWindow {
    pub observer: usize,
    pub injector: usize,
    pub kind: MeasurementKind,
    pub count: usize,
    pub window: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub measurements: Vec<Measurement>,
    pub averages: Vec<AveragedWindow>,
    /// Extra estimates that need several symbols (FDMA hop-cycle reassembly).
    pub reassembled: Vec<Measurement>,
    pub report: ValidationReport,
}

/// Generator for the noise seen by `observer` during `symbol`.
///
/// Every scheme draws the same stream for the same (seed, symbol, observer),
/// so campaigns can be compared on common noise.
pub fn noise_rng(seed: u64, symbol: usize, observer: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((symbol as u64) << 16) | observer as u64);
    rng
}

pub(crate) fn check_scenario(params: &SystemParams, scenario: &SensingScenario) -> Result<()> {
    params.validate()?;
    if scenario.n_plm() != params.n_plm {
        return Err(Error::InvalidParams(format!(
            "scenario has {} modems but parameters specify {}",
            scenario.n_plm(),
            params.n_plm
        )));
    }
    Ok(())
}

pub(crate) fn received_frame(
    transmitted: &[(usize, &[f64])],
    scenario: &SensingScenario,
    observer: usize,
    noise: &NoiseModel,
    params: &SystemParams,
    seed: u64,
    symbol: usize,
) -> Result<Vec<f64>> {
    let len = params.frame_size + params.cp_length;
    let mut rx = if noise.is_none() {
        vec![0.0; len]
    } else {
        let mut rng = noise_rng(seed, symbol, observer);
        generate_noise_with(noise, params.sample_rate_hz, len, &mut rng)?
    };
    for &(u, frame) in transmitted {
        let h = scenario.channel(observer, u);
        if h.is_zero() {
            continue;
        }
        for (r, v) in rx.iter_mut().zip(apply_channel(frame, h)?) {
            *r += v;
        }
    }
    Ok(rx)
}

pub(crate) fn average_measurements(measurements: &[Measurement]) -> Vec<AveragedWindow> {
    let mut out: Vec<AveragedWindow> = Vec::new();
    for m in measurements {
        match out
            .iter_mut()
            .find(|a| a.observer == m.observer && a.injector == m.injector)
        {
            Some(a) => {
                a.count += 1;
                for (acc, v) in a.window.iter_mut().zip(&m.window) {
                    *acc += v;
                }
            }
            None => out.push(AveragedWindow {
                observer: m.observer,
                injector: m.injector,
                kind: m.kind,
                count: 1,
                window: m.window.clone(),
            }),
        }
    }
    for a in out.iter_mut() {
        let c = a.count as f64;
        a.window.iter_mut().for_each(|v| *v /= c);
    }
    out.sort_by_key(|a| (a.observer, a.injector));
    out
}

/// Runs `n_symbols` synchronous OCDM symbols in which every modem sends its
/// pilot frame and every modem observes the superposition.
pub fn run_campaign(
    params: &SystemParams,
    scenario: &SensingScenario,
    noise: &NoiseModel,
    n_symbols: usize,
    seed: u64,
) -> Result<CampaignResult> {
    check_scenario(params, scenario)?;
    let report = validate_configuration(params, scenario);
    for w in report.warnings() {
        log::warn!("{}: {}", w.name, w.detail);
    }
    let basis = FresnelBasis::new(params.frame_size)?;
    let frames: Vec<Vec<f64>> = (0..params.n_plm)
        .map(|u| ocdm_modulate(&basis, &make_pilot_frame(params, u)?, params.cp_length))
        .collect::<Result<_>>()?;
    let tx: Vec<(usize, &[f64])> = frames.iter().enumerate().map(|(u, f)| (u, f.as_slice())).collect();

    let per_symbol: Vec<Vec<Measurement>> = (0..n_symbols)
        .into_par_iter()
        .map(|s| {
            let mut out = Vec::new();
            for i in 0..params.n_plm {
                let rx = received_frame(&tx, scenario, i, noise, params, seed, s)?;
                let ydot = ocdm_demodulate(&basis, &rx, params.cp_length)?;
                out.extend(extract_measurements(&ydot, params, i, s)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let measurements: Vec<Measurement> = per_symbol.into_iter().flatten().collect();
    let averages = average_measurements(&measurements);
    Ok(CampaignResult {
        measurements,
        averages,
        reassembled: Vec::new(),
        report,
    })
}
