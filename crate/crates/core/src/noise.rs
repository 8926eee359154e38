//! Colored Gaussian background noise with a prescribed one-sided PSD.
//!
//! Samples are synthesized in the frequency domain: each bin gets an
//! independent Gaussian draw whose variance follows the PSD at the bin
//! frequency, the spectrum is made Hermitian and inverse-transformed.
//! Signals live on a 1-ohm reference, so power is mean square amplitude.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::ifft;

/// dBm (or dBm/Hz) to W (or W/Hz).
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Background noise PSD model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    /// `S(f) = a + b * exp(-c * f / 1e3)` dBm/Hz, `f` in Hz.
    ExponentialPsd {
        #[serde(default = "default_a")]
        a_dbm_hz: f64,
        #[serde(default = "default_b")]
        b_dbm_hz: f64,
        #[serde(default = "default_c")]
        c_per_khz: f64,
    },
    Flat {
        psd_dbm_hz: f64,
    },
    None,
}

fn default_a() -> f64 {
    -93.0
}
fn default_b() -> f64 {
    52.98
}
fn default_c() -> f64 {
    0.0032
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::ExponentialPsd {
            a_dbm_hz: default_a(),
            b_dbm_hz: default_b(),
            c_per_khz: default_c(),
        }
    }
}

impl NoiseModel {
    /// One-sided PSD in dBm/Hz, `None` for the noiseless model.
    pub fn psd_dbm_hz(&self, freq_hz: f64) -> Option<f64> {
        match *self {
            NoiseModel::ExponentialPsd {
                a_dbm_hz,
                b_dbm_hz,
                c_per_khz,
            } => Some(a_dbm_hz + b_dbm_hz * (-c_per_khz * freq_hz / 1e3).exp()),
            NoiseModel::Flat { psd_dbm_hz } => Some(psd_dbm_hz),
            NoiseModel::None => None,
        }
    }

    /// One-sided PSD in W/Hz (zero for the noiseless model).
    pub fn psd_watts_hz(&self, freq_hz: f64) -> f64 {
        self.psd_dbm_hz(freq_hz).map_or(0.0, dbm_to_watts)
    }

    pub fn is_none(&self) -> bool {
        matches!(self, NoiseModel::None)
    }

    /// Check that the PSD is finite over `[0, max_freq]`.
    pub fn validate(&self, max_freq: f64) -> Result<()> {
        for f in [0.0, max_freq] {
            if let Some(v) = self.psd_dbm_hz(f) {
                if !v.is_finite() {
                    return Err(Error::InvalidParams(format!(
                        "noise PSD is not finite at {f} Hz"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Noise sequence of `length` samples, deterministic in `seed`.
pub fn generate_noise(
    model: &NoiseModel,
    sample_rate: f64,
    length: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_noise_with(model, sample_rate, length, &mut rng)
}

/// Same as [`generate_noise`] but drawing from a caller-owned generator.
pub fn generate_noise_with<R: Rng + ?Sized>(
    model: &NoiseModel,
    sample_rate: f64,
    length: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(sample_rate > 0.0) {
        return Err(Error::NonPositive {
            name: "sample rate",
            value: sample_rate,
        });
    }
    if length == 0 || !length.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "noise length must be even and positive, got {length}"
        )));
    }
    if model.is_none() {
        return Ok(vec![0.0; length]);
    }
    let half = length / 2;
    let mut spec = vec![Complex64::new(0.0, 0.0); length];
    // E|X_k|^2 = L * fs * S(f_k) / 2 for every bin, so the one-sided
    // periodogram 2|X_k|^2 / (L fs) is unbiased for S(f_k).
    let base = length as f64 * sample_rate / 2.0;
    for k in 0..=half {
        let f = k as f64 * sample_rate / length as f64;
        let var = base * model.psd_watts_hz(f);
        if k == 0 || k == half {
            let g: f64 = rng.sample(StandardNormal);
            spec[k] = Complex64::new(g * var.sqrt(), 0.0);
        } else {
            let sd = (var / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            spec[k] = Complex64::new(re * sd, im * sd);
            spec[length - k] = spec[k].conj();
        }
    }
    Ok(ifft(&spec).into_iter().map(|v| v.re).collect())
}

/// Expected per-sample variance (W) of [`generate_noise`] output.
pub fn expected_noise_power(model: &NoiseModel, sample_rate: f64, length: usize) -> f64 {
    let half = length / 2;
    let sum: f64 = (0..length)
        .map(|k| {
            let kk = if k <= half { k } else { length - k };
            model.psd_watts_hz(kk as f64 * sample_rate / length as f64)
        })
        .sum();
    sum * sample_rate / (2.0 * length as f64)
}
