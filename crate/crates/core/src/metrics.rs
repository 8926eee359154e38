//! Closed-form performance figures and estimate-quality metrics.

use std::fmt;

use rustfft::num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::channel::ImpulseResponse;
use crate::error::{Error, Result};
use crate::scheme::Scheme;
use crate::spectrum::{energy, fft_real, ifft};
use crate::tdr::{MeasurementKind, SystemParams};

/// A decibel value with explicit infinite sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decibels {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl Decibels {
    /// `10 log10(num / den)` with sentinels for zero numerator or denominator.
    pub fn ratio(num: f64, den: f64, zero_tol: f64) -> Self {
        if den <= zero_tol {
            Decibels::PosInfinity
        } else if num <= zero_tol {
            Decibels::NegInfinity
        } else {
            Decibels::Finite(10.0 * (num / den).log10())
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Decibels::Finite(v) => v,
            Decibels::PosInfinity => f64::INFINITY,
            Decibels::NegInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Decibels::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Decibels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decibels::Finite(v) => write!(f, "{v}"),
            Decibels::PosInfinity => f.write_str("inf"),
            Decibels::NegInfinity => f.write_str("-inf"),
        }
    }
}

impl Serialize for Decibels {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Range resolution `v_p / (4B)` in meters.
pub fn range_resolution(phase_velocity: f64, bandwidth_hz: f64) -> f64 {
    phase_velocity / (4.0 * bandwidth_hz)
}

/// Maximum unambiguous range in meters.
///
/// Reflectograms: `(v_p T_s / 2) min(L_rho, L_cp)`; transferograms see a
/// one-way trip and get twice that.
pub fn max_unambiguous_range(
    phase_velocity: f64,
    sample_rate_hz: f64,
    window_len: usize,
    cp_length: usize,
    kind: MeasurementKind,
) -> f64 {
    let span = window_len.min(cp_length) as f64;
    let one_way = phase_velocity / sample_rate_hz * span;
    match kind {
        MeasurementKind::Reflectogram => one_way / 2.0,
        MeasurementKind::Transferogram => one_way,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub scheme: Scheme,
    pub n_plm: usize,
    pub symbol_duration: f64,
    /// Reflectograms per second per modem.
    pub n_rho: f64,
    /// Transferograms per second per modem.
    pub n_tau: f64,
    pub n_meas: f64,
}

/// Measurements per second per modem.
///
/// OCDM and FDMA deliver one estimate per modem pair every symbol; TDMA
/// (time slots) and CDMA (spreading blocks) need `n_plm` symbols for that.
pub fn measurement_rates(scheme: Scheme, params: &SystemParams) -> RateReport {
    let t_symb = params.symbol_duration();
    let n = params.n_plm as f64;
    let per_symbol = match scheme {
        Scheme::Ocdm | Scheme::Fdma => 1.0 / t_symb,
        Scheme::Tdma | Scheme::Cdma => 1.0 / (n * t_symb),
    };
    let n_rho = per_symbol;
    let n_tau = (n - 1.0) * per_symbol;
    RateReport {
        scheme,
        n_plm: params.n_plm,
        symbol_duration: t_symb,
        n_rho,
        n_tau,
        n_meas: n_rho + n_tau,
    }
}

/// Error norms below this count as a perfect estimate.
pub const SINR_ZERO_ERROR: f64 = 1e-15;

/// SINR of a window against the true channel, zero-padded to the window.
pub fn estimate_sinr(window: &[f64], truth: &ImpulseResponse) -> Result<Decibels> {
    sinr_against(window, &truth.zero_padded(window.len()))
}

/// SINR of `estimate` against an explicit reference of the same length.
pub fn sinr_against(estimate: &[f64], reference: &[f64]) -> Result<Decibels> {
    if estimate.len() != reference.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: estimate.len(),
        });
    }
    let signal = energy(reference);
    if signal == 0.0 {
        return Err(Error::ZeroTruth);
    }
    let err: f64 = estimate
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if err.sqrt() < SINR_ZERO_ERROR {
        return Ok(Decibels::PosInfinity);
    }
    Ok(Decibels::Finite(10.0 * (signal / err).log10()))
}

/// Peak and integrated sidelobe ratios `(PSLR, ISLR)` in dB.
///
/// The main lobe is the single largest-magnitude sample.
pub fn sidelobe_metrics(window: &[f64]) -> Result<(Decibels, Decibels)> {
    let (peak_idx, peak) = window
        .iter()
        .map(|v| v * v)
        .enumerate()
        .fold((0, 0.0), |best, (i, p)| if p > best.1 { (i, p) } else { best });
    if peak == 0.0 {
        return Err(Error::ZeroWindow);
    }
    let side = window
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != peak_idx)
        .map(|(_, v)| v * v);
    let (max_side, total_side) = side.fold((0.0_f64, 0.0), |(m, t), p| (m.max(p), t + p));
    let db = |x: f64| {
        if x == 0.0 {
            Decibels::NegInfinity
        } else {
            Decibels::Finite(10.0 * (x / peak).log10())
        }
    };
    Ok((db(max_side), db(total_side)))
}

/// Band-limited interpolation by zero-stuffing the spectrum.
///
/// Output has `window.len() * factor` samples; every `factor`-th sample is
/// an original one. For even lengths the Nyquist bin is split evenly between
/// its two images so the result stays real.
pub fn sinc_interpolate(window: &[f64], factor: usize) -> Result<Vec<f64>> {
    if factor < 2 {
        return Err(Error::InvalidFactor(factor));
    }
    let n = window.len();
    if n == 0 {
        return Err(Error::InvalidParams("empty window".into()));
    }
    let spec = fft_real(window);
    let m = n * factor;
    let mut up = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    if n.is_multiple_of(2) {
        up[..half].copy_from_slice(&spec[..half]);
        for k in 1..half {
            up[m - k] = spec[n - k];
        }
        let nyq = spec[half] * 0.5;
        up[half] = nyq;
        up[m - half] = nyq;
    } else {
        up[..=half].copy_from_slice(&spec[..=half]);
        for k in 1..=half {
            up[m - k] = spec[n - k];
        }
    }
    Ok(ifft(&up).into_iter().map(|v| v.re * factor as f64).collect())
}

/// Per-modem SINR summary over Monte-Carlo trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrReport {
    pub scheme: Scheme,
    pub modem: usize,
    pub trials: usize,
    /// Mean of the per-trial SINR in dB.
    pub mean_db: f64,
    /// Half-width of the 95% confidence interval of `mean_db`.
    pub ci95_db: f64,
    /// Mean signal energy (linear).
    pub signal: f64,
    /// Mean interference-plus-noise energy (linear).
    pub impairment: f64,
    /// `10 log10(signal / impairment)`.
    pub pooled_db: f64,
}
