//! HS-OFDM reflectometry with TDMA, FDMA and CDMA multiple access.
//!
//! All three baselines estimate the channel in the frequency domain: the
//! received spectrum is divided bin by bin by the known BPSK pilots and the
//! inverse FFT of the ratio, cut to the measurement window, is the
//! reflectogram. Bins without a pilot are left out of the estimate.
//!
//! * TDMA: modem `s mod n_plm` is alone on the line during symbol `s`.
//! * FDMA: bins `1..=N` are dealt round-robin into `n_plm` interleaved
//!   combs; modem `u` uses comb `(u + s) mod n_plm` during symbol `s`. The
//!   DC bin is used only when a single modem owns the whole band.
//! * CDMA: every modem repeats its frame over a block of `n_plm` symbols
//!   with the signs of its Walsh-Hadamard row; despreading correlates the
//!   block with that row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::channel::SensingScenario;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::scheme::Scheme;
use crate::spectrum::{fft_real, ifft, split_real};
use crate::tdr::{
    average_measurements, check_scenario, received_frame, run_campaign, validate_configuration, CampaignResult,
    Measurement, MeasurementKind, SystemParams,
};

const HERMITIAN_TOL: f64 = 1e-12;
const PILOT_SEED: u64 = 0x0fd3_7a11;

/// Time-domain HS-OFDM frame together with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct HsOfdmFrame {
    pub spectrum: Vec<Complex64>,
    pub time_body: Vec<f64>,
    pub cp_length: usize,
}

impl HsOfdmFrame {
    pub fn new(spectrum: Vec<Complex64>, cp_length: usize) -> Result<Self> {
        check_hermitian(&spectrum)?;
        let (time_body, _) = split_real(&ifft(&spectrum));
        if cp_length >= spectrum.len() {
            return Err(Error::CyclicPrefixTooLong {
                cp: cp_length,
                frame_size: spectrum.len(),
            });
        }
        Ok(Self {
            spectrum,
            time_body,
            cp_length,
        })
    }

    /// Body with its cyclic prefix.
    pub fn samples(&self) -> Vec<f64> {
        let n = self.time_body.len();
        let mut out = Vec::with_capacity(n + self.cp_length);
        out.extend_from_slice(&self.time_body[n - self.cp_length..]);
        out.extend_from_slice(&self.time_body);
        out
    }
}

/// Fails at the first bin that breaks `X[L-k] = conj(X[k])` or the realness
/// of the DC and Nyquist bins.
pub fn check_hermitian(spectrum: &[Complex64]) -> Result<()> {
    let n = spectrum.len();
    if n == 0 {
        return Err(Error::InvalidParams("empty spectrum".into()));
    }
    let scale = spectrum.iter().fold(1.0_f64, |m, v| m.max(v.norm()));
    let tol = HERMITIAN_TOL * scale;
    if spectrum[0].im.abs() > tol {
        return Err(Error::NotHermitian(0));
    }
    if n.is_multiple_of(2) && spectrum[n / 2].im.abs() > tol {
        return Err(Error::NotHermitian(n / 2));
    }
    for k in 1..n {
        if (spectrum[n - k] - spectrum[k].conj()).norm() > tol {
            return Err(Error::NotHermitian(k));
        }
    }
    Ok(())
}

/// Real frame with cyclic prefix from a Hermitian-symmetric pilot spectrum.
pub fn hsofdm_modulate(pilot_spectrum: &[Complex64], cp_length: usize) -> Result<Vec<f64>> {
    HsOfdmFrame::new(pilot_spectrum.to_vec(), cp_length).map(|f| f.samples())
}

/// Removes the cyclic prefix and returns the per-bin received values.
pub fn hsofdm_demodulate(received: &[f64], cp_length: usize) -> Result<Vec<Complex64>> {
    if received.len() <= cp_length {
        return Err(Error::LengthMismatch {
            expected: cp_length + 1,
            actual: received.len(),
        });
    }
    Ok(fft_real(&received[cp_length..]))
}

/// Per-bin division by the pilots; bins whose pilot is zero stay zero.
pub fn estimate_channel(received: &[Complex64], pilots: &[Complex64]) -> Result<Vec<Complex64>> {
    if received.len() != pilots.len() {
        return Err(Error::LengthMismatch {
            expected: pilots.len(),
            actual: received.len(),
        });
    }
    Ok(received
        .iter()
        .zip(pilots)
        .map(|(y, p)| if p.norm_sqr() == 0.0 { Complex64::new(0.0, 0.0) } else { y / p })
        .collect())
}

/// First `window_len` samples of `gain * IFFT(estimate)`.
pub fn reflectogram(estimate: &[Complex64], window_len: usize, gain: f64) -> Vec<f64> {
    ifft(estimate)
        .into_iter()
        .take(window_len)
        .map(|v| v.re * gain)
        .collect()
}

/// Reflectogram from a received frame and known pilots.
pub fn hsofdm_reflectogram(received: &[f64], pilots: &[Complex64], cp_length: usize, window_len: usize) -> Result<Vec<f64>> {
    let y = hsofdm_demodulate(received, cp_length)?;
    Ok(reflectogram(&estimate_channel(&y, pilots)?, window_len, 1.0))
}

/// BPSK pilot spectrum of amplitude `amplitude` on `bins` (each in `0..=N`,
/// mirrored onto the negative frequencies).
pub fn bpsk_pilots(frame_size: usize, bins: &[usize], amplitude: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::new(0.0, 0.0); frame_size];
    // One sign per possible bin, so a bin keeps its sign across combs.
    let signs: Vec<f64> = (0..=frame_size / 2)
        .map(|_| if rng.gen::<bool>() { amplitude } else { -amplitude })
        .collect();
    for &b in bins {
        spec[b] = Complex64::new(signs[b], 0.0);
        spec[(frame_size - b) % frame_size] = spec[b];
    }
    spec
}

/// Pilot amplitude per active bin giving the configured PSD.
pub fn pilot_bin_amplitude(params: &SystemParams) -> f64 {
    (params.tx_power_watts() * params.frame_size as f64).sqrt()
}

pub fn modem_pilot_seed(modem: usize) -> u64 {
    PILOT_SEED.wrapping_add(modem as u64)
}

/// Modem transmitting during `symbol` under round-robin TDMA.
pub fn schedule_tdma(n_plm: usize, symbol: usize) -> usize {
    symbol % n_plm.max(1)
}

/// Comb index used by `modem` during `symbol`.
pub fn fdma_comb_index(n_plm: usize, modem: usize, symbol: usize) -> usize {
    (modem + symbol) % n_plm
}

/// Bins of comb `comb`: every `b` in `1..=N` with `(b - 1) mod n_plm = comb`,
/// plus DC when there is a single comb.
pub fn fdma_comb_bins(frame_size: usize, n_plm: usize, comb: usize) -> Vec<usize> {
    let half = frame_size / 2;
    let mut bins: Vec<usize> = (1..=half).filter(|b| (b - 1) % n_plm == comb).collect();
    if n_plm == 1 {
        bins.insert(0, 0);
    }
    bins
}

/// Active bins of `modem` during `symbol`.
pub fn allocate_fdma(params: &SystemParams, modem: usize, symbol: usize) -> Result<Vec<usize>> {
    let max = params.frame_size / 2 - 1;
    if params.n_plm > max {
        return Err(Error::TooManyModems {
            n_plm: params.n_plm,
            max,
        });
    }
    if modem >= params.n_plm {
        return Err(Error::ModemOutOfRange {
            index: modem,
            n_plm: params.n_plm,
        });
    }
    Ok(fdma_comb_bins(
        params.frame_size,
        params.n_plm,
        fdma_comb_index(params.n_plm, modem, symbol),
    ))
}

/// Sylvester-ordered Walsh-Hadamard matrix of order `n` (a power of two).
pub fn walsh_hadamard(n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut h = vec![vec![1.0]];
    while h.len() < n {
        let m = h.len();
        let mut next = vec![vec![0.0; 2 * m]; 2 * m];
        for r in 0..m {
            for c in 0..m {
                next[r][c] = h[r][c];
                next[r][c + m] = h[r][c];
                next[r + m][c] = h[r][c];
                next[r + m][c + m] = -h[r][c];
            }
        }
        h = next;
    }
    Ok(h)
}

/// Spread frames: `out[s][u] = codes[u][s] * frames[u]` for one block.
pub fn spread_cdma(frames: &[Vec<f64>], codes: &[Vec<f64>]) -> Result<Vec<Vec<Vec<f64>>>> {
    if codes.len() != frames.len() {
        return Err(Error::LengthMismatch {
            expected: frames.len(),
            actual: codes.len(),
        });
    }
    let block = codes.first().map_or(0, Vec::len);
    Ok((0..block)
        .map(|s| {
            frames
                .iter()
                .zip(codes)
                .map(|(f, c)| f.iter().map(|v| v * c[s]).collect())
                .collect()
        })
        .collect())
}

/// `(1/n) sum_s code[s] * received[s]`.
pub fn despread_cdma(received: &[Vec<f64>], code: &[f64]) -> Result<Vec<f64>> {
    if received.len() != code.len() || received.is_empty() {
        return Err(Error::LengthMismatch {
            expected: code.len(),
            actual: received.len(),
        });
    }
    let len = received[0].len();
    let mut out = vec![0.0; len];
    for (r, &c) in received.iter().zip(code) {
        if r.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: r.len(),
            });
        }
        for (o, v) in out.iter_mut().zip(r) {
            *o += c * v;
        }
    }
    let n = code.len() as f64;
    out.iter_mut().for_each(|v| *v /= n);
    Ok(out)
}

/// A scheme checked against a modem count.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessScheme {
    pub kind: Scheme,
    pub n_plm: usize,
    /// Walsh-Hadamard rows, CDMA only.
    pub code_matrix: Option<Vec<Vec<f64>>>,
}

impl AccessScheme {
    pub fn new(kind: Scheme, params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let n_plm = params.n_plm;
        let code_matrix = match kind {
            Scheme::Cdma => Some(walsh_hadamard(n_plm)?),
            Scheme::Fdma => {
                let max = params.frame_size / 2 - 1;
                if n_plm > max {
                    return Err(Error::TooManyModems { n_plm, max });
                }
                None
            }
            Scheme::Ocdm | Scheme::Tdma => None,
        };
        Ok(Self {
            kind,
            n_plm,
            code_matrix,
        })
    }
}

fn full_band_bins(frame_size: usize) -> Vec<usize> {
    (0..=frame_size / 2).collect()
}

fn measurement(observer: usize, injector: usize, symbol_index: usize, window: Vec<f64>) -> Measurement {
    Measurement {
        observer,
        injector,
        kind: MeasurementKind::for_pair(observer, injector),
        window_index: 0,
        symbol_index,
        window,
    }
}

/// Runs a campaign under `scheme`, with the same contract as
/// [`run_campaign`] (which handles [`Scheme::Ocdm`]).
pub fn run_campaign_baseline(
    scheme: Scheme,
    params: &SystemParams,
    scenario: &SensingScenario,
    noise: &NoiseModel,
    n_symbols: usize,
    seed: u64,
) -> Result<CampaignResult> {
    if scheme == Scheme::Ocdm {
        return run_campaign(params, scenario, noise, n_symbols, seed);
    }
    check_scenario(params, scenario)?;
    let access = AccessScheme::new(scheme, params)?;
    let report = validate_configuration(params, scenario);
    for w in report.warnings() {
        log::warn!("{}: {}", w.name, w.detail);
    }
    let (measurements, reassembled) = match scheme {
        Scheme::Tdma => (run_tdma(params, scenario, noise, n_symbols, seed)?, Vec::new()),
        Scheme::Fdma => run_fdma(params, scenario, noise, n_symbols, seed)?,
        Scheme::Cdma => (
            run_cdma(
                params,
                scenario,
                noise,
                n_symbols,
                seed,
                access.code_matrix.as_deref().unwrap_or_default(),
            )?,
            Vec::new(),
        ),
        Scheme::Ocdm => unreachable!(),
    };
    let averages = average_measurements(&measurements);
    Ok(CampaignResult {
        measurements,
        averages,
        reassembled,
        report,
    })
}

fn full_band_pilots(params: &SystemParams) -> Vec<Vec<Complex64>> {
    let amp = pilot_bin_amplitude(params);
    let bins = full_band_bins(params.frame_size);
    (0..params.n_plm)
        .map(|u| bpsk_pilots(params.frame_size, &bins, amp, modem_pilot_seed(u)))
        .collect()
}

fn run_tdma(
    params: &SystemParams,
    scenario: &SensingScenario,
    noise: &NoiseModel,
    n_symbols: usize,
    seed: u64,
) -> Result<Vec<Measurement>> {
    let pilots = full_band_pilots(params);
    let frames: Vec<Vec<f64>> = pilots
        .iter()
        .map(|p| hsofdm_modulate(p, params.cp_length))
        .collect::<Result<_>>()?;
    let l_rho = params.window_len();
    let per_symbol: Vec<Vec<Measurement>> = (0..n_symbols)
        .into_par_iter()
        .map(|s| {
            let active = schedule_tdma(params.n_plm, s);
            let tx = [(active, frames[active].as_slice())];
            (0..params.n_plm)
                .map(|i| {
                    let rx = received_frame(&tx, scenario, i, noise, params, seed, s)?;
                    let w = hsofdm_reflectogram(&rx, &pilots[active], params.cp_length, l_rho)?;
                    Ok(measurement(i, active, s, w))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_symbol.into_iter().flatten().collect())
}

fn run_fdma(
    params: &SystemParams,
    scenario: &SensingScenario,
    noise: &NoiseModel,
    n_symbols: usize,
    seed: u64,
) -> Result<(Vec<Measurement>, Vec<Measurement>)> {
    let n = params.n_plm;
    let amp = pilot_bin_amplitude(params);
    let l_rho = params.window_len();
    // Pilots and frames per comb; the BPSK signs belong to the modem.
    let pilots: Vec<Vec<Vec<Complex64>>> = (0..n)
        .map(|u| {
            (0..n)
                .map(|c| bpsk_pilots(params.frame_size, &fdma_comb_bins(params.frame_size, n, c), amp, modem_pilot_seed(u)))
                .collect()
        })
        .collect();
    let frames: Vec<Vec<Vec<f64>>> = pilots
        .iter()
        .map(|per_comb| per_comb.iter().map(|p| hsofdm_modulate(p, params.cp_length)).collect())
        .collect::<Result<_>>()?;

    // Per symbol: per observer, per injector, the comb-restricted estimate.
    type SymbolEstimates = Vec<Vec<Vec<Complex64>>>;
    let per_symbol: Vec<(Vec<Measurement>, SymbolEstimates)> = (0..n_symbols)
        .into_par_iter()
        .map(|s| {
            let tx: Vec<(usize, &[f64])> = (0..n)
                .map(|u| (u, frames[u][fdma_comb_index(n, u, s)].as_slice()))
                .collect();
            let mut out = Vec::with_capacity(n * n);
            let mut est = Vec::with_capacity(n);
            for i in 0..n {
                let rx = received_frame(&tx, scenario, i, noise, params, seed, s)?;
                let y = hsofdm_demodulate(&rx, params.cp_length)?;
                let mut row = Vec::with_capacity(n);
                for u in 0..n {
                    let h = estimate_channel(&y, &pilots[u][fdma_comb_index(n, u, s)])?;
                    out.push(measurement(i, u, s, reflectogram(&h, l_rho, n as f64)));
                    row.push(h);
                }
                est.push(row);
            }
            Ok((out, est))
        })
        .collect::<Result<_>>()?;

    let mut measurements = Vec::with_capacity(n_symbols * n * n);
    let mut estimates = Vec::with_capacity(n_symbols);
    for (m, e) in per_symbol {
        measurements.extend(m);
        estimates.push(e);
    }
    // Full-band reassembly over each complete hop cycle; combs are disjoint
    // so the masked estimates simply add.
    let mut reassembled = Vec::new();
    for cycle in estimates.chunks_exact(n).enumerate() {
        let (c, block) = cycle;
        for i in 0..n {
            for u in 0..n {
                let mut full = vec![Complex64::new(0.0, 0.0); params.frame_size];
                for sym in block {
                    for (f, v) in full.iter_mut().zip(&sym[i][u]) {
                        *f += v;
                    }
                }
                reassembled.push(measurement(i, u, c * n + n - 1, reflectogram(&full, l_rho, 1.0)));
            }
        }
    }
    Ok((measurements, reassembled))
}

fn run_cdma(
    params: &SystemParams,
    scenario: &SensingScenario,
    noise: &NoiseModel,
    n_symbols: usize,
    seed: u64,
    codes: &[Vec<f64>],
) -> Result<Vec<Measurement>> {
    let n = params.n_plm;
    let pilots = full_band_pilots(params);
    let frames: Vec<Vec<f64>> = pilots
        .iter()
        .map(|p| hsofdm_modulate(p, params.cp_length))
        .collect::<Result<_>>()?;
    let spread = spread_cdma(&frames, codes)?;
    let l_rho = params.window_len();
    let blocks = n_symbols / n;
    let per_block: Vec<Vec<Measurement>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut out = Vec::with_capacity(n * n);
            for i in 0..n {
                let rx: Vec<Vec<f64>> = (0..n)
                    .map(|k| {
                        let tx: Vec<(usize, &[f64])> = (0..n).map(|u| (u, spread[k][u].as_slice())).collect();
                        received_frame(&tx, scenario, i, noise, params, seed, b * n + k)
                    })
                    .collect::<Result<_>>()?;
                for u in 0..n {
                    let z = despread_cdma(&rx, &codes[u])?;
                    let w = hsofdm_reflectogram(&z, &pilots[u], params.cp_length, l_rho)?;
                    out.push(measurement(i, u, b * n + n - 1, w));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_block.into_iter().flatten().collect())
}
