//! Monte-Carlo SINR of reflectograms under each access scheme.
//!
//! Every trial runs the shortest campaign that yields one reflectogram per
//! modem: a single symbol for OCDM and FDMA, one round of `n_plm` symbols
//! for TDMA and CDMA. Trial `t` uses the same derived seed for every scheme,
//! so all schemes see the same noise realizations symbol by symbol.
//!
//! The reference of each estimate is the same scheme's noiseless estimate.
//! For OCDM, TDMA and CDMA that is the true channel; FDMA only observes one
//! comb per symbol, so its reference is the band-limited channel.

use rayon::prelude::*;

use crate::baselines::run_campaign_baseline;
use crate::channel::SensingScenario;
use crate::error::{Error, Result};
use crate::metrics::{sinr_against, Decibels, SinrReport};
use crate::noise::NoiseModel;
use crate::scheme::Scheme;
use crate::spectrum::energy;
use crate::tdr::{Measurement, SystemParams};

const Z95: f64 = 1.959_963_984_540_054;

/// Seed of trial `trial` derived from the study seed.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn symbols_per_trial(scheme: Scheme, n_plm: usize) -> usize {
    match scheme {
        Scheme::Ocdm | Scheme::Fdma => 1,
        Scheme::Tdma | Scheme::Cdma => n_plm,
    }
}

fn reflectograms(
    scheme: Scheme,
    params: &SystemParams,
    scenario: &SensingScenario,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = params.n_plm;
    let result = run_campaign_baseline(scheme, params, scenario, noise, symbols_per_trial(scheme, n), seed)?;
    let mut out = vec![Vec::new(); n];
    for Measurement {
        observer,
        injector,
        window,
        ..
    } in result.measurements
    {
        if observer == injector && out[observer].is_empty() {
            out[observer] = window;
        }
    }
    if out.iter().any(Vec::is_empty) {
        return Err(Error::InvalidParams("campaign produced no reflectogram".into()));
    }
    Ok(out)
}

/// Per-modem SINR statistics of `scheme` over `trials` noisy trials.
pub fn compare_sinr(
    scheme: Scheme,
    params: &SystemParams,
    scenario: &SensingScenario,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<Vec<SinrReport>> {
    if trials < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 trials, got {trials}")));
    }
    let reference = reflectograms(scheme, params, scenario, &NoiseModel::None, seed)?;
    // Per trial, per modem: (SINR dB, signal energy, error energy).
    let per_trial: Vec<Vec<(f64, f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let est = reflectograms(scheme, params, scenario, noise, trial_seed(seed, t))?;
            est.iter()
                .zip(&reference)
                .map(|(e, r)| {
                    let db = match sinr_against(e, r)? {
                        Decibels::Finite(v) => v,
                        other => {
                            return Err(Error::InvalidParams(format!(
                                "trial {t} gave a non-finite SINR ({other}); the noise model must be non-zero"
                            )))
                        }
                    };
                    let err: f64 = e.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum();
                    Ok((db, energy(r), err))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let n = trials as f64;
    Ok((0..params.n_plm)
        .map(|u| {
            let dbs: Vec<f64> = per_trial.iter().map(|row| row[u].0).collect();
            let mean = dbs.iter().sum::<f64>() / n;
            let var = dbs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
            let signal = per_trial.iter().map(|row| row[u].1).sum::<f64>() / n;
            let impairment = per_trial.iter().map(|row| row[u].2).sum::<f64>() / n;
            SinrReport {
                scheme,
                modem: u,
                trials,
                mean_db: mean,
                ci95_db: Z95 * (var / n).sqrt(),
                signal,
                impairment,
                pooled_db: 10.0 * (signal / impairment).log10(),
            }
        })
        .collect())
}
