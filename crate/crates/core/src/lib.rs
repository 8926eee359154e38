//! Distributed power line sensing by time-domain reflectometry over
//! orthogonal chirp division multiplexing (OCDM), with HS-OFDM
//! TDMA/FDMA/CDMA baselines.
//!
//! * [`fresnel`]: the real, baseband modified discrete Fresnel transform.
//! * [`channel`] and [`noise`]: echo channels, scenarios and colored noise.
//! * [`tdr`]: the OCDM reflectometry chain and subchirp multiple access.
//! * [`baselines`]: HS-OFDM reflectometry with TDMA, FDMA and CDMA.
//! * [`metrics`]: resolution, range, rates, SINR and sidelobe figures.
//! * [`sinr`]: Monte-Carlo SINR comparison across schemes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod channel;
pub mod error;
pub mod fresnel;
pub mod metrics;
pub mod noise;
pub mod scheme;
pub mod sinr;
pub mod spectrum;
pub mod tdr;

pub use channel::{
    apply_channel, build_two_segment_scenario, synthetic_scenario, phase_velocity, taps_to_impulse, ChannelTaps, ImpulseResponse,
    SensingScenario, Tap, TwoSegmentLine,
};
pub use error::{Error, Result};
pub use fresnel::{build_fresnel_basis, dfnt_forward, dfnt_inverse, FresnelBasis, FresnelSequence, TimeSequence};
pub use metrics::{Decibels, RateReport, SinrReport};
pub use noise::{generate_noise, NoiseModel};
pub use scheme::Scheme;
pub use sinr::compare_sinr;
pub use baselines::{run_campaign_baseline, AccessScheme};
pub use tdr::{
    extract_measurements, make_pilot_frame, ocdm_demodulate, ocdm_modulate, run_campaign, validate_configuration,
    CampaignResult, Measurement, MeasurementKind, SystemParams,
};
