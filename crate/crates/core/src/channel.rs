//! Reflection and transmission channels: sparse echo taps, their sampled
//! impulse responses, multi-modem scenarios and frame convolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phase velocity preset of the low-voltage underground cable (NAYY150SE).
pub const LV_PHASE_VELOCITY: f64 = 1.50e8;
/// Phase velocity preset of the medium-voltage overhead cable.
pub const MV_PHASE_VELOCITY: f64 = 2.56e8;

/// Phase velocity `1/sqrt(L'C')` of a line with per-unit-length inductance
/// (H/m) and capacitance (F/m).
pub fn phase_velocity(inductance_per_m: f64, capacitance_per_m: f64) -> Result<f64> {
    if !(inductance_per_m > 0.0) {
        return Err(Error::NonPositive {
            name: "inductance per unit length",
            value: inductance_per_m,
        });
    }
    if !(capacitance_per_m > 0.0) {
        return Err(Error::NonPositive {
            name: "capacitance per unit length",
            value: capacitance_per_m,
        });
    }
    Ok(1.0 / (inductance_per_m * capacitance_per_m).sqrt())
}

/// One echo: arrival time in seconds and attenuation factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tap {
    pub delay: f64,
    pub amplitude: f64,
}

impl Tap {
    pub fn new(delay: f64, amplitude: f64) -> Self {
        Self { delay, amplitude }
    }
}

/// Sparse echo list, strictly increasing in delay.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTaps {
    taps: Vec<Tap>,
}

impl ChannelTaps {
    pub fn new(taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::EmptyTaps);
        }
        for (i, t) in taps.iter().enumerate() {
            if !(t.delay >= 0.0) || !t.delay.is_finite() {
                return Err(Error::InvalidTap(format!("tap {i}: delay {} is negative", t.delay)));
            }
            if !(t.amplitude.abs() <= 1.0) {
                return Err(Error::InvalidTap(format!(
                    "tap {i}: |amplitude| {} exceeds 1",
                    t.amplitude
                )));
            }
            if i > 0 && !(t.delay > taps[i - 1].delay) {
                return Err(Error::InvalidTap(format!(
                    "tap {i}: delays must be strictly increasing"
                )));
            }
        }
        Ok(Self { taps })
    }

    /// Sorts by delay and merges taps with identical delays before validating.
    pub fn from_unsorted(mut taps: Vec<Tap>) -> Result<Self> {
        taps.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        let mut merged: Vec<Tap> = Vec::with_capacity(taps.len());
        for t in taps {
            match merged.last_mut() {
                Some(last) if last.delay == t.delay => last.amplitude += t.amplitude,
                _ => merged.push(t),
            }
        }
        Self::new(merged)
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Sampled channel impulse response with trailing zeros trimmed.
///
/// The all-zero channel is represented by a single zero sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponse {
    h: Vec<f64>,
    sample_period: f64,
}

impl ImpulseResponse {
    pub fn new(mut h: Vec<f64>, sample_period: f64) -> Result<Self> {
        if !(sample_period > 0.0) {
            return Err(Error::NonPositive {
                name: "sample period",
                value: sample_period,
            });
        }
        while h.len() > 1 && *h.last().unwrap() == 0.0 {
            h.pop();
        }
        if h.is_empty() {
            h.push(0.0);
        }
        Ok(Self { h, sample_period })
    }

    pub fn zero(sample_period: f64) -> Self {
        Self {
            h: vec![0.0],
            sample_period,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().all(|&v| v == 0.0)
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    /// `h` zero-padded (or truncated) to `len` samples.
    pub fn zero_padded(&self, len: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        let n = self.h.len().min(len);
        v[..n].copy_from_slice(&self.h[..n]);
        v
    }
}

/// Places every tap on the nearest sample; coincident taps add up.
pub fn taps_to_impulse(taps: &ChannelTaps, sample_rate: f64) -> Result<ImpulseResponse> {
    if !(sample_rate > 0.0) {
        return Err(Error::NonPositive {
            name: "sample rate",
            value: sample_rate,
        });
    }
    if taps.is_empty() {
        return Err(Error::EmptyTaps);
    }
    let last = taps.taps().last().unwrap();
    let len = (last.delay * sample_rate).round() as usize + 1;
    let mut h = vec![0.0; len];
    for t in taps.taps() {
        h[(t.delay * sample_rate).round() as usize] += t.amplitude;
    }
    ImpulseResponse::new(h, 1.0 / sample_rate)
}

/// `n_plm x n_plm` grid of channels; entry `(i, j)` is injected by modem `j`
/// and received by modem `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingScenario {
    n_plm: usize,
    phase_velocity: f64,
    channels: Vec<Vec<ImpulseResponse>>,
    coherence_time: f64,
}

impl SensingScenario {
    pub fn new(
        channels: Vec<Vec<ImpulseResponse>>,
        phase_velocity: f64,
        coherence_time: f64,
    ) -> Result<Self> {
        let n_plm = channels.len();
        if n_plm == 0 {
            return Err(Error::InvalidParams("scenario has no modems".into()));
        }
        if let Some(i) = channels.iter().position(|row| row.len() != n_plm) {
            return Err(Error::InvalidParams(format!(
                "channel grid row {i} has {} entries, expected {n_plm}",
                channels[i].len()
            )));
        }
        if !(phase_velocity > 0.0) {
            return Err(Error::NonPositive {
                name: "phase velocity",
                value: phase_velocity,
            });
        }
        if !(coherence_time > 0.0) {
            return Err(Error::NonPositive {
                name: "coherence time",
                value: coherence_time,
            });
        }
        Ok(Self {
            n_plm,
            phase_velocity,
            channels,
            coherence_time,
        })
    }

    pub fn n_plm(&self) -> usize {
        self.n_plm
    }

    pub fn phase_velocity(&self) -> f64 {
        self.phase_velocity
    }

    pub fn coherence_time(&self) -> f64 {
        self.coherence_time
    }

    /// Channel from `injector` to `observer`.
    pub fn channel(&self, observer: usize, injector: usize) -> &ImpulseResponse {
        &self.channels[observer][injector]
    }

    pub fn channels(&self) -> &[Vec<ImpulseResponse>] {
        &self.channels
    }

    /// Longest channel over all pairs.
    pub fn max_channel_len(&self) -> usize {
        self.channels
            .iter()
            .flat_map(|row| row.iter().map(ImpulseResponse::len))
            .max()
            .unwrap_or(1)
    }

    /// Copy with every channel injected by `injector` replaced by zero.
    pub fn with_silenced_injector(&self, injector: usize) -> Self {
        let mut out = self.clone();
        for row in out.channels.iter_mut() {
            row[injector] = ImpulseResponse::zero(row[injector].sample_period());
        }
        out
    }
}

/// Reflection coefficients of the two-segment line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineReflections {
    /// Port of the modem at the near end (position 0).
    pub port_a: f64,
    /// Junction between the segments; the same from both sides.
    pub junction: f64,
    /// Port of the modem at the far end.
    pub port_b: f64,
}

/// A line with modem A at 0, a junction at `d_a` and modem B at `d_a + d_b`.
///
/// `d_b = 0` collapses it into a single segment that ends at modem B.
/// The junction transmits with `sqrt(1 - junction^2)` in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSegmentLine {
    pub d_a: f64,
    pub d_b: f64,
    pub phase_velocity: f64,
    pub reflections: LineReflections,
    pub bounce_order: usize,
    /// Largest echo delay accepted from the path expansion, in seconds.
    pub max_delay: f64,
}

impl TwoSegmentLine {
    fn validate(&self) -> Result<()> {
        if !(self.d_a > 0.0) {
            return Err(Error::NonPositive { name: "d_a", value: self.d_a });
        }
        if !(self.d_b >= 0.0) {
            return Err(Error::InvalidParams(format!("d_b must be >= 0, got {}", self.d_b)));
        }
        if !(self.phase_velocity > 0.0) {
            return Err(Error::NonPositive {
                name: "phase velocity",
                value: self.phase_velocity,
            });
        }
        let r = self.reflections;
        for (name, v) in [("port_a", r.port_a), ("junction", r.junction), ("port_b", r.port_b)] {
            if !(v.abs() <= 1.0) {
                return Err(Error::InvalidParams(format!(
                    "reflection coefficient {name} = {v} has magnitude above 1"
                )));
            }
        }
        if self.bounce_order == 0 {
            return Err(Error::InvalidParams("bounce_order must be >= 1".into()));
        }
        if !(self.max_delay > 0.0) {
            return Err(Error::NonPositive {
                name: "max_delay",
                value: self.max_delay,
            });
        }
        Ok(())
    }

    /// Echo taps seen by `observer` (0 = A, 1 = B) for a unit wave injected
    /// by `injector`, up to `bounce_order` reflections.
    pub fn echo_taps(&self, observer: usize, injector: usize) -> Result<ChannelTaps> {
        self.validate()?;
        let mut found = Vec::new();
        if observer == injector {
            let port = if injector == 0 {
                self.reflections.port_a
            } else {
                self.reflections.port_b
            };
            found.push(Tap::new(0.0, port));
        }
        let start = if injector == 0 { Node::A } else { Node::B };
        let dir = if injector == 0 { 1 } else { -1 };
        self.walk(start, dir, 1.0, 0.0, 0, observer, &mut found);
        if let Some(t) = found.iter().find(|t| t.delay > self.max_delay) {
            return Err(Error::DelayCapExceeded {
                delay: t.delay,
                cap: self.max_delay,
            });
        }
        ChannelTaps::from_unsorted(found)
    }

    fn nodes(&self) -> Vec<(Node, f64)> {
        if self.d_b > 0.0 {
            vec![(Node::A, 0.0), (Node::Junction, self.d_a), (Node::B, self.d_a + self.d_b)]
        } else {
            vec![(Node::A, 0.0), (Node::B, self.d_a)]
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        from: Node,
        dir: i32,
        amp: f64,
        delay: f64,
        reflections: usize,
        observer: usize,
        found: &mut Vec<Tap>,
    ) {
        let nodes = self.nodes();
        let idx = nodes.iter().position(|(n, _)| *n == from).unwrap() as i32;
        let next_idx = idx + dir;
        if next_idx < 0 || next_idx >= nodes.len() as i32 {
            return;
        }
        let (next, pos) = nodes[next_idx as usize];
        let delay = delay + (pos - nodes[idx as usize].1).abs() / self.phase_velocity;
        match next {
            Node::A | Node::B => {
                let (me, gamma) = if next == Node::A {
                    (0, self.reflections.port_a)
                } else {
                    (1, self.reflections.port_b)
                };
                if me == observer {
                    found.push(Tap::new(delay, amp));
                }
                if reflections < self.bounce_order && gamma != 0.0 {
                    self.walk(next, -dir, amp * gamma, delay, reflections + 1, observer, found);
                }
            }
            Node::Junction => {
                let gamma = self.reflections.junction;
                let tau = (1.0 - gamma * gamma).sqrt();
                if tau != 0.0 {
                    self.walk(next, dir, amp * tau, delay, reflections, observer, found);
                }
                if reflections < self.bounce_order && gamma != 0.0 {
                    self.walk(next, -dir, amp * gamma, delay, reflections + 1, observer, found);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    A,
    Junction,
    B,
}

/// Builds the 2-modem scenario (modems at both ends of the line).
pub fn build_two_segment_scenario(
    line: &TwoSegmentLine,
    sample_rate: f64,
    coherence_time: f64,
) -> Result<SensingScenario> {
    let mut grid = Vec::with_capacity(2);
    for observer in 0..2 {
        let mut row = Vec::with_capacity(2);
        for injector in 0..2 {
            let taps = line.echo_taps(observer, injector)?;
            row.push(taps_to_impulse(&taps, sample_rate)?);
        }
        grid.push(row);
    }
    SensingScenario::new(grid, line.phase_velocity, coherence_time)
}

const SYNTH_ECHO: [(usize, f64); 5] = [(2, 0.32), (5, -0.22), (9, 0.16), (14, 0.12), (20, -0.07)];
const SYNTH_CROSS: [(usize, f64); 3] = [(3, 0.18), (7, -0.09), (12, 0.05)];

/// Deterministic `n_plm`-modem scenario for Monte-Carlo comparisons.
///
/// Every reflectogram has the same tap amplitudes (hence the same energy)
/// at modem-dependent delays; transferograms are weaker and reciprocal.
/// No tap sits below delay 2 and every channel is at most 25 samples long.
pub fn synthetic_scenario(n_plm: usize, sample_rate: f64, phase_velocity: f64) -> Result<SensingScenario> {
    if !(sample_rate > 0.0) {
        return Err(Error::NonPositive {
            name: "sample rate",
            value: sample_rate,
        });
    }
    let build = |taps: &[(usize, f64)], shift: usize| {
        let mut h = vec![0.0; 26];
        for &(d, a) in taps {
            h[d + shift] = a;
        }
        ImpulseResponse::new(h, 1.0 / sample_rate)
    };
    let grid = (0..n_plm)
        .map(|i| {
            (0..n_plm)
                .map(|j| {
                    if i == j {
                        build(&SYNTH_ECHO, i % 4)
                    } else {
                        build(&SYNTH_CROSS, (i + j) % 5)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SensingScenario::new(grid, phase_velocity, 1.0)
}

/// Linear convolution of `frame` with `h`, truncated to the frame length.
///
/// After removing an `L_cp`-sample prefix this equals the circular
/// convolution of the frame body with the zero-padded `h` as long as
/// `h.len() <= L_cp + 1`.
pub fn apply_channel(frame: &[f64], h: &ImpulseResponse) -> Result<Vec<f64>> {
    if frame.is_empty() {
        return Err(Error::InvalidParams("empty frame".into()));
    }
    let taps = h.samples();
    let mut out = vec![0.0; frame.len()];
    for (d, &a) in taps.iter().enumerate() {
        if a == 0.0 || d >= frame.len() {
            continue;
        }
        for (o, &s) in out[d..].iter_mut().zip(frame.iter()) {
            *o += a * s;
        }
    }
    Ok(out)
}
