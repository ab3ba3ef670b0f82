//! Monte Carlo detection events for a CW pair source.
//!
//! Randomness comes from ChaCha20 seeded with `rng_seed`; every physical
//! process of every schedule segment draws from its own stream
//! (`stream = process << 32 | segment`), so segments can be simulated in any
//! order or in parallel, and switching one process on or off (jitter, say)
//! leaves the draws of the others untouched.

use crate::error::{invalid, Result};
use crate::physics::{quantum_probabilities, QuantumProbTable, SourceModel, MINUS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    A,
    B,
}

/// One detector click: integer nanoseconds since the start of the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectionEvent {
    pub timestamp: u64,
    pub channel: Channel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    pub events: Vec<DetectionEvent>,
    pub quantization_ns: u64,
    pub duration_ns: u64,
}

impl EventStream {
    /// Index of the first out-of-order event, if any.
    pub fn first_unsorted(&self) -> Option<usize> {
        self.events.windows(2).position(|w| w[1].timestamp < w[0].timestamp).map(|i| i + 1)
    }

    pub fn count(&self, channel: Channel) -> usize {
        self.events.iter().filter(|e| e.channel == channel).count()
    }
}

/// A stretch of time with fixed analyzer settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub t_start: u64,
    pub t_end: u64,
    pub x: u8,
    pub y: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SettingsSchedule {
    pub segments: Vec<Segment>,
}

impl SettingsSchedule {
    /// Segments must be non-empty, sorted and non-overlapping; gaps are allowed.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if s.t_end <= s.t_start {
                return invalid(format!("segment {i} is empty or reversed"));
            }
            if s.x > 1 || s.y > 1 {
                return invalid(format!("segment {i} has settings ({}, {}) outside {{0,1}}", s.x, s.y));
            }
            if i > 0 && s.t_start < segments[i - 1].t_end {
                return invalid(format!("segment {i} overlaps or precedes segment {}", i - 1));
            }
        }
        Ok(SettingsSchedule { segments })
    }

    /// Consecutive segments of `segment_ns` cycling through the four setting
    /// pairs, each cycle in an order drawn from `seed`.
    pub fn randomized_cycles(duration_ns: u64, segment_ns: u64, seed: u64) -> Result<Self> {
        if segment_ns == 0 || duration_ns == 0 {
            return invalid("schedule needs positive duration and segment length");
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(STREAM_SCHEDULE);
        let mut segments = Vec::new();
        let mut t = 0;
        let mut order = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)];
        while t < duration_ns {
            // Fisher-Yates
            for i in (1..4).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            for &(x, y) in &order {
                if t >= duration_ns {
                    break;
                }
                let end = (t + segment_ns).min(duration_ns);
                segments.push(Segment { t_start: t, t_end: end, x, y });
                t = end;
            }
        }
        Self::new(segments)
    }

    /// Whether the segments tile `[0, duration_ns)` without gaps.
    pub fn covers(&self, duration_ns: u64) -> bool {
        let mut t = 0;
        for s in &self.segments {
            if s.t_start != t {
                return false;
            }
            t = s.t_end;
            if t >= duration_ns {
                return true;
            }
        }
        false
    }

    /// Copy restricted to `[from, to)`.
    pub fn window(&self, from: u64, to: u64) -> SettingsSchedule {
        let segments = self
            .segments
            .iter()
            .filter_map(|s| {
                let a = s.t_start.max(from);
                let b = s.t_end.min(to);
                (a < b).then_some(Segment { t_start: a, t_end: b, ..*s })
            })
            .collect();
        SettingsSchedule { segments }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub model: SourceModel,
    /// Seconds.
    pub duration: f64,
    /// Standard deviation of the per-detection Gaussian timing error, seconds.
    pub jitter_sigma: f64,
    /// Time-tagger resolution, seconds.
    pub quantization: f64,
    pub rng_seed: u64,
    pub schedule: SettingsSchedule,
}

pub const DEFAULT_JITTER_SIGMA: f64 = 170e-9;
pub const DEFAULT_QUANTIZATION: f64 = 2e-9;

const STREAM_PAIRS: u64 = 1;
const STREAM_OUTCOMES: u64 = 2;
const STREAM_JITTER: u64 = 3;
const STREAM_DARK_A: u64 = 4;
const STREAM_DARK_B: u64 = 5;
const STREAM_SCHEDULE: u64 = 6;

/// Generator for one process of one segment.
pub fn substream(seed: u64, process: u64, segment: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream((process << 32) | segment);
    rng
}

/// Homogeneous Poisson process on `[0, duration)` (seconds), by exponential
/// inter-arrival times.
pub fn generate_pairs(rate: f64, duration: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::new();
    if !(rate > 0.0) || !(duration > 0.0) {
        return out;
    }
    let exp = Exp::new(rate).expect("positive rate");
    let mut t = exp.sample(rng);
    while t < duration {
        out.push(t);
        t += exp.sample(rng);
    }
    out
}

/// Draw the pair's polarization outcomes from `table`; a side clicks when its
/// outcome is `-` and its detector fires (probability `eta`). Always uses three
/// uniforms.
pub fn sample_pair_outcome(table: &QuantumProbTable, eta_a: f64, eta_b: f64, rng: &mut impl Rng) -> (bool, bool) {
    let u: f64 = rng.gen();
    let da: f64 = rng.gen();
    let db: f64 = rng.gen();
    let cells = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let mut acc = 0.0;
    let mut pick = (1, 1);
    for &(a, b) in &cells {
        acc += table.p[a][b];
        if u < acc {
            pick = (a, b);
            break;
        }
    }
    (pick.0 == MINUS && da < eta_a, pick.1 == MINUS && db < eta_b)
}

fn quantize(t_ns: f64, q_ns: u64) -> Option<u64> {
    if t_ns < 0.0 {
        return None;
    }
    let k = (t_ns / q_ns as f64).floor() as u64;
    Some(k * q_ns)
}

fn simulate_segment(
    cfg: &SimulationConfig,
    seg_index: usize,
    seg: &Segment,
    q_ns: u64,
    duration_ns: u64,
) -> Vec<DetectionEvent> {
    let m = &cfg.model;
    let seed = cfg.rng_seed;
    let idx = seg_index as u64;
    let t0 = seg.t_start as f64;
    let len = (seg.t_end.min(duration_ns) - seg.t_start) as f64 * 1e-9;
    let table = quantum_probabilities(m, seg.x as usize, seg.y as usize);
    let mut out = Vec::new();
    // offsets are seconds relative to the segment start, placed on the ns axis
    let mut push = |t_s: f64, jitter: f64, channel| {
        if let Some(ts) = quantize(t0 + (t_s + jitter) * 1e9, q_ns) {
            if ts < duration_ns {
                out.push(DetectionEvent { timestamp: ts, channel });
            }
        }
    };

    let mut pair_rng = substream(seed, STREAM_PAIRS, idx);
    let mut outcome_rng = substream(seed, STREAM_OUTCOMES, idx);
    let mut jitter_rng = substream(seed, STREAM_JITTER, idx);
    let normal = (cfg.jitter_sigma > 0.0).then(|| Normal::new(0.0, cfg.jitter_sigma).expect("finite sigma"));
    let jit = |rng: &mut ChaCha20Rng| normal.map_or(0.0, |n| n.sample(rng));
    for t in generate_pairs(m.pair_rate, len, &mut pair_rng) {
        let (ca, cb) = sample_pair_outcome(&table, m.eta_a, m.eta_b, &mut outcome_rng);
        if ca {
            let j = jit(&mut jitter_rng);
            push(t, j, Channel::A);
        }
        if cb {
            let j = jit(&mut jitter_rng);
            push(t, j, Channel::B);
        }
    }
    let mut dark_a = substream(seed, STREAM_DARK_A, idx);
    for t in generate_pairs(m.dark_rate_a, len, &mut dark_a) {
        push(t, 0.0, Channel::A);
    }
    let mut dark_b = substream(seed, STREAM_DARK_B, idx);
    for t in generate_pairs(m.dark_rate_b, len, &mut dark_b) {
        push(t, 0.0, Channel::B);
    }
    out
}

/// Simulate the detection events of one run, sorted by `(timestamp, channel)`.
pub fn simulate(cfg: &SimulationConfig) -> Result<EventStream> {
    cfg.model.validate()?;
    if !(cfg.duration > 0.0 && cfg.duration.is_finite()) {
        return invalid(format!("duration={} must be > 0", cfg.duration));
    }
    if !(cfg.jitter_sigma >= 0.0 && cfg.jitter_sigma.is_finite()) {
        return invalid(format!("jitter_sigma={} must be >= 0", cfg.jitter_sigma));
    }
    let q_ns = (cfg.quantization * 1e9).round() as u64;
    if q_ns == 0 {
        return invalid(format!("quantization={} below 1 ns", cfg.quantization));
    }
    let duration_ns = (cfg.duration * 1e9).round() as u64;
    if !cfg.schedule.covers(duration_ns) {
        return invalid("schedule does not cover the simulated duration without gaps");
    }
    let segments: Vec<(usize, Segment)> =
        cfg.schedule.segments.iter().copied().enumerate().filter(|(_, s)| s.t_start < duration_ns).collect();
    let parts: Vec<Vec<DetectionEvent>> =
        segments.par_iter().map(|(i, s)| simulate_segment(cfg, *i, s, q_ns, duration_ns)).collect();
    let mut events: Vec<DetectionEvent> = parts.into_iter().flatten().collect();
    events.par_sort_unstable();
    Ok(EventStream { events, quantization_ns: q_ns, duration_ns })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_contain_each_setting() {
        let s = SettingsSchedule::randomized_cycles(8_000, 1_000, 3).unwrap();
        assert!(s.covers(8_000));
        for cycle in s.segments.chunks(4) {
            let mut seen: Vec<(u8, u8)> = cycle.iter().map(|c| (c.x, c.y)).collect();
            seen.sort();
            assert_eq!(seen, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        }
    }

    #[test]
    fn schedule_validation() {
        let seg = |a, b| Segment { t_start: a, t_end: b, x: 0, y: 0 };
        assert!(SettingsSchedule::new(vec![seg(0, 10), seg(5, 20)]).is_err());
        assert!(SettingsSchedule::new(vec![seg(0, 0)]).is_err());
        let gappy = SettingsSchedule::new(vec![seg(0, 10), seg(12, 20)]).unwrap();
        assert!(!gappy.covers(20));
    }

    #[test]
    fn quantize_floors() {
        assert_eq!(quantize(5.9, 2), Some(4));
        assert_eq!(quantize(-0.1, 2), None);
    }
}
