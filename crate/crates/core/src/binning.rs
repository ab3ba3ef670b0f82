//! Event-independent time binning and CHSH estimation.
//!
//! Rounds are bins `[t0 + k tau, t0 + (k+1) tau)` anchored at the start `t0` of
//! each schedule segment; a bin that would cross the segment end is dropped.
//! A side outputs -1 when it has at least one event in the bin, +1 otherwise.
//! `tau` is rounded to the stream's quantization step, so all binning is
//! integer arithmetic on nanoseconds.

use crate::error::{invalid, Error, Result};
use crate::physics::{chsh_from_correlators, MINUS, PLUS};
use crate::sim::{Channel, EventStream, SettingsSchedule};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RoundRecord {
    pub a: i8,
    pub b: i8,
    pub x: u8,
    pub y: u8,
}

impl RoundRecord {
    /// Outcome index (`PLUS` for +1, `MINUS` for -1) of each side.
    fn cell(&self) -> (usize, usize) {
        let idx = |o: i8| if o < 0 { MINUS } else { PLUS };
        (idx(self.a), idx(self.b))
    }
}

/// Round counts indexed `[x][y][a][b]`, with outcome index `PLUS`/`MINUS`.
pub type Counts = [[[[u64; 2]; 2]; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct ChshEstimate {
    pub e: [[f64; 2]; 2],
    pub s: f64,
    pub sigma_s: f64,
    pub counts: Counts,
}

impl ChshEstimate {
    pub fn rounds(&self) -> u64 {
        self.counts.iter().flatten().flatten().flatten().sum()
    }
}

/// `tau` (seconds) rounded to a whole number of `q_ns` steps.
pub fn quantize_tau(tau: f64, q_ns: u64) -> Result<u64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return invalid(format!("tau={tau} must be > 0"));
    }
    let steps = (tau * 1e9 / q_ns as f64).round();
    if steps < 1.0 {
        return invalid(format!("tau={tau} s is below the {q_ns} ns resolution"));
    }
    Ok(steps as u64 * q_ns)
}

/// Walk every segment and report, per segment, its bin count and the bins with
/// at least one click as `(bin, click_a, click_b)` in increasing bin order.
fn sweep(
    stream: &EventStream,
    schedule: &SettingsSchedule,
    tau_ns: u64,
    mut visit: impl FnMut(u8, u8, u64, &[(u64, bool, bool)]),
) -> Result<()> {
    if let Some(i) = stream.first_unsorted() {
        return Err(Error::UnsortedStream(i));
    }
    let events = &stream.events;
    let mut clicked: Vec<(u64, bool, bool)> = Vec::new();
    for seg in &schedule.segments {
        let nbins = (seg.t_end - seg.t_start) / tau_ns;
        let end = seg.t_start + nbins * tau_ns;
        let first = events.partition_point(|e| e.timestamp < seg.t_start);
        clicked.clear();
        for ev in events[first..].iter().take_while(|e| e.timestamp < end) {
            let k = (ev.timestamp - seg.t_start) / tau_ns;
            if clicked.last().map(|c| c.0) != Some(k) {
                clicked.push((k, false, false));
            }
            let c = clicked.last_mut().expect("just pushed");
            match ev.channel {
                Channel::A => c.1 = true,
                Channel::B => c.2 = true,
            }
        }
        visit(seg.x, seg.y, nbins, &clicked);
    }
    Ok(())
}

/// Per-round records in time order.
pub fn bin_events(stream: &EventStream, schedule: &SettingsSchedule, tau: f64) -> Result<Vec<RoundRecord>> {
    let tau_ns = quantize_tau(tau, stream.quantization_ns)?;
    let mut out = Vec::new();
    sweep(stream, schedule, tau_ns, |x, y, nbins, clicked| {
        let base = out.len();
        out.extend((0..nbins).map(|_| RoundRecord { a: 1, b: 1, x, y }));
        for &(k, ca, cb) in clicked {
            let r = &mut out[base + k as usize];
            r.a = if ca { -1 } else { 1 };
            r.b = if cb { -1 } else { 1 };
        }
    })?;
    Ok(out)
}

/// Same rounds as [`bin_events`], counted without materializing them.
pub fn bin_counts(stream: &EventStream, schedule: &SettingsSchedule, tau: f64) -> Result<Counts> {
    let tau_ns = quantize_tau(tau, stream.quantization_ns)?;
    let mut counts = Counts::default();
    sweep(stream, schedule, tau_ns, |x, y, nbins, clicked| {
        let c = &mut counts[x as usize][y as usize];
        c[PLUS][PLUS] += nbins - clicked.len() as u64;
        for &(_, ca, cb) in clicked {
            c[if ca { MINUS } else { PLUS }][if cb { MINUS } else { PLUS }] += 1;
        }
    })?;
    Ok(counts)
}

pub fn count_records(records: &[RoundRecord]) -> Counts {
    let mut counts = Counts::default();
    for r in records {
        let (a, b) = r.cell();
        counts[r.x as usize][r.y as usize][a][b] += 1;
    }
    counts
}

/// `E_xy = (N_same - N_diff)/N_xy`, with i.i.d. binomial errors
/// `var(E_xy) = (1 - E_xy^2)/N_xy` added in quadrature for `S`.
pub fn estimate_from_counts(counts: &Counts) -> Result<ChshEstimate> {
    let mut e = [[0.0; 2]; 2];
    let mut var = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let c = &counts[x][y];
            let same = c[PLUS][PLUS] + c[MINUS][MINUS];
            let diff = c[PLUS][MINUS] + c[MINUS][PLUS];
            let n = same + diff;
            if n == 0 {
                return Err(Error::Estimation(format!("no rounds with settings (x,y)=({x},{y})")));
            }
            let exy = (same as f64 - diff as f64) / n as f64;
            e[x][y] = exy;
            var += (1.0 - exy * exy) / n as f64;
        }
    }
    Ok(ChshEstimate { e, s: chsh_from_correlators(&e), sigma_s: var.sqrt(), counts: *counts })
}

pub fn estimate(records: &[RoundRecord]) -> Result<ChshEstimate> {
    estimate_from_counts(&count_records(records))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauPoint {
    /// Bin width actually used, after rounding to the time resolution.
    pub tau_ns: u64,
    pub estimate: ChshEstimate,
}

/// Independent binning and estimation at each bin width, in input order.
pub fn scan_tau(stream: &EventStream, schedule: &SettingsSchedule, taus: &[f64]) -> Result<Vec<TauPoint>> {
    taus.par_iter()
        .map(|&tau| {
            let tau_ns = quantize_tau(tau, stream.quantization_ns)?;
            let counts = bin_counts(stream, schedule, tau)?;
            Ok(TauPoint { tau_ns, estimate: estimate_from_counts(&counts)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{DetectionEvent, Segment};

    #[test]
    fn tau_rounding() {
        assert_eq!(quantize_tau(13.15e-6, 2).unwrap(), 13_150);
        assert_eq!(quantize_tau(3e-9, 2).unwrap(), 4);
        assert!(quantize_tau(0.5e-9, 2).is_err());
    }

    #[test]
    fn partial_bin_dropped() {
        let stream = EventStream {
            events: vec![DetectionEvent { timestamp: 25, channel: Channel::A }],
            quantization_ns: 1,
            duration_ns: 25,
        };
        let sched = SettingsSchedule::new(vec![Segment { t_start: 0, t_end: 29, x: 1, y: 0 }]).unwrap();
        let r = bin_events(&stream, &sched, 10e-9).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|r| r.a == 1 && r.b == 1 && r.x == 1 && r.y == 0));
    }
}
