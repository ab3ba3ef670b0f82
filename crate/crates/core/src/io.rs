//! Text and binary file formats.
//!
//! * Events: header `# bellrand-events v1 quantization_ns=<q> duration_ns=<d>`,
//!   then one `<timestamp_ns> <A|B>` per line, sorted.
//! * Schedules: header `# bellrand-schedule v1`, then `<t_start_ns> <t_end_ns> <x> <y>`.
//! * Bits: raw bytes, most significant bit first, last byte zero-padded; the
//!   true length travels separately (manifest or flag).
//! * Manifests: `key=value` lines in insertion order, `#` comments ignored.

use crate::error::{Error, Result};
use crate::extractor::BitString;
use crate::sim::{Channel, DetectionEvent, EventStream, Segment, SettingsSchedule};
use sha2::{Digest, Sha256};
use std::io::{BufRead, Write};

pub const EVENTS_MAGIC: &str = "# bellrand-events v1";
pub const SCHEDULE_MAGIC: &str = "# bellrand-schedule v1";

fn malformed<T>(line: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Malformed(format!("line {line}: {msg}")))
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros removed,
/// exponent form outside `[1e-4, 1e12)`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp).max(0) as usize, x))
    } else {
        format!("{}e{}{:02}", trim(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

pub fn write_events(w: &mut impl Write, stream: &EventStream) -> Result<()> {
    writeln!(w, "{EVENTS_MAGIC} quantization_ns={} duration_ns={}", stream.quantization_ns, stream.duration_ns)?;
    for e in &stream.events {
        let c = match e.channel {
            Channel::A => 'A',
            Channel::B => 'B',
        };
        writeln!(w, "{} {c}", e.timestamp)?;
    }
    Ok(())
}

fn header_field(header: &str, key: &str) -> Option<u64> {
    header.split_whitespace().find_map(|f| f.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
}

/// Parse an event file; timestamps must be sorted.
pub fn read_events(r: impl BufRead) -> Result<EventStream> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Malformed("empty event file".into()))??;
    if !header.starts_with(EVENTS_MAGIC) {
        return malformed(1, format!("expected header '{EVENTS_MAGIC} ...'"));
    }
    let q = header_field(&header, "quantization_ns")
        .ok_or_else(|| Error::Malformed("header lacks quantization_ns".into()))?;
    if q == 0 {
        return malformed(1, "quantization_ns must be positive");
    }
    let duration = header_field(&header, "duration_ns");
    let mut events = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let ln = i + 2;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut parts = t.split_whitespace();
        let (Some(ts), Some(ch), None) = (parts.next(), parts.next(), parts.next()) else {
            return malformed(ln, "expected '<timestamp_ns> <A|B>'");
        };
        let timestamp: u64 = ts.parse().or_else(|_| malformed(ln, format!("bad timestamp '{ts}'")))?;
        let channel = match ch {
            "A" => Channel::A,
            "B" => Channel::B,
            _ => return malformed(ln, format!("channel '{ch}' is not A or B")),
        };
        events.push(DetectionEvent { timestamp, channel });
    }
    let duration_ns = duration.unwrap_or_else(|| events.last().map_or(0, |e| e.timestamp + q));
    let stream = EventStream { events, quantization_ns: q, duration_ns };
    if let Some(i) = stream.first_unsorted() {
        return Err(Error::UnsortedStream(i));
    }
    Ok(stream)
}

pub fn write_schedule(w: &mut impl Write, schedule: &SettingsSchedule) -> Result<()> {
    writeln!(w, "{SCHEDULE_MAGIC}")?;
    for s in &schedule.segments {
        writeln!(w, "{} {} {} {}", s.t_start, s.t_end, s.x, s.y)?;
    }
    Ok(())
}

pub fn read_schedule(r: impl BufRead) -> Result<SettingsSchedule> {
    let mut segments = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if i == 0 {
            if !t.starts_with(SCHEDULE_MAGIC) {
                return malformed(1, format!("expected header '{SCHEDULE_MAGIC}'"));
            }
            continue;
        }
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f: Vec<u64> = t
            .split_whitespace()
            .map(|v| v.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .or_else(|_| malformed(i + 1, "expected four non-negative integers"))?;
        let [t_start, t_end, x, y] = f[..] else {
            return malformed(i + 1, "expected '<t_start_ns> <t_end_ns> <x> <y>'");
        };
        if x > 1 || y > 1 {
            return malformed(i + 1, "settings must be 0 or 1");
        }
        segments.push(Segment { t_start, t_end, x: x as u8, y: y as u8 });
    }
    SettingsSchedule::new(segments)
}

pub fn write_bits(w: &mut impl Write, bits: &BitString) -> Result<()> {
    w.write_all(bits.as_bytes())?;
    Ok(())
}

/// Bits from raw bytes; `len` defaults to every bit of the file.
pub fn bits_from_bytes(bytes: Vec<u8>, len: Option<usize>) -> Result<BitString> {
    let len = len.unwrap_or(bytes.len() * 8);
    if len > bytes.len() * 8 {
        return Err(Error::InputTooShort(format!("{len} bits requested from {} bytes", bytes.len())));
    }
    let mut bytes = bytes;
    bytes.truncate(len.div_ceil(8));
    if !len.is_multiple_of(8) {
        // tolerate garbage past the stated length
        let last = bytes.len() - 1;
        bytes[last] &= 0xffu8 << (8 - len % 8);
    }
    BitString::from_bytes(bytes, len)
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// Ordered `key=value` record of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert or replace `key`.
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let v = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = v,
            None => self.entries.push((key.to_string(), v)),
        }
        self
    }

    pub fn set_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, fmt_f64(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Manifest::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let Some((k, v)) = t.split_once('=') else {
                return malformed(i + 1, "expected key=value");
            };
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }
}
