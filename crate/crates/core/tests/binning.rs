use bellrand_core::binning::*;
use bellrand_core::physics::SourceModel;
use bellrand_core::sim::*;
use bellrand_core::Error;
use proptest::prelude::*;

fn ev(timestamp: u64, channel: Channel) -> DetectionEvent {
    DetectionEvent { timestamp, channel }
}

fn stream(mut events: Vec<DetectionEvent>, q: u64, duration: u64) -> EventStream {
    events.sort();
    EventStream { events, quantization_ns: q, duration_ns: duration }
}

fn seg(t_start: u64, t_end: u64, x: u8, y: u8) -> Segment {
    Segment { t_start, t_end, x, y }
}

// Direct enumeration: for every whole bin of every segment, scan all events.
fn naive(events: &[DetectionEvent], schedule: &SettingsSchedule, tau: u64) -> Vec<RoundRecord> {
    let mut out = Vec::new();
    for s in &schedule.segments {
        let mut lo = s.t_start;
        while lo + tau <= s.t_end {
            let hit = |c| events.iter().any(|e| e.channel == c && e.timestamp >= lo && e.timestamp < lo + tau);
            out.push(RoundRecord {
                a: if hit(Channel::A) { -1 } else { 1 },
                b: if hit(Channel::B) { -1 } else { 1 },
                x: s.x,
                y: s.y,
            });
            lo += tau;
        }
    }
    out
}

#[test]
fn empty_stream_gives_plus_rounds() {
    let sched = SettingsSchedule::new(vec![seg(0, 1000, 0, 1)]).unwrap();
    let r = bin_events(&stream(vec![], 1, 1000), &sched, 10e-9).unwrap();
    assert_eq!(r.len(), 100);
    assert!(r.iter().all(|r| *r == RoundRecord { a: 1, b: 1, x: 0, y: 1 }));
}

#[test]
fn two_event_example() {
    let sched = SettingsSchedule::new(vec![seg(0, 20, 0, 0)]).unwrap();
    let s = stream(vec![ev(5, Channel::A), ev(15, Channel::B)], 1, 20);
    let r = bin_events(&s, &sched, 10e-9).unwrap();
    let got: Vec<(i8, i8)> = r.iter().map(|r| (r.a, r.b)).collect();
    assert_eq!(got, vec![(-1, 1), (1, -1)]);
}

#[test]
fn crafted_stream_matches_enumeration() {
    // events on bin edges, doubled clicks, both sides, and one past the end
    let events = vec![
        ev(0, Channel::A),
        ev(9, Channel::A),
        ev(10, Channel::B),
        ev(19, Channel::A),
        ev(19, Channel::B),
        ev(30, Channel::A),
        ev(31, Channel::A),
        ev(44, Channel::B),
        ev(50, Channel::A),
        ev(63, Channel::B),
        ev(77, Channel::A),
        ev(99, Channel::B),
    ];
    let sched = SettingsSchedule::new(vec![seg(0, 35, 0, 0), seg(35, 70, 1, 0), seg(70, 95, 1, 1)]).unwrap();
    let s = stream(events.clone(), 1, 100);
    let r = bin_events(&s, &sched, 10e-9).unwrap();
    assert_eq!(r, naive(&events, &sched, 10));
    let pattern: Vec<(i8, i8)> = r.iter().map(|r| (r.a, r.b)).collect();
    assert_eq!(pattern, vec![(-1, 1), (-1, -1), (1, 1), (1, -1), (-1, 1), (1, -1), (-1, 1), (1, 1)]);
    assert_eq!(bin_counts(&s, &sched, 10e-9).unwrap(), count_records(&r));
}

#[test]
fn unsorted_stream_rejected() {
    let s = EventStream { events: vec![ev(10, Channel::A), ev(5, Channel::B)], quantization_ns: 1, duration_ns: 20 };
    let sched = SettingsSchedule::new(vec![seg(0, 20, 0, 0)]).unwrap();
    assert!(matches!(bin_events(&s, &sched, 10e-9), Err(Error::UnsortedStream(1))));
    assert!(matches!(bin_counts(&s, &sched, 10e-9), Err(Error::UnsortedStream(1))));
}

#[test]
fn all_plus_rounds() {
    let r: Vec<RoundRecord> =
        (0..400).map(|i| RoundRecord { a: 1, b: 1, x: (i % 2) as u8, y: (i / 2 % 2) as u8 }).collect();
    let e = estimate(&r).unwrap();
    assert_eq!(e.s, 2.0);
    assert_eq!(e.sigma_s, 0.0);
    assert_eq!(e.rounds(), 400);
}

#[test]
fn missing_setting_is_an_error() {
    let r = vec![RoundRecord { a: 1, b: 1, x: 0, y: 0 }];
    assert!(matches!(estimate(&r), Err(Error::Estimation(_))));
}

#[test]
fn plug_in_identity() {
    // S = sum_xy (-1)^{xy} <ab>_xy computed by hand from the records
    let m = SourceModel::reference_setup();
    let cfg = SimulationConfig {
        model: m,
        duration: 2.0,
        jitter_sigma: 0.0,
        quantization: 1e-9,
        rng_seed: 21,
        schedule: SettingsSchedule::randomized_cycles(2_000_000_000, 10_000_000, 21).unwrap(),
    };
    let s = simulate(&cfg).unwrap();
    let r = bin_events(&s, &cfg.schedule, 13e-6).unwrap();
    let mut sum = [[0i64; 2]; 2];
    let mut n = [[0i64; 2]; 2];
    for rec in &r {
        sum[rec.x as usize][rec.y as usize] += (rec.a * rec.b) as i64;
        n[rec.x as usize][rec.y as usize] += 1;
    }
    let e = |x: usize, y: usize| sum[x][y] as f64 / n[x][y] as f64;
    let s_hand = e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1);
    let est = estimate(&r).unwrap();
    assert!((est.s - s_hand).abs() < 1e-12);
    let var: f64 = (0..4).map(|k| (1.0 - e(k / 2, k % 2).powi(2)) / n[k / 2][k % 2] as f64).sum();
    assert!((est.sigma_s - var.sqrt()).abs() < 1e-12);
}

#[test]
fn sigma_shrinks_as_root_n() {
    let run = |duration: f64| {
        let ns = (duration * 1e9) as u64;
        let cfg = SimulationConfig {
            model: SourceModel::reference_setup(),
            duration,
            jitter_sigma: 0.0,
            quantization: 1e-9,
            rng_seed: 3,
            schedule: SettingsSchedule::randomized_cycles(ns, 10_000_000, 3).unwrap(),
        };
        let s = simulate(&cfg).unwrap();
        estimate_from_counts(&bin_counts(&s, &cfg.schedule, 13e-6).unwrap()).unwrap().sigma_s
    };
    let ratio = run(1.0) / run(2.0);
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.1, "{ratio}");
}

#[test]
fn scan_matches_direct_binning() {
    let cfg = SimulationConfig {
        model: SourceModel::reference_setup(),
        duration: 1.0,
        jitter_sigma: 170e-9,
        quantization: 2e-9,
        rng_seed: 17,
        schedule: SettingsSchedule::randomized_cycles(1_000_000_000, 10_000_000, 17).unwrap(),
    };
    let s = simulate(&cfg).unwrap();
    let taus = [2e-6, 13.151e-6, 40e-6];
    let scan = scan_tau(&s, &cfg.schedule, &taus).unwrap();
    for (p, &tau) in scan.iter().zip(&taus) {
        let direct = estimate(&bin_events(&s, &cfg.schedule, tau).unwrap()).unwrap();
        assert_eq!(p.estimate, direct);
        assert_eq!(p.tau_ns, quantize_tau(tau, 2).unwrap());
    }
    assert_eq!(scan[1].tau_ns, 13_152);
}

fn arb_case() -> impl Strategy<Value = (Vec<DetectionEvent>, Vec<Segment>, u64)> {
    (
        prop::collection::vec((0u64..600, any::<bool>()), 0..80),
        prop::collection::vec((1u64..120, 0u64..30, 0u8..2, 0u8..2), 1..8),
        1u64..40,
    )
        .prop_map(|(evs, segs, tau)| {
            let events = evs.into_iter().map(|(t, a)| ev(t, if a { Channel::A } else { Channel::B })).collect();
            let mut t = 0;
            let mut out = Vec::new();
            for (len, gap, x, y) in segs {
                t += gap;
                out.push(seg(t, t + len, x, y));
                t += len;
            }
            (events, out, tau)
        })
}

proptest! {
    #[test]
    fn agrees_with_enumeration((events, segs, tau) in arb_case()) {
        let s = stream(events, 1, 700);
        let sched = SettingsSchedule::new(segs).unwrap();
        let r = bin_events(&s, &sched, tau as f64 * 1e-9).unwrap();
        prop_assert_eq!(&r, &naive(&s.events, &sched, tau));
        prop_assert_eq!(bin_counts(&s, &sched, tau as f64 * 1e-9).unwrap(), count_records(&r));
    }

    #[test]
    fn shifting_everything_changes_nothing((events, segs, tau) in arb_case(), shift in 0u64..10_000) {
        let s = stream(events.clone(), 1, 700);
        let sched = SettingsSchedule::new(segs.clone()).unwrap();
        let moved = stream(events.iter().map(|e| ev(e.timestamp + shift, e.channel)).collect(), 1, 700 + shift);
        let msched = SettingsSchedule::new(segs.iter().map(|g| seg(g.t_start + shift, g.t_end + shift, g.x, g.y)).collect()).unwrap();
        let t = tau as f64 * 1e-9;
        prop_assert_eq!(bin_events(&s, &sched, t).unwrap(), bin_events(&moved, &msched, t).unwrap());
    }

    #[test]
    fn outcomes_are_plus_minus_one((events, segs, tau) in arb_case()) {
        let s = stream(events, 1, 700);
        let sched = SettingsSchedule::new(segs).unwrap();
        for r in bin_events(&s, &sched, tau as f64 * 1e-9).unwrap() {
            prop_assert!(r.a.abs() == 1 && r.b.abs() == 1);
        }
    }
}
