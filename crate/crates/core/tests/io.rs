use bellrand_core::extractor::BitString;
use bellrand_core::io::*;
use bellrand_core::physics::SourceModel;
use bellrand_core::sim::{simulate, SettingsSchedule, SimulationConfig};
use bellrand_core::Error;
use proptest::prelude::*;

fn small_stream() -> (bellrand_core::EventStream, SettingsSchedule) {
    let schedule = SettingsSchedule::randomized_cycles(100_000_000, 1_000_000, 5).unwrap();
    let cfg = SimulationConfig {
        model: SourceModel::reference_setup(),
        duration: 0.1,
        jitter_sigma: 170e-9,
        quantization: 2e-9,
        rng_seed: 5,
        schedule: schedule.clone(),
    };
    (simulate(&cfg).unwrap(), schedule)
}

#[test]
fn event_file_round_trip() {
    let (s, _) = small_stream();
    let mut buf = Vec::new();
    write_events(&mut buf, &s).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("# bellrand-events v1 quantization_ns=2 duration_ns=100000000\n"));
    assert_eq!(read_events(&buf[..]).unwrap(), s);
}

#[test]
fn schedule_file_round_trip() {
    let (_, sched) = small_stream();
    let mut buf = Vec::new();
    write_schedule(&mut buf, &sched).unwrap();
    assert_eq!(read_schedule(&buf[..]).unwrap(), sched);
}

#[test]
fn malformed_event_files() {
    let bad = [
        "",
        "# wrong header\n",
        "# bellrand-events v1 duration_ns=10\n",
        "# bellrand-events v1 quantization_ns=0\n",
        "# bellrand-events v1 quantization_ns=1\n5 C\n",
        "# bellrand-events v1 quantization_ns=1\nx A\n",
        "# bellrand-events v1 quantization_ns=1\n5 A extra\n",
    ];
    for t in bad {
        assert!(read_events(t.as_bytes()).is_err(), "{t:?}");
    }
    let unsorted = "# bellrand-events v1 quantization_ns=1\n10 A\n5 B\n";
    assert!(matches!(read_events(unsorted.as_bytes()), Err(Error::UnsortedStream(1))));
    // comments and blank lines are skipped; duration defaults past the last event
    let ok = read_events("# bellrand-events v1 quantization_ns=2\n# note\n\n4 A\n6 B\n".as_bytes()).unwrap();
    assert_eq!((ok.events.len(), ok.duration_ns), (2, 8));
}

#[test]
fn malformed_schedule_files() {
    for t in [
        "0 10 0 0\n",
        "# bellrand-schedule v1\n0 10 2 0\n",
        "# bellrand-schedule v1\n0 10 0\n",
        "# bellrand-schedule v1\n10 0 0 0\n",
    ] {
        assert!(read_schedule(t.as_bytes()).is_err(), "{t:?}");
    }
}

#[test]
fn bit_files() {
    let bits = BitString::from_str01("10110").unwrap();
    let mut buf = Vec::new();
    write_bits(&mut buf, &bits).unwrap();
    assert_eq!(buf, vec![0b1011_0000]);
    assert_eq!(bits_from_bytes(buf.clone(), Some(5)).unwrap(), bits);
    assert_eq!(bits_from_bytes(buf.clone(), None).unwrap().len(), 8);
    assert!(bits_from_bytes(buf, Some(9)).is_err());
    // trailing garbage past the declared length is masked off
    assert_eq!(bits_from_bytes(vec![0b1011_0111], Some(5)).unwrap(), bits);
}

#[test]
fn hashes() {
    assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#[test]
fn manifest_round_trip() {
    let mut m = Manifest::new();
    m.set("command", "simulate").set_f64("tau", 8.9e-6).set("seed", 7).set_f64("s", 2.0160234567891);
    m.set("seed", 8);
    let text = m.render();
    assert_eq!(text, "command=simulate\ntau=8.9e-06\nseed=8\ns=2.01602345679\n");
    assert_eq!(Manifest::parse(&text).unwrap(), m);
    assert_eq!(m.get("tau"), Some("8.9e-06"));
    assert!(Manifest::parse("novalue\n").is_err());
}

#[test]
fn float_format() {
    assert_eq!(fmt_f64(0.0), "0");
    assert_eq!(fmt_f64(1e-5), "1e-05");
    assert_eq!(fmt_f64(1.5e-5), "1.5e-05");
    assert_eq!(fmt_f64(0.0001), "0.0001");
    assert_eq!(fmt_f64(123456789012.0), "123456789012");
    assert_eq!(fmt_f64(1234567890123.0), "1.23456789012e+12");
    assert_eq!(fmt_f64(f64::NAN), "NaN");
}

proptest! {
    #[test]
    fn float_format_round_trips_to_12_digits(x in -1e300f64..1e300) {
        let back: f64 = fmt_f64(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
    }

    #[test]
    fn bits_round_trip(v in prop::collection::vec(any::<bool>(), 0..300)) {
        let b = BitString::from_bits(v.iter().copied());
        let mut buf = Vec::new();
        write_bits(&mut buf, &b).unwrap();
        prop_assert_eq!(bits_from_bytes(buf, Some(v.len())).unwrap(), b);
    }
}
