use bellrand_core::physics::{quantum_probabilities, QuantumProbTable, SourceModel, MINUS};
use bellrand_core::sim::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn fixed_schedule(duration_ns: u64, x: u8, y: u8) -> SettingsSchedule {
    SettingsSchedule::new(vec![Segment { t_start: 0, t_end: duration_ns, x, y }]).unwrap()
}

fn config(model: SourceModel, duration: f64, jitter: f64, seed: u64) -> SimulationConfig {
    let ns = (duration * 1e9) as u64;
    SimulationConfig {
        model,
        duration,
        jitter_sigma: jitter,
        quantization: 1e-9,
        rng_seed: seed,
        schedule: SettingsSchedule::randomized_cycles(ns, 100_000_000, seed).unwrap(),
    }
}

#[test]
fn poisson_count_and_order() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let t = generate_pairs(2.4e4, 10.0, &mut rng);
    let mean = 2.4e5;
    assert!((t.len() as f64 - mean).abs() < 4.0 * mean.sqrt(), "{}", t.len());
    assert!(t.windows(2).all(|w| w[0] < w[1]));
    assert!(t.iter().all(|&x| (0.0..10.0).contains(&x)));
    assert!(generate_pairs(0.0, 10.0, &mut rng).is_empty());
    assert!(generate_pairs(1.0, 0.0, &mut rng).is_empty());
}

#[test]
fn poisson_gaps_are_exponential() {
    // fraction of gaps longer than the mean is e^-1
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let t = generate_pairs(1e4, 50.0, &mut rng);
    let long = t.windows(2).filter(|w| w[1] - w[0] > 1e-4).count() as f64;
    let n = (t.len() - 1) as f64;
    let p = (-1f64).exp();
    assert!((long / n - p).abs() < 4.0 * (p * (1.0 - p) / n).sqrt());
}

#[test]
fn outcome_sampling_edge_cases() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let plus = QuantumProbTable { p: [[1.0, 0.0], [0.0, 0.0]] };
    let minus = QuantumProbTable { p: [[0.0, 0.0], [0.0, 1.0]] };
    for _ in 0..1000 {
        assert_eq!(sample_pair_outcome(&plus, 1.0, 1.0, &mut rng), (false, false));
        assert_eq!(sample_pair_outcome(&minus, 1.0, 1.0, &mut rng), (true, true));
        assert_eq!(sample_pair_outcome(&minus, 0.0, 0.0, &mut rng), (false, false));
    }
}

#[test]
fn outcome_click_rates() {
    let model = SourceModel::reference_setup();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for (x, y) in [(0, 0), (1, 1)] {
        let t = quantum_probabilities(&model, x, y);
        let pa = (t.p[MINUS][0] + t.p[MINUS][1]) * model.eta_a;
        let pb = (t.p[0][MINUS] + t.p[1][MINUS]) * model.eta_b;
        let pab = t.p[MINUS][MINUS] * model.eta_a * model.eta_b;
        let n = 1_000_000;
        let (mut ca, mut cb, mut cab) = (0u32, 0u32, 0u32);
        for _ in 0..n {
            let (a, b) = sample_pair_outcome(&t, model.eta_a, model.eta_b, &mut rng);
            ca += a as u32;
            cb += b as u32;
            cab += (a && b) as u32;
        }
        for (c, p) in [(ca, pa), (cb, pb), (cab, pab)] {
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 4.0 * sd, "({x},{y}): {c} vs {p}");
        }
    }
}

#[test]
fn silent_source_gives_empty_stream() {
    let mut m = SourceModel::reference_setup();
    m.pair_rate = 0.0;
    m.dark_rate_a = 0.0;
    m.dark_rate_b = 0.0;
    let s = simulate(&config(m, 1.0, 170e-9, 3)).unwrap();
    assert!(s.events.is_empty());
    assert_eq!(s.duration_ns, 1_000_000_000);
}

#[test]
fn jitter_free_coincidences_share_a_timestamp() {
    let mut m = SourceModel::reference_setup();
    m.eta_a = 1.0;
    m.eta_b = 1.0;
    m.dark_rate_a = 0.0;
    m.dark_rate_b = 0.0;
    m.pair_rate = 50.0;
    let s = simulate(&config(m, 20.0, 0.0, 4)).unwrap();
    // at 50 pairs/s two pairs within 1 ns are improbable, so every B click
    // coinciding with an A click is the same pair
    let a: std::collections::HashSet<u64> =
        s.events.iter().filter(|e| e.channel == Channel::A).map(|e| e.timestamp).collect();
    let shared = s.events.iter().filter(|e| e.channel == Channel::B && a.contains(&e.timestamp)).count();
    assert!(shared > 0);
    assert!(s.first_unsorted().is_none());
}

#[test]
fn singles_rates() {
    let m = SourceModel::reference_setup();
    let duration = 20.0;
    let ns = (duration * 1e9) as u64;
    for (x, y) in [(0u8, 0u8), (1, 1)] {
        let cfg = SimulationConfig { schedule: fixed_schedule(ns, x, y), ..config(m, duration, 0.0, 7) };
        let s = simulate(&cfg).unwrap();
        let t = quantum_probabilities(&m, x as usize, y as usize);
        let ra = m.pair_rate * (t.p[MINUS][0] + t.p[MINUS][1]) * m.eta_a + m.dark_rate_a;
        let rb = m.pair_rate * (t.p[0][MINUS] + t.p[1][MINUS]) * m.eta_b + m.dark_rate_b;
        for (got, rate) in [(s.count(Channel::A), ra), (s.count(Channel::B), rb)] {
            let mean = rate * duration;
            assert!((got as f64 - mean).abs() < 4.0 * mean.sqrt(), "({x},{y}): {got} vs {mean}");
        }
    }
}

#[test]
fn timestamps_are_quantized() {
    let m = SourceModel::reference_setup();
    let cfg = SimulationConfig { quantization: 2e-9, ..config(m, 0.5, 170e-9, 9) };
    let s = simulate(&cfg).unwrap();
    assert_eq!(s.quantization_ns, 2);
    assert!(s.events.iter().all(|e| e.timestamp % 2 == 0 && e.timestamp < s.duration_ns));
}

#[test]
fn deterministic_across_thread_counts() {
    let m = SourceModel::reference_setup();
    let cfg = config(m, 2.0, 170e-9, 42);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| simulate(&cfg).unwrap());
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| simulate(&cfg).unwrap());
    assert_eq!(one, four);
    assert_eq!(one, simulate(&cfg).unwrap());
    assert_ne!(one, simulate(&SimulationConfig { rng_seed: 43, ..cfg }).unwrap());
}

#[test]
fn processes_draw_independent_streams() {
    let m = SourceModel::reference_setup();
    let with = simulate(&config(m, 2.0, 0.0, 8)).unwrap();
    let mut quiet = m;
    quiet.dark_rate_a = 0.0;
    quiet.dark_rate_b = 0.0;
    let without = simulate(&config(quiet, 2.0, 0.0, 8)).unwrap();
    // removing the dark counts leaves every pair event in place
    let mut it = with.events.iter();
    for e in &without.events {
        assert!(it.any(|f| f == e), "pair event {e:?} moved");
    }
    assert!(with.events.len() > without.events.len());

    // jitter moves pair events but leaves dark counts and click decisions alone
    let jittered = simulate(&config(m, 2.0, 170e-9, 8)).unwrap();
    for ch in [Channel::A, Channel::B] {
        let diff = with.count(ch) as i64 - jittered.count(ch) as i64;
        assert!(diff.abs() <= 3, "{ch:?}: {diff}");
    }
}

#[test]
fn rejects_bad_configs() {
    let m = SourceModel::reference_setup();
    let good = config(m, 1.0, 0.0, 1);
    assert!(simulate(&SimulationConfig { duration: 0.0, ..good.clone() }).is_err());
    assert!(simulate(&SimulationConfig { jitter_sigma: -1.0, ..good.clone() }).is_err());
    assert!(simulate(&SimulationConfig { quantization: 1e-12, ..good.clone() }).is_err());
    let short = fixed_schedule(500_000_000, 0, 0);
    assert!(simulate(&SimulationConfig { schedule: short, ..good }).is_err());
}

#[test]
fn schedule_validation() {
    let seg = |a, b, x, y| Segment { t_start: a, t_end: b, x, y };
    assert!(SettingsSchedule::new(vec![seg(0, 10, 0, 0), seg(5, 20, 1, 1)]).is_err());
    assert!(SettingsSchedule::new(vec![seg(0, 0, 0, 0)]).is_err());
    assert!(SettingsSchedule::new(vec![seg(0, 10, 2, 0)]).is_err());
    let gappy = SettingsSchedule::new(vec![seg(0, 10, 0, 0), seg(20, 30, 1, 1)]).unwrap();
    assert!(!gappy.covers(30));
    let w = gappy.window(5, 25);
    assert_eq!(w.segments, vec![seg(5, 10, 0, 0), seg(20, 25, 1, 1)]);
}
