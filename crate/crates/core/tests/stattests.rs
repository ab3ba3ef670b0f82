use bellrand_core::extractor::BitString;
use bellrand_core::stattests::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

// 30-digit reference values of the tail functions the tests rely on
#[test]
fn tail_functions() {
    let erfc_ref = [
        (0.01, 0.988_716_584_444_150_382_85),
        (0.1, 0.887_537_083_981_715_101_6),
        (0.5, 0.479_500_122_186_953_462_32),
        (1.0, 0.157_299_207_050_285_130_66),
        (1.5, 0.033_894_853_524_689_272_933),
        (2.0, 0.004_677_734_981_047_265_837_9),
        (2.5, 0.000_406_952_017_444_958_939_56),
        (3.0, 2.209_049_699_858_544_137_3e-5),
        (3.5, 7.430_983_723_414_127_455_2e-7),
        (4.0, 1.541_725_790_028_001_885_2e-8),
    ];
    for (x, want) in erfc_ref {
        assert!(((erfc(x) - want) / want).abs() < 1e-8, "erfc({x})");
    }
    let igamc_ref = [
        (0.5, 0.3, 0.438_578_026_080_999_863_52),
        (1.0, 1.0, 0.367_879_441_171_442_321_6),
        (2.5, 1.7, 0.638_569_923_103_795_090_12),
        (4.5, 3.0, 0.739_918_292_094_653_703_46),
        (4.5, 12.0, 0.004_301_310_843_500_867_754_9),
        (5.0, 9.5, 0.040_262_682_340_609_948_62),
        (10.0, 4.0, 0.991_867_757_203_066_136_84),
        (24.0, 30.0, 0.114_645_912_714_273_835_59),
        (48.5, 40.0, 0.894_627_704_647_227_492_16),
        (3.0, 0.05, 0.999_979_932_506_375_602_05),
    ];
    for (a, x, want) in igamc_ref {
        assert!(((gamma_ur(a, x) - want) / want).abs() < 1e-8, "igamc({a}, {x})");
    }
}

fn alternating(n: usize) -> BitString {
    BitString::from_bits((0..n).map(|i| i % 2 == 0))
}

#[test]
fn degenerate_sequences() {
    let alt = alternating(1000);
    assert_eq!(frequency_test(&alt).unwrap(), 1.0);
    assert!(runs_test(&alt).unwrap() < 1e-10);
    let zeros = BitString::zeros(1000);
    assert!(frequency_test(&zeros).unwrap() < 1e-10);
    // the frequency prerequisite fails, so runs reports 0
    assert_eq!(runs_test(&zeros).unwrap(), 0.0);
    assert!(cusum_test(&zeros, Direction::Forward).unwrap() < 1e-10);
    assert!(block_frequency_test(&zeros, 10).unwrap() < 1e-10);
    // alternating blocks are perfectly balanced
    assert!((block_frequency_test(&alt, 10).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn short_input_rejected() {
    let s = BitString::zeros(99);
    assert!(frequency_test(&s).is_err());
    assert!(runs_test(&s).is_err());
    assert!(cusum_test(&s, Direction::Backward).is_err());
    assert!(block_frequency_test(&s, 10).is_err());
    assert!(block_frequency_test(&BitString::zeros(200), 1).is_err());
    assert!(battery(&BitString::zeros(9_699), 97, 20, 0.01).is_err());
    assert!(battery(&BitString::zeros(20_000), 97, 20, 1.5).is_err());
}

#[test]
fn cusum_directions_differ_on_reversal() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let s = BitString::random(1000, &mut rng);
    let rev = BitString::from_bits((0..1000).rev().map(|i| s.get(i)));
    assert_eq!(cusum_test(&s, Direction::Forward).unwrap(), cusum_test(&rev, Direction::Backward).unwrap());
    assert_eq!(cusum_test(&s, Direction::Backward).unwrap(), cusum_test(&rev, Direction::Forward).unwrap());
}

#[test]
fn generator_output_passes() {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let bits = BitString::random(97 * 6300, &mut rng);
    let reports = battery(&bits, 97, 20, DEFAULT_ALPHA).unwrap();
    assert_eq!(reports.len(), TESTS.len());
    for r in &reports {
        assert_eq!(r.p_values.len(), 97);
        assert!(r.passed >= 94, "{}: {}", r.name, r.proportion_label());
        assert!(r.p_values.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(r.uniformity > 1e-4, "{}: uniformity {}", r.name, r.uniformity);
    }
}

#[test]
fn biased_bits_fail() {
    use rand::Rng;
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let bits = BitString::from_bits((0..97 * 2000).map(|_| rng.gen_bool(0.56)));
    let reports = battery(&bits, 97, 20, DEFAULT_ALPHA).unwrap();
    assert!(reports[0].passed < 60, "{}", reports[0].proportion_label());
}

#[test]
fn report_bookkeeping() {
    let r = TestReport::from_p_values("x", vec![0.5, 0.005, 0.2, 0.01], 0.01);
    assert_eq!(r.passed, 3);
    assert_eq!(r.proportion_label(), "3/4");
    assert!((r.proportion - 0.75).abs() < 1e-15);
    // perfectly spread p-values: chi-square 0, uniformity 1
    let spread: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
    assert!((uniformity_p_value(&spread) - 1.0).abs() < 1e-12);
    assert!(uniformity_p_value(&[]).is_nan());
}

#[test]
fn thread_count_does_not_matter() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let bits = BitString::random(97 * 1000, &mut rng);
    let run = |k| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .unwrap()
            .install(|| battery(&bits, 97, 20, 0.01).unwrap())
    };
    assert_eq!(run(1), run(4));
}
