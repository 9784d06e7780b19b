use misoifc_core::numerics::{arg, sample_cn01, RngStream, StreamId};

#[test]
fn cn01_moments_over_a_million_draws() {
    let mut rng = RngStream::new(2024, 9);
    let n = 1_000_000;
    let v = sample_cn01(&mut rng, n);
    let (mut sre, mut sim, mut power, mut re2) = (0.0, 0.0, 0.0, 0.0);
    for c in v.iter() {
        sre += c.re;
        sim += c.im;
        power += c.norm_sqr();
        re2 += c.re * c.re;
    }
    let n = n as f64;
    assert!((sre / n).abs() < 0.005, "mean re {}", sre / n);
    assert!((sim / n).abs() < 0.005, "mean im {}", sim / n);
    assert!((power / n - 1.0).abs() < 0.01, "variance {}", power / n);
    assert!((re2 / n - 0.5).abs() < 0.01, "real-part variance {}", re2 / n);
}

#[test]
fn cn01_phase_is_uniform() {
    const BINS: usize = 16;
    let mut rng = RngStream::new(5, 9);
    let n = 160_000;
    let mut counts = [0usize; BINS];
    for c in sample_cn01(&mut rng, n).iter() {
        let u = (arg(*c) + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
        counts[((u * BINS as f64) as usize).min(BINS - 1)] += 1;
    }
    let expected = n as f64 / BINS as f64;
    let chi2: f64 = counts.iter().map(|&k| (k as f64 - expected).powi(2) / expected).sum();
    // 99.9th percentile of χ² with 15 degrees of freedom
    assert!(chi2 < 37.7, "chi-square {chi2}");
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let draw = |seed, id| {
        let mut r = RngStream::derive(seed, id);
        (0..64).map(|_| r.standard_normal()).collect::<Vec<f64>>()
    };
    assert_eq!(draw(3, StreamId::Channel), draw(3, StreamId::Channel));
    assert_ne!(draw(3, StreamId::Channel), draw(3, StreamId::TestSet));
    assert_ne!(draw(3, StreamId::Channel), draw(4, StreamId::Channel));
}

#[test]
fn streams_do_not_interfere() {
    let mut a = RngStream::derive(1, StreamId::Channel);
    let mut b = RngStream::derive(1, StreamId::ExplorationNoise);
    let alone: Vec<f64> = (0..32).map(|_| a.standard_normal()).collect();

    let mut a2 = RngStream::derive(1, StreamId::Channel);
    let interleaved: Vec<f64> = (0..32)
        .map(|_| {
            b.standard_normal();
            a2.standard_normal()
        })
        .collect();
    assert_eq!(alone, interleaved);
}
