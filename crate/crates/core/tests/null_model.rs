use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatembed::feature_space::{distance, EmbeddedPoint};
use spatembed::graph::Level;
use spatembed::significance::{
    fit_null_scaling, sample_null, z_score, NullRecord, NullSamples, NullSamplingConfig,
    NullStatistic,
};

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut with_last: Vec<Vec<usize>> = combinations(n - 1, k - 1);
    for c in &mut with_last {
        c.push(n - 1);
    }
    let mut out = combinations(n - 1, k);
    out.extend(with_last);
    out
}

#[test]
fn sampled_null_means_bracket_full_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..20 {
        let count = rng.gen_range(4..=8);
        let pts: Vec<EmbeddedPoint<f64>> = (0..count)
            .map(|_| EmbeddedPoint(std::array::from_fn(|_| rng.gen_range(-2.0..2.0))))
            .collect();
        let sizes: Vec<usize> = (2..=4.min(count)).collect();
        let config = NullSamplingConfig {
            set_sizes: sizes.clone(),
            sets_per_size: 100,
            pair_budget: 1000,
            seed: trial,
            statistic: NullStatistic::SetMeans,
        };
        let samples = sample_null(&pts, &config).unwrap();
        for (rec, &size) in samples.records.iter().zip(&sizes) {
            let sets = combinations(count, size);
            let means: Vec<f64> = sets
                .iter()
                .map(|s| {
                    let mut sum = 0.0;
                    let mut c = 0.0;
                    for a in 0..s.len() {
                        for b in a + 1..s.len() {
                            sum += distance(&pts[s[a]], &pts[s[b]]);
                            c += 1.0;
                        }
                    }
                    sum / c
                })
                .collect();
            let exact = means.iter().sum::<f64>() / means.len() as f64;
            let tol = 4.0 * rec.std / (rec.sets as f64).sqrt();
            assert!(
                (rec.mean - exact).abs() <= tol + 1e-12,
                "size {size}: {} vs {exact} (tol {tol})",
                rec.mean
            );
        }
    }
}

fn noisy_samples(a: f64, alpha: f64, noise: f64, seed: u64) -> NullSamples<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = [10usize, 15, 20, 30, 50, 75, 100, 200, 350, 500];
    NullSamples {
        records: sizes
            .iter()
            .map(|&n| NullRecord {
                set_size: n,
                mean: 1.0,
                std: a * (n as f64).powf(-alpha) * (1.0 + noise * rng.gen_range(-1.0..1.0)),
                sets: 100,
            })
            .collect(),
    }
}

/// Closed-form OLS on (ln N, ln σ), independent of the library routine.
fn ols(samples: &NullSamples<f64>) -> (f64, f64) {
    let xs: Vec<f64> = samples.records.iter().map(|r| (r.set_size as f64).ln()).collect();
    let ys: Vec<f64> = samples.records.iter().map(|r| r.std.ln()).collect();
    let n = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (((sy - slope * sx) / n).exp(), -slope)
}

#[test]
fn noisy_power_law_recovered() {
    for (seed, alpha) in [(1u64, 0.5), (2, 1.0), (3, 0.75)] {
        let s = noisy_samples(16.45, alpha, 0.05, seed);
        let m = fit_null_scaling(&s, None).unwrap();
        assert!((m.alpha - alpha).abs() <= 0.15);
        let (a_ols, alpha_ols) = ols(&s);
        assert!((m.alpha - alpha_ols).abs() < 1e-10);
        assert!((m.a - a_ols).abs() < 1e-9 * a_ols);
        assert!(m.fit_residual > 0.0 && m.fit_residual < 0.05);
    }
}

#[test]
fn z_increases_with_group_size_above_null_mean() {
    let m = fit_null_scaling(&noisy_samples(3.0, 0.6, 0.0, 0), None).unwrap();
    let mut last = f64::NEG_INFINITY;
    for n in [2usize, 3, 10, 50, 51, 400, 10_000] {
        let z = z_score(&m, Level::Country, "g", n, m.mu_r + 0.01).z;
        assert!(z > last);
        last = z;
    }
}

#[test]
fn pooled_statistic_is_selectable() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<EmbeddedPoint<f64>> = (0..500)
        .map(|_| EmbeddedPoint(std::array::from_fn(|_| rng.gen::<f64>())))
        .collect();
    let mut config = NullSamplingConfig {
        set_sizes: vec![10, 40, 160],
        sets_per_size: 30,
        pair_budget: 100_000,
        seed: 3,
        statistic: NullStatistic::PooledPairs,
    };
    let pooled = sample_null(&pts, &config).unwrap();
    config.statistic = NullStatistic::SetMeans;
    let means = sample_null(&pts, &config).unwrap();
    // pooled spread is a property of single pairs and barely moves with N;
    // the spread of set means shrinks
    let p = &pooled.records;
    let s = &means.records;
    assert!((p[0].std / p[2].std - 1.0).abs() < 0.3);
    assert!(s[0].std / s[2].std > 2.0);
}
