//! Whitened distances against an explicit inverse-covariance quadratic form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatembed::feature_space::{
    distance, fit_embedding, mean_pairwise_distance, EmbeddedPoint, DEFAULT_EPS_EIG,
};

type M4 = [[f64; 4]; 4];

/// Gauss–Jordan inverse with partial pivoting.
fn invert(m: &M4) -> M4 {
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, r) in inv.iter_mut().enumerate() {
        r[i] = 1.0;
    }
    for c in 0..4 {
        let p = (c..4).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for k in 0..4 {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for r in 0..4 {
            if r != c {
                let f = a[r][c];
                for k in 0..4 {
                    a[r][k] -= f * a[c][k];
                    inv[r][k] -= f * inv[c][k];
                }
            }
        }
    }
    inv
}

fn sample_cov(rows: &[[f64; 4]]) -> M4 {
    let n = rows.len() as f64;
    let mut mean = [0.0; 4];
    for r in rows {
        for d in 0..4 {
            mean[d] += r[d] / n;
        }
    }
    let mut c = [[0.0; 4]; 4];
    for r in rows {
        for p in 0..4 {
            for q in 0..4 {
                c[p][q] += (r[p] - mean[p]) * (r[q] - mean[q]) / (n - 1.0);
            }
        }
    }
    c
}

/// Rows `L z + shift` with `z` standard normal-ish and random mixing `L`.
fn correlated(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 4]> {
    let mix: M4 = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0)));
    let shift: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
    (0..n)
        .map(|_| {
            let z: [f64; 4] = std::array::from_fn(|_| {
                (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0
            });
            std::array::from_fn(|r| shift[r] + (0..4).map(|k| mix[r][k] * z[k]).sum::<f64>())
        })
        .collect()
}

fn quad_form(inv: &M4, x: &[f64; 4], y: &[f64; 4]) -> f64 {
    let d: [f64; 4] = std::array::from_fn(|i| x[i] - y[i]);
    (0..4)
        .map(|p| (0..4).map(|q| d[p] * inv[p][q] * d[q]).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

#[test]
fn whitened_distance_equals_mahalanobis() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let rows = correlated(&mut rng, 1000);
        let model = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
        assert_eq!(model.retained, 4);
        let inv = invert(&sample_cov(&rows));
        for _ in 0..500 {
            let (x, y) = (&rows[rng.gen_range(0..1000)], &rows[rng.gen_range(0..1000)]);
            let want = quad_form(&inv, x, y);
            let got = distance(&model.transform(x), &model.transform(y));
            assert!((got - want).abs() <= 1e-8 * want.max(1e-300), "{got} vs {want}");
        }
    }
}

#[test]
fn transform_matches_matrix_vector_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows = correlated(&mut rng, 300);
    let m = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
    for _ in 0..100 {
        let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-20.0..20.0));
        let got = m.transform(&x).0;
        for c in 0..4 {
            let want: f64 = (0..4)
                .map(|d| m.eigenvectors[c][d] * (x[d] - m.mean[d]))
                .sum::<f64>()
                / m.eigenvalues[c].sqrt();
            assert!((got[c] - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
}

#[test]
fn whitened_training_covariance_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rows = correlated(&mut rng, 2000);
    let m = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
    for c in 0..4 {
        for d in 0..4 {
            let dot: f64 = (0..4).map(|k| m.eigenvectors[c][k] * m.eigenvectors[d][k]).sum();
            assert!((dot - if c == d { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
    }
    let pts: Vec<[f64; 4]> = rows.iter().map(|r| m.transform(r).0).collect();
    let cov = sample_cov(&pts);
    for p in 0..4 {
        for q in 0..4 {
            assert!((cov[p][q] - if p == q { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
    }
}

#[test]
fn known_covariance_sample_whitens_to_identity() {
    // x = L z with z iid uniform scaled to unit variance, so cov(x) = L L^T
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let l: M4 = [
        [2.0, 0.0, 0.0, 0.0],
        [0.5, 1.0, 0.0, 0.0],
        [-1.0, 0.3, 0.7, 0.0],
        [0.2, 0.2, 0.2, 0.1],
    ];
    let rows: Vec<[f64; 4]> = (0..10_000)
        .map(|_| {
            let z: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-3f64.sqrt()..3f64.sqrt()));
            std::array::from_fn(|r| (0..4).map(|k| l[r][k] * z[k]).sum())
        })
        .collect();
    let m = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
    for p in 0..4 {
        for q in 0..4 {
            let want: f64 = (0..4).map(|k| l[p][k] * l[q][k]).sum();
            assert!((m.covariance[p][q] - want).abs() < 5e-2 * want.abs().max(1.0));
        }
    }
    let pts: Vec<[f64; 4]> = rows.iter().map(|r| m.transform(r).0).collect();
    let cov = sample_cov(&pts);
    for p in 0..4 {
        for q in 0..4 {
            assert!((cov[p][q] - if p == q { 1.0 } else { 0.0 }).abs() < 5e-2);
        }
    }
}

#[test]
fn isotropic_data_gives_euclidean_distances() {
    // columns of +-1 patterns: orthogonal, equal variance, zero mean
    let mut rows = Vec::new();
    for b in 0..16u32 {
        rows.push(std::array::from_fn(|d| if b >> d & 1 == 1 { 1.0 } else { -1.0 }));
    }
    let m = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
    let scale = (16.0f64 / 15.0).sqrt();
    for x in &rows {
        for y in &rows {
            let plain: f64 = (0..4).map(|d| (x[d] - y[d]).powi(2)).sum::<f64>().sqrt();
            let got = distance(&m.transform(x), &m.transform(y));
            assert!((got * scale - plain).abs() < 1e-8);
        }
    }
}

#[test]
fn affine_maps_leave_distances_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows = correlated(&mut rng, 500);
    let a: M4 = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
    let b: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-100.0..100.0));
    let mapped: Vec<[f64; 4]> = rows
        .iter()
        .map(|x| std::array::from_fn(|r| b[r] + (0..4).map(|k| a[r][k] * x[k]).sum::<f64>()))
        .collect();
    let m1 = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
    let m2 = fit_embedding(&mapped, DEFAULT_EPS_EIG).unwrap();
    for _ in 0..1000 {
        let (i, j) = (rng.gen_range(0..500), rng.gen_range(0..500));
        let d1 = distance(&m1.transform(&rows[i]), &m1.transform(&rows[j]));
        let d2 = distance(&m2.transform(&mapped[i]), &m2.transform(&mapped[j]));
        assert!((d1 - d2).abs() <= 1e-6 * d1.max(1e-12));
    }
}

#[test]
fn metric_axioms() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rows = correlated(&mut rng, 400);
    let m = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
    let pts: Vec<_> = rows.iter().map(|r| m.transform(r)).collect();
    for _ in 0..5000 {
        let (x, y, z) = (
            &pts[rng.gen_range(0..400)],
            &pts[rng.gen_range(0..400)],
            &pts[rng.gen_range(0..400)],
        );
        assert_eq!(distance(x, y), distance(y, x));
        assert!(distance(x, z) <= distance(x, y) + distance(y, z) + 1e-9);
    }
}

fn brute_mean(pts: &[EmbeddedPoint<f64>]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for i in 0..pts.len() {
        for j in 0..i {
            s += distance(&pts[i], &pts[j]);
            c += 1.0;
        }
    }
    s / c
}

#[test]
fn exact_mean_matches_all_pairs_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let rows = correlated(&mut rng, 100);
    let m = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
    let pts = m.transform_all(&rows);
    let r = mean_pairwise_distance(&pts, 4950, &mut rng).unwrap();
    assert!(r.exact);
    assert_eq!(r.pair_count_used, 4950);
    assert!((r.mean - brute_mean(&pts)).abs() <= 1e-12 * r.mean);
}

#[test]
fn sampled_mean_is_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let rows = correlated(&mut rng, 120);
    let m = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
    let pts = m.transform_all(&rows);
    let exact = brute_mean(&pts);
    let runs: Vec<f64> = (0..200)
        .map(|_| {
            let r = mean_pairwise_distance(&pts, 300, &mut rng).unwrap();
            assert!(!r.exact);
            r.mean
        })
        .collect();
    let grand = runs.iter().sum::<f64>() / 200.0;
    let sd = (runs.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / 199.0).sqrt();
    let se = sd / 200f64.sqrt();
    assert!((grand - exact).abs() < 3.0 * se, "{grand} vs {exact} (se {se})");
}

#[test]
fn f32_instantiation_agrees_with_f64() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let rows = correlated(&mut rng, 500);
    let rows32: Vec<[f32; 4]> = rows.iter().map(|r| r.map(|x| x as f32)).collect();
    let m64 = fit_embedding(&rows, DEFAULT_EPS_EIG).unwrap();
    let m32 = fit_embedding(&rows32, 1e-6f32).unwrap();
    for _ in 0..200 {
        let (i, j) = (rng.gen_range(0..500), rng.gen_range(0..500));
        let d64 = distance(&m64.transform(&rows[i]), &m64.transform(&rows[j]));
        let d32 = distance(&m32.transform(&rows32[i]), &m32.transform(&rows32[j])) as f64;
        assert!((d64 - d32).abs() <= 1e-3 * d64.max(1e-3));
    }
}
