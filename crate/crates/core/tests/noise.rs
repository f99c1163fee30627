use milstein_galerkin::noise::{read_path_dump, write_path_dump, MAX_DUMP_SEED};
use milstein_galerkin::scheme::TimeGrid;
use milstein_galerkin::{CovarianceSpectrum, IteratedIntegrals, WienerPath};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

/// One-sample Kolmogorov-Smirnov statistic against `N(0, sd^2)`.
fn ks_statistic(samples: &mut [f64], sd: f64) -> f64 {
    let normal = Normal::new(0.0, sd).unwrap();
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Critical value at level 0.001.
fn ks_critical(n: usize) -> f64 {
    1.95 / (n as f64).sqrt()
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn spec(n: usize) -> CovarianceSpectrum {
    CovarianceSpectrum::power_law(n, 2.0).unwrap()
}

#[test]
fn increments_are_gaussian_with_variance_k() {
    let grid = TimeGrid::new(1.0 / 64.0, 64).unwrap();
    let path = WienerPath::sample(&spec(64), grid, 7, 0).unwrap();
    let mut v = path.raw_increments().to_vec();
    let d = ks_statistic(&mut v, grid.step().sqrt());
    assert!(d < ks_critical(v.len()), "D = {d}");
}

#[test]
fn coarsened_increments_match_direct_sampling_on_the_coarse_grid() {
    let fine = TimeGrid::new(1.0 / 128.0, 128).unwrap();
    let mut coarse = Vec::new();
    let mut direct = Vec::new();
    for i in 0..4 {
        let p = WienerPath::sample(&spec(32), fine, 11, i).unwrap().coarsen(4).unwrap();
        assert_eq!(p.grid(), TimeGrid::new(1.0 / 32.0, 32).unwrap());
        coarse.extend_from_slice(p.raw_increments());
        let q = WienerPath::sample(&spec(32), p.grid(), 11, i).unwrap();
        direct.extend_from_slice(q.raw_increments());
    }
    let sd = (1.0f64 / 32.0).sqrt();
    let n = coarse.len();
    assert!(ks_statistic(&mut coarse, sd) < ks_critical(n));
    assert!(ks_statistic(&mut direct, sd) < ks_critical(n));
}

#[test]
fn coarsening_preserves_endpoints() {
    let grid = TimeGrid::new(1.0 / 48.0, 48).unwrap();
    let path = WienerPath::sample(&spec(5), grid, 3, 2).unwrap();
    for factor in [1, 2, 3, 16, 48] {
        let c = path.coarsen(factor).unwrap();
        for j in 1..=5 {
            assert!((c.endpoint(j) - path.endpoint(j)).abs() < 1e-13);
        }
    }
    assert_eq!(path.coarsen(1).unwrap(), path);
    assert!(path.coarsen(5).is_err());
    assert!(path.coarsen(0).is_err());
}

#[test]
fn sampling_is_reproducible_and_paths_are_distinct() {
    let grid = TimeGrid::new(0.125, 8).unwrap();
    let a = WienerPath::sample(&spec(4), grid, 5, 1).unwrap();
    assert_eq!(a, WienerPath::sample(&spec(4), grid, 5, 1).unwrap());
    assert_ne!(a.raw_increments(), WienerPath::sample(&spec(4), grid, 5, 2).unwrap().raw_increments());
    assert_ne!(a.raw_increments(), WienerPath::sample(&spec(4), grid, 6, 1).unwrap().raw_increments());
}

#[test]
fn pointwise_noise_variance() {
    let s = spec(16);
    let grid = TimeGrid::new(0.01, 100).unwrap();
    let x = 0.3;
    let mut v = Vec::new();
    for i in 0..40 {
        let p = WienerPath::sample(&s, grid, 9, i).unwrap();
        v.extend((1..=100).map(|n| p.noise_increment_at(&s, n, 16, x).powi(2)));
    }
    let (m, se) = mean_and_stderr(&v);
    let want = grid.step() * s.pointwise_variance(16, x);
    assert!((m - want).abs() < 4.0 * se, "{m} vs {want} +- {se}");
}

#[test]
fn covariance_tail() {
    let s = spec(100);
    assert!((s.trace() - (1..=100).map(|j| 1.0 / (j * j) as f64).sum::<f64>()).abs() < 1e-14);
    assert!((s.tail_trace(10) - (11..=100).map(|j| 1.0 / (j * j) as f64).sum::<f64>()).abs() < 1e-14);
    assert_eq!(s.alpha(), Some(1.0));
    let f = s.analytic_tail_fraction().unwrap();
    let exact_tail = std::f64::consts::PI.powi(2) / 6.0 - s.trace();
    assert!((f / (exact_tail / (std::f64::consts::PI.powi(2) / 6.0)) - 1.0).abs() < 1e-3);
    assert!(CovarianceSpectrum::power_law(4, 1.0).is_err());
    assert!(CovarianceSpectrum::from_eigenvalues(vec![1.0, -1.0]).is_err());
    let t = s.truncate(3);
    assert_eq!(t.tail_trace(3), 0.0);
}

#[test]
fn iterated_integral_identities() {
    let grid = TimeGrid::new(0.05, 20).unwrap();
    let path = WienerPath::sample(&spec(6), grid, 1, 0).unwrap();
    let it = IteratedIntegrals::from_path(&path, 6, 16).unwrap();
    for n in 1..=20 {
        let dw = path.step_increments(n);
        for i in 1..=6 {
            let d = it.get(n, i, i).unwrap();
            assert!((d - 0.5 * (dw[i - 1].powi(2) - 0.05)).abs() < 1e-15);
            for j in 1..=6 {
                let s = it.get(n, i, j).unwrap() + it.get(n, j, i).unwrap();
                let p = dw[i - 1] * dw[j - 1];
                if i != j {
                    assert!((s - p).abs() <= 1e-15 * (1.0 + p.abs()));
                }
            }
        }
    }
    assert!(it.get(0, 1, 1).is_err() && it.get(1, 7, 1).is_err());
    assert!(IteratedIntegrals::from_path(&path, 7, 16).is_err());
    assert!(IteratedIntegrals::from_path(&path, 6, 0).is_err());
}

/// `(A, dW_1)` of the Levy area of two motions over `[0, k]` from a fine
/// Riemann-Ito sum.
fn brute_force_area(rng: &mut ChaCha8Rng, k: f64, substeps: usize) -> (f64, f64) {
    let s = (k / substeps as f64).sqrt();
    let (mut w1, mut w2, mut area) = (0.0, 0.0, 0.0);
    for _ in 0..substeps {
        let d1 = s * Distribution::<f64>::sample(&StandardNormal, rng);
        let d2 = s * Distribution::<f64>::sample(&StandardNormal, rng);
        area += 0.5 * (w1 * d2 - w2 * d1);
        w1 += d1;
        w2 += d2;
    }
    (area, w1)
}

#[test]
fn levy_area_moments_match_fine_grid_simulation() {
    let k = 0.01;
    let grid = TimeGrid::new(k, 500).unwrap();
    let path = WienerPath::sample(&spec(40), grid, 21, 0).unwrap();
    let it = IteratedIntegrals::from_path(&path, 40, 100).unwrap();
    let mut a2 = Vec::new();
    let mut a2w2 = Vec::new();
    let mut i2 = Vec::new();
    for n in 1..=500 {
        for pair in 0..20 {
            let (i, j) = (2 * pair + 1, 2 * pair + 2);
            let iij = it.get(n, i, j).unwrap();
            let a = 0.5 * (iij - it.get(n, j, i).unwrap());
            let w = path.increment(n, i);
            a2.push(a * a);
            a2w2.push(a * a * w * w);
            i2.push(iij * iij);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut b2 = Vec::new();
    let mut b2w2 = Vec::new();
    for _ in 0..10_000 {
        let (a, w) = brute_force_area(&mut rng, k, 200);
        b2.push(a * a);
        b2w2.push(a * a * w * w);
    }
    // E[A^2] = k^2 / 4, E[A^2 dW^2] = 5 k^3 / 12, E[I^2] = k^2 / 2
    for (v, want) in [
        (&a2, k * k / 4.0),
        (&b2, k * k / 4.0),
        (&a2w2, 5.0 * k.powi(3) / 12.0),
        (&b2w2, 5.0 * k.powi(3) / 12.0),
        (&i2, k * k / 2.0),
    ] {
        let (m, se) = mean_and_stderr(v);
        assert!((m - want).abs() < 4.0 * se, "{m} vs {want} +- {se}");
    }
    let (ma, sa) = mean_and_stderr(&a2w2);
    let (mb, sb) = mean_and_stderr(&b2w2);
    assert!((ma - mb).abs() < 4.0 * (sa * sa + sb * sb).sqrt());
}

#[test]
fn dump_round_trip_through_a_file() {
    let grid = TimeGrid::new(1.0 / 16.0, 16).unwrap();
    let path = WienerPath::sample(&spec(8), grid, MAX_DUMP_SEED, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("path.bin");
    write_path_dump(&path, std::fs::File::create(&file).unwrap()).unwrap();
    let back = read_path_dump(std::fs::File::open(&file).unwrap(), 3).unwrap();
    assert_eq!(back, path);

    let bad = WienerPath::sample(&spec(8), grid, MAX_DUMP_SEED + 1, 3).unwrap();
    assert!(write_path_dump(&bad, Vec::new()).is_err());
    let mut bytes = std::fs::read(&file).unwrap();
    bytes.truncate(bytes.len() - 3);
    assert!(read_path_dump(bytes.as_slice(), 3).is_err());
}
