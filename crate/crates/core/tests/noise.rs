mod common;

use common::double_integral_even_kernel;
use ctfbp::geometry::{dft_radial, ParallelGeometry};
use ctfbp::noise::{
    derive_seed, expected_discrete_noise_power, ou_spectrum_expectation, sample_ou_field,
    white_noise, OUCovariance,
};

/// Empirical covariance of lattice points `(i1, j1)` and `(i2, j2)`.
fn empirical_cov(
    geometry: &ParallelGeometry,
    cov: &OUCovariance,
    draws: u64,
    pairs: &[((i64, usize), (i64, usize))],
) -> Vec<f64> {
    let mut acc = vec![0.0; pairs.len()];
    for seed in 0..draws {
        let f = sample_ou_field(geometry, cov, 1000 + seed).unwrap();
        for (a, &((i1, j1), (i2, j2))) in acc.iter_mut().zip(pairs) {
            *a += f.get(i1, j1) * f.get(i2, j2);
        }
    }
    acc.iter().map(|a| a / draws as f64).collect()
}

fn check_ou_moments(n_angles: usize, draws: u64, tol: f64) {
    let g = ParallelGeometry::from_angles(n_angles, 1.0).unwrap();
    let cov = OUCovariance::new(3.0, 1.0).unwrap();
    let pairs = [((0, 0), (0, 0)), ((0, 1), (1, 1)), ((-1, 2), (-1, 3)), ((2, 0), (0, 1))];
    let got = empirical_cov(&g, &cov, draws, &pairs);
    for (&((i1, j1), (i2, j2)), v) in pairs.iter().zip(got) {
        let ds = (i1 - i2) as f64 * g.step();
        let dphi = g.angle(j1) - g.angle(j2);
        let expected = cov.delta2(ds, dphi);
        assert!(
            (v - expected).abs() < tol * cov.delta2(0.0, 0.0),
            "N_φ={n_angles} pair ({i1},{j1})-({i2},{j2}): {v} vs {expected}"
        );
    }
}

#[test]
fn ou_field_moments_cholesky_path() {
    check_ou_moments(12, 6000, 0.05);
}

#[test]
fn ou_field_moments_recursion_path() {
    // 63 × 100 lattice points, above the Cholesky limit
    check_ou_moments(100, 3000, 0.07);
}

#[test]
fn ou_field_is_seed_deterministic() {
    let g = ParallelGeometry::from_angles(100, 1.0).unwrap();
    let cov = OUCovariance::new(2.0, 1.0).unwrap();
    assert_eq!(sample_ou_field(&g, &cov, 5).unwrap(), sample_ou_field(&g, &cov, 5).unwrap());
    assert_ne!(sample_ou_field(&g, &cov, 5).unwrap(), sample_ou_field(&g, &cov, 6).unwrap());
}

#[test]
fn ou_spectrum_matches_double_integral() {
    for &(sigma, a, r) in &[(0.0, 1.0, 1.0), (2.5, 1.0, 1.0), (7.0, 4.0, 0.8), (0.3, 0.5, 1.5)] {
        let cov = OUCovariance::new(a, r).unwrap();
        let kernel = |u: f64| 0.25 * a * a * (-a * u.abs()).exp();
        let quad = double_integral_even_kernel(kernel, sigma, r, a * a, None);
        let closed = ou_spectrum_expectation(sigma, &cov);
        assert!((closed - quad).abs() < 1e-8 * quad.abs().max(1e-3), "({sigma},{a},{r}): {closed} vs {quad}");
        assert!((cov.delta2(0.4, 0.0) - kernel(0.4)).abs() < 1e-15);
    }
}

#[test]
fn box_spectrum_matches_double_integral() {
    for &(sigma, a, r) in &[(0.0, 2.0, 1.0), (1e-6, 2.0, 1.0), (3.0, 1.5, 1.0), (9.0, 5.0, 0.7)] {
        let cov = OUCovariance::boxcar(a, r).unwrap();
        let kernel = |u: f64| cov.delta(u) * cov.delta(0.0);
        let quad = double_integral_even_kernel(kernel, sigma, r, a * a, Some(0.5 / a));
        let closed = ou_spectrum_expectation(sigma, &cov);
        assert!((closed - quad).abs() < 1e-8 * quad.abs(), "({sigma},{a},{r}): {closed} vs {quad}");
    }
}

#[test]
fn white_noise_spectral_power() {
    let g = ParallelGeometry::from_angles(100, 1.0).unwrap();
    let level = 0.3;
    let freqs = [0.0, 1.0, 7.5, 20.0, g.bandwidth()];
    let mut power = vec![0.0; freqs.len()];
    let mut rows = 0;
    for r in 0..20 {
        let xi = white_noise(&g, level, derive_seed(9, 100, 0.1, r));
        for j in 0..g.n_angles() {
            for (p, &s) in power.iter_mut().zip(&freqs) {
                *p += dft_radial(&xi, s, j).unwrap().norm_sqr();
            }
            rows += 1;
        }
    }
    let expected = expected_discrete_noise_power(&g, level, 1.0);
    for (p, s) in power.iter().zip(freqs) {
        let mean = p / rows as f64;
        // 2000 rows: relative standard error ≲ 3%
        assert!((mean - expected).abs() < 0.1 * expected, "σ={s}: {mean} vs {expected}");
    }
}

#[test]
fn white_noise_sample_moments() {
    let g = ParallelGeometry::from_angles(200, 1.0).unwrap();
    let xi = white_noise(&g, 2.0, 77);
    let n = xi.values().len() as f64;
    let mean = xi.values().iter().sum::<f64>() / n;
    let var = xi.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 5.0 * 2.0 / n.sqrt());
    assert!((var - 4.0).abs() < 0.05 * 4.0);
    // neighbouring samples uncorrelated
    let lag: f64 = xi.values().windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1.0);
    assert!(lag.abs() < 5.0 * 4.0 / n.sqrt());
}
