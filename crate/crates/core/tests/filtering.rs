mod common;

use std::f64::consts::PI;

use common::{Draws, KahanSum};
use ctfbp::fbp::filter_rows;
use ctfbp::filters::{
    classical_window, filter_from_window, optimized_filter_denoised, optimized_filter_measured,
    optimized_filter_reference, wiener_denoise, FilterSpec, Window,
};
use ctfbp::geometry::{FrequencyGrid, ParallelGeometry, Sinogram};
use ctfbp::noise::{add_white_noise, noise_level, NoiseSpec};
use ctfbp::phantoms::{radon_sample, shepp_logan};

fn random_sinogram(g: ParallelGeometry, d: &mut Draws) -> Sinogram {
    let vals = (0..g.n_radial() * g.n_angles()).map(|_| d.normal()).collect();
    Sinogram::from_values(g, vals).unwrap()
}

/// `K(m) = (Δσ/2π) Σ_k w_k A(σ_k) cos(σ_k m h)`, summed directly.
fn direct_kernel(filter: &FilterSpec, grid: &FrequencyGrid, h: f64, m: i64) -> f64 {
    let mut acc = KahanSum::default();
    for (k, (&s, &a)) in grid.frequencies().iter().zip(filter.samples()).enumerate() {
        acc.add(grid.trapezoid_weight(k) * a * (s * m as f64 * h).cos());
    }
    acc.value() * grid.step() / (2.0 * PI)
}

#[test]
fn fft_filtering_matches_direct_convolution() {
    let mut d = Draws::new(4, 0);
    for (n_angles, window) in [(40, Window::RamLak), (61, Window::Hamming { beta: 0.7 }), (90, Window::Cosine)] {
        let g = ParallelGeometry::from_angles(n_angles, 1.0).unwrap();
        let grid = FrequencyGrid::for_geometry(&g);
        let filter = filter_from_window(&window, &grid, g.bandwidth()).unwrap();
        let s = random_sinogram(g, &mut d);
        let out = filter_rows(&s, &filter, &grid).unwrap();
        let m = g.half_count() as i64;
        let m_ext = g.extended_half_count() as i64;
        let kernel: Vec<f64> = (-(m + m_ext)..=(m + m_ext))
            .map(|k| direct_kernel(&filter, &grid, g.step(), k))
            .collect();
        for j in [0, n_angles / 2, n_angles - 1] {
            let mut scale = 0.0f64;
            let mut worst = 0.0f64;
            for l in -m_ext..=m_ext {
                let mut acc = KahanSum::default();
                for i in -m..=m {
                    acc.add(s.get(i, j) * kernel[(l - i + m + m_ext) as usize]);
                }
                let expected = g.step() * acc.value();
                scale = scale.max(expected.abs());
                worst = worst.max((out.get(l, j) - expected).abs());
            }
            assert!(worst < 1e-8 * scale, "{window}, N_φ={n_angles}, j={j}: {worst} vs {scale}");
        }
    }
}

#[test]
fn ram_lak_impulse_response_closed_form() {
    for n_angles in [30, 90, 360] {
        let g = ParallelGeometry::from_angles(n_angles, 1.0).unwrap();
        let grid = FrequencyGrid::for_geometry(&g);
        let filter = filter_from_window(&Window::RamLak, &grid, g.bandwidth()).unwrap();
        let mut s = Sinogram::from_fn(g, |i, _| if i == 0 { 1.0 } else { 0.0 });
        s = s.scaled(1.0);
        let out = filter_rows(&s, &filter, &grid).unwrap();
        let (l_band, p, h) = (g.bandwidth(), grid.pad_length() as f64, g.step());
        let closed = |m: i64| -> f64 {
            if m == 0 {
                l_band * l_band / (2.0 * PI)
            } else if m % 2 == 0 {
                0.0
            } else {
                -2.0 * l_band * l_band / (PI * p * p * (PI * m as f64 / p).sin().powi(2))
            }
        };
        let k0 = closed(0);
        for m in -(g.extended_half_count() as i64)..=g.extended_half_count() as i64 {
            let got = out.get(m, 0) / h;
            assert!((got - closed(m)).abs() < 1e-8 * k0, "N_φ={n_angles} m={m}: {got} vs {}", closed(m));
            // far from the pad length the grid kernel approaches -2L²/(π³m²)
            if m % 2 != 0 && (m.abs() as f64) < 0.05 * p {
                let continuous = -2.0 * l_band * l_band / (PI.powi(3) * (m * m) as f64);
                assert!((got - continuous).abs() < 0.02 * continuous.abs());
            }
        }
    }
}

#[test]
fn epsilon_zero_degenerates_to_ram_lak() {
    let g = ParallelGeometry::from_angles(90, 1.0).unwrap();
    let grid = FrequencyGrid::for_geometry(&g);
    let clean = radon_sample(&shepp_logan(), &g).unwrap();
    let noisy = add_white_noise(&clean, &NoiseSpec::with_level(0.1, 3)).unwrap();
    let ram_lak = filter_from_window(&Window::RamLak, &grid, g.bandwidth()).unwrap();
    let filters = [
        optimized_filter_reference(&clean, &grid, 0.0).unwrap(),
        optimized_filter_measured(&noisy, &grid, 0.0).unwrap(),
        optimized_filter_denoised(&noisy, &grid, 0.0, 5).unwrap(),
    ];
    for f in &filters {
        for (k, (&a, &s)) in f.samples().iter().zip(grid.frequencies()).enumerate() {
            let band = if s.abs() <= g.bandwidth() * (1.0 + 1e-12) { s.abs() } else { 0.0 };
            assert!((a - band).abs() < 1e-12, "k={k}: {a} vs {band}");
            assert!((a - ram_lak.samples()[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn optimized_filter_is_bounded_even_and_shrinks_with_noise() {
    let g = ParallelGeometry::from_angles(120, 1.0).unwrap();
    let grid = FrequencyGrid::for_geometry(&g);
    let clean = radon_sample(&shepp_logan(), &g).unwrap();
    let eps = noise_level(0.1, &clean);
    let lo = optimized_filter_reference(&clean, &grid, 0.5 * eps).unwrap();
    let hi = optimized_filter_reference(&clean, &grid, 2.0 * eps).unwrap();
    for (k, &s) in grid.frequencies().iter().enumerate() {
        let (a, b) = (lo.samples()[k], hi.samples()[k]);
        assert!(a >= 0.0 && a <= s.abs() + 1e-15);
        assert!(b <= a + 1e-15, "more noise must not raise the filter");
        assert_eq!(a, lo.samples()[grid.mirror(k)]);
    }
}

#[test]
fn classical_windows_at_band_edge() {
    assert_eq!(classical_window(&Window::RamLak, 1.0).unwrap(), 1.0);
    assert!((classical_window(&Window::SheppLogan, 1.0).unwrap() - 2.0 / PI).abs() < 1e-15);
    assert!(classical_window(&Window::Cosine, 1.0).unwrap().abs() < 1e-15);
    assert!((classical_window(&Window::Hamming { beta: 0.55 }, 1.0).unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(classical_window(&Window::Hamming { beta: 0.8 }, 0.0).unwrap(), 1.0);
}

#[test]
fn wiener_passes_constants_and_reduces_noise() {
    let g = ParallelGeometry::from_angles(90, 1.0).unwrap();
    let flat = Sinogram::from_fn(g, |_, _| 3.0);
    let out = wiener_denoise(&flat, 5, Some(0.01)).unwrap();
    assert!(out.values().iter().all(|v| (v - 3.0).abs() < 1e-12));

    let clean = radon_sample(&shepp_logan(), &g).unwrap();
    let eps = noise_level(0.1, &clean);
    let noisy = add_white_noise(&clean, &NoiseSpec::with_level(eps, 8)).unwrap();
    let den = wiener_denoise(&noisy, 5, Some(eps * eps)).unwrap();
    let err = |s: &Sinogram| -> f64 {
        s.values().iter().zip(clean.values()).map(|(a, b)| (a - b).powi(2)).sum()
    };
    assert!(err(&den) < 0.6 * err(&noisy), "{} vs {}", err(&den), err(&noisy));
    assert!(wiener_denoise(&noisy, 4, None).is_err());
}
