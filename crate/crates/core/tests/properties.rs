use ctfbp::filters::{optimized_filter_measured, Window, filter_from_window};
use ctfbp::geometry::{FrequencyGrid, ParallelGeometry, Sinogram};
use ctfbp::image::Image;
use ctfbp::io::{decode_image, decode_sinogram, encode_image, encode_sinogram};
use ctfbp::metrics::{mse, ssim};
use proptest::prelude::*;
use std::path::Path;

fn sinogram_strategy() -> impl Strategy<Value = Sinogram> {
    (8usize..40).prop_flat_map(|n| {
        let g = ParallelGeometry::from_angles(n, 1.0).unwrap();
        prop::collection::vec(-5.0f64..5.0, g.n_radial() * g.n_angles())
            .prop_map(move |v| Sinogram::from_values(g, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimized_filter_bounded_and_even(s in sinogram_strategy(), eps in 0.0f64..3.0) {
        let grid = FrequencyGrid::for_geometry(s.geometry());
        let f = optimized_filter_measured(&s, &grid, eps).unwrap();
        for (k, (&a, &sigma)) in f.samples().iter().zip(grid.frequencies()).enumerate() {
            prop_assert!(a >= 0.0 && a <= sigma.abs());
            prop_assert_eq!(a, f.samples()[grid.mirror(k)]);
        }
    }

    #[test]
    fn sinogram_codec_round_trips(s in sinogram_strategy()) {
        let back = decode_sinogram(&encode_sinogram(&s), Path::new("mem")).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn image_codec_round_trips(n in 2usize..20, seed in any::<u64>()) {
        let vals: Vec<f64> = (0..n * n).map(|k| ((k as u64 ^ seed) % 1000) as f64 * 1e-3 - 0.5).collect();
        let img = Image::from_values(n, 1.3, vals).unwrap();
        prop_assert_eq!(decode_image(&encode_image(&img), Path::new("mem")).unwrap(), img);
    }

    #[test]
    fn metrics_identities(n in 11usize..24, shift in -2.0f64..2.0) {
        let vals: Vec<f64> = (0..n * n).map(|k| ((k * 7919) % 97) as f64 / 97.0).collect();
        let a = Image::from_values(n, 1.0, vals.clone()).unwrap();
        let b = Image::from_values(n, 1.0, vals.iter().map(|v| v + shift).collect()).unwrap();
        prop_assert_eq!(mse(&a, &a, false).unwrap(), 0.0);
        prop_assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((mse(&a, &b, false).unwrap() - shift * shift).abs() < 1e-12);
        prop_assert!(ssim(&b, &a).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn classical_filters_are_even_and_banded(n in 8usize..200, beta in 0.5f64..=1.0) {
        let g = ParallelGeometry::from_angles(n, 1.0).unwrap();
        let grid = FrequencyGrid::for_geometry(&g);
        for w in [Window::RamLak, Window::SheppLogan, Window::Cosine, Window::Hamming { beta }] {
            let f = filter_from_window(&w, &grid, g.bandwidth()).unwrap();
            for (k, (&a, &s)) in f.samples().iter().zip(grid.frequencies()).enumerate() {
                prop_assert_eq!(a, f.samples()[grid.mirror(k)]);
                prop_assert!(a <= s.abs() + 1e-12);
                if s.abs() > g.bandwidth() * (1.0 + 1e-9) {
                    prop_assert_eq!(a, 0.0);
                }
            }
        }
    }
}
