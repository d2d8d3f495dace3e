use std::path::PathBuf;

use proptest::prelude::*;
use speckle_core::filters::{FilterConfig, FilterKind};
use speckle_core::imaging::*;
use speckle_core::metrics::{mse, psnr_from_mse, ssim};
use speckle_core::noise::{add_speckle, NoiseSpec};
use speckle_core::tensor::{concat_channels, maxpool2x2, relu, split_channels, Tensor};

fn image(max_side: usize) -> impl Strategy<Value = GrayImage<f64>> {
    (3..=max_side, 3..=max_side).prop_flat_map(|(h, w)| {
        prop::collection::vec(0.0..=1.0f64, h * w)
            .prop_map(move |px| GrayImage::new(h, w, px).unwrap())
    })
}

fn tensor(shape: [usize; 4]) -> impl Strategy<Value = Tensor<f64>> {
    let n: usize = shape.iter().product();
    prop::collection::vec(-2.0..2.0f64, n)
        .prop_map(move |d| Tensor::new(shape.to_vec(), d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filters_preserve_shape_and_range(img in image(12)) {
        let cfg = FilterConfig::default();
        for kind in FilterKind::ALL {
            let out = cfg.apply(kind, &img).unwrap();
            prop_assert_eq!(out.dims(), img.dims());
            prop_assert!(out.pixels().iter().all(|p| (0.0..=1.0).contains(p)), "{:?}", kind);
        }
    }

    #[test]
    fn filters_fix_constant_images(h in 3usize..10, w in 3usize..10, v in 0.0..=1.0f64) {
        let img = GrayImage::filled(h, w, v);
        let cfg = FilterConfig::default();
        for kind in FilterKind::ALL {
            let out = cfg.apply(kind, &img).unwrap();
            prop_assert!(out.pixels().iter().all(|p| (p - v).abs() < 1e-12), "{:?}", kind);
        }
    }

    #[test]
    fn speckle_stays_in_unit_range(img in image(10), var in 0.0..2.0f64, seed: u64) {
        let noisy = add_speckle(&img, NoiseSpec::new(var, seed).unwrap()).unwrap();
        prop_assert!(noisy.pixels().iter().all(|p| (0.0..=1.0).contains(p)));
        // Black pixels stay black under multiplicative noise.
        for (c, n) in img.pixels().iter().zip(noisy.pixels()) {
            if *c == 0.0 {
                prop_assert_eq!(*n, 0.0);
            }
        }
    }

    #[test]
    fn metric_symmetries(a in image(14), seed: u64) {
        let b = add_speckle(&a, NoiseSpec::new(0.2, seed).unwrap()).unwrap();
        let m = mse(&a, &b).unwrap();
        prop_assert!(m >= 0.0);
        prop_assert_eq!(m, mse(&b, &a).unwrap());
        if a.height() >= 11 && a.width() >= 11 {
            let s = ssim(&a, &b).unwrap();
            prop_assert!(s <= 1.0 + 1e-12);
            prop_assert!((s - ssim(&b, &a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn psnr_decreases_with_mse(m1 in 1e-6..1.0f64, m2 in 1e-6..1.0f64) {
        prop_assume!(m1 < m2);
        prop_assert!(psnr_from_mse(m1, 1.0) > psnr_from_mse(m2, 1.0));
    }

    #[test]
    fn png_round_trip_within_quantization(img in image(9)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        save_png(&img, &path).unwrap();
        let back: GrayImage<f64> = load_png(&path).unwrap();
        prop_assert_eq!(back.dims(), img.dims());
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            prop_assert!((a - b).abs() <= 0.5 / 255.0 + 1e-9);
        }
    }

    #[test]
    fn resize_to_same_size_is_identity(img in image(9)) {
        let (h, w) = img.dims();
        let out = resize_bilinear(&img, h, w).unwrap();
        for (a, b) in img.pixels().iter().zip(out.pixels()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn manifest_partition_is_exact(n in 1usize..120, seed: u64) {
        let items: Vec<(PathBuf, ClassLabel)> =
            (0..n).map(|i| (PathBuf::from(format!("img_{i:04}.png")), ClassLabel::ALL[i % 3])).collect();
        let m = DatasetManifest::partition(items.clone(), seed);
        let (tr, va, te) = split_counts(n);
        prop_assert_eq!(tr + va + te, n);
        prop_assert_eq!(va, n * 15 / 100);
        prop_assert_eq!(te, n * 15 / 100);
        prop_assert_eq!(m.count(Split::Train), tr);
        prop_assert_eq!(m.count(Split::Val), va);
        prop_assert_eq!(m.count(Split::Test), te);
        prop_assert_eq!(DatasetManifest::parse(&m.to_text()).unwrap(), m.clone());
        prop_assert_eq!(DatasetManifest::partition(items, seed), m);
    }

    #[test]
    fn concat_split_round_trip(a in tensor([2, 2, 3, 4]), b in tensor([2, 3, 3, 4])) {
        let joined = concat_channels(&a, &b).unwrap();
        prop_assert_eq!(joined.shape(), &[2, 5, 3, 4]);
        let (x, y) = split_channels(&joined, 2).unwrap();
        prop_assert_eq!(x, a);
        prop_assert_eq!(y, b);
    }

    #[test]
    fn pooling_and_relu_basics(t in tensor([1, 2, 4, 6])) {
        let r = relu(&t);
        prop_assert_eq!(relu(&r), r.clone());
        prop_assert!(r.data().iter().all(|v| *v >= 0.0));
        let (p, _) = maxpool2x2(&t).unwrap();
        prop_assert_eq!(p.shape(), &[1, 2, 2, 3]);
        let max_in = t.data().iter().cloned().fold(f64::MIN, f64::max);
        let max_out = p.data().iter().cloned().fold(f64::MIN, f64::max);
        prop_assert_eq!(max_in, max_out);
    }
}
