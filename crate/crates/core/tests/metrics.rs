mod common;

use common::*;
use proptest::prelude::*;
use resdeconv_core::metrics::{content_loss, edge_loss, psnr, quality, ssim, total_loss, DEFAULT_ALPHA, DEFAULT_GAMMA};
use resdeconv_core::Image;

#[test]
fn ssim_anticorrelated_texture_is_negative() {
    let x = Image::from_fn(32, 32, |r, c| if (r / 2 + c / 3) % 2 == 0 { 1.0 } else { 0.0 });
    let inv = x.map(|v| 1.0 - v);
    let s = ssim(&x, &inv).unwrap();
    assert!(s < 0.0, "ssim = {s}");
}

#[test]
fn edge_loss_of_shift_matches_double_loop() {
    let mut rng = rng(50);
    let x = random_image(&mut rng, 9, 12);
    let (h, w) = x.shape();
    let shifted = Image::from_fn(h, w, |r, c| x.get(r, (c + 1) % w));
    let grad = |img: &Image, r: usize, c: usize| {
        (
            img.get(r, (c + 1) % w) - img.get(r, c),
            img.get((r + 1) % h, c) - img.get(r, c),
        )
    };
    let mut sum = 0.0;
    for r in 0..h {
        for c in 0..w {
            let (ah, av) = grad(&shifted, r, c);
            let (bh, bv) = grad(&x, r, c);
            sum += (ah - bh).powi(2) + (av - bv).powi(2);
        }
    }
    let expect = sum / (h * w) as f64;
    assert!((edge_loss(&shifted, &x).unwrap() - expect).abs() < 1e-14);
    assert!(expect > 0.0);
}

#[test]
fn smooth_l1_is_c1_at_one() {
    let x = Image::zeros(1, 1);
    let at = |d: f64| content_loss(&Image::filled(1, 1, d), &x).unwrap();
    let eps = 1e-6;
    assert!((at(1.0 - eps) - at(1.0 + eps)).abs() < 3e-6);
    let slope_lo = (at(1.0 - eps) - at(1.0 - 2.0 * eps)) / eps;
    let slope_hi = (at(1.0 + 2.0 * eps) - at(1.0 + eps)) / eps;
    assert!((slope_lo - 1.0).abs() < 1e-5);
    assert!((slope_hi - 1.0).abs() < 1e-5);
}

#[test]
fn default_weights() {
    assert_eq!(DEFAULT_ALPHA, 5000.0);
    assert_eq!(DEFAULT_GAMMA, 100.0);
}

#[test]
fn quality_report_fields() {
    let mut rng = rng(51);
    let x = random_image(&mut rng, 16, 16);
    let y = x.map(|v| v * 0.9);
    let q = quality(&y, &x).unwrap();
    assert_eq!(q.psnr_db, psnr(&y, &x).unwrap());
    assert_eq!(q.ssim, ssim(&y, &x).unwrap());
    assert!(q.psnr_db > 0.0 && q.ssim < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn metrics_are_symmetric(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let a = random_image(&mut rng, 12, 14);
        let b = random_image(&mut rng, 12, 14);
        prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        prop_assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() <= 1e-12);
        let s = ssim(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
    }

    #[test]
    fn losses_nonnegative_and_zero_only_on_equal(seed in any::<u64>(), c1 in 0.0f64..1.0, c2 in 0.0f64..1.0) {
        let mut rng = rng(seed);
        let a = random_image(&mut rng, 6, 6);
        let b = random_image(&mut rng, 6, 6);
        prop_assert!(content_loss(&a, &b).unwrap() > 0.0);
        prop_assert!(edge_loss(&a, &b).unwrap() > 0.0);
        prop_assert_eq!(content_loss(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(edge_loss(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(edge_loss(&Image::filled(6, 6, c1), &Image::filled(6, 6, c2)).unwrap(), 0.0);
        let r = total_loss(&a, &b, 2.0, 3.0).unwrap();
        prop_assert_eq!(r.total, 2.0 * r.content + 3.0 * r.edge);
    }
}
