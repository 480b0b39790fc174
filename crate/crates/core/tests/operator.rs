mod common;

use common::*;
use proptest::prelude::*;
use resdeconv_core::image::{flip_kernel, PriorPatch};
use resdeconv_core::operator::{
    apply_adjoint, convergence_factors, convolve_circular, convolve_circular_direct,
    materialize_operator, transfer_function, vectorize, LinearBlurOperator,
};
use resdeconv_core::{gen_trajectory_kernel, Image, Kernel, KernelGenConfig};

#[test]
fn fft_convolution_matches_brute_force_on_4x4() {
    let mut rng = rng(1);
    for _ in 0..20 {
        let x = random_image(&mut rng, 4, 4);
        let k = random_kernel(&mut rng, 3, 3);
        let expect = brute_convolve(&x, &k);
        let got = convolve_circular(&x, &k).unwrap();
        assert!(got.max_abs_diff(&expect).unwrap() <= 1e-10);
        let direct = convolve_circular_direct(&x, &k).unwrap();
        assert!(direct.max_abs_diff(&expect).unwrap() <= 1e-14);
    }
}

#[test]
fn adjoint_identity_on_random_triples() {
    let mut rng = rng(2);
    for trial in 0..100 {
        let (h, w) = (4 + trial % 9, 5 + trial % 7);
        let ks = if trial % 2 == 0 { 3 } else { 5 }.min(h).min(w);
        let ks = if ks % 2 == 0 { ks - 1 } else { ks };
        let x = random_image(&mut rng, h, w);
        let y = random_image(&mut rng, h, w);
        let k = random_kernel(&mut rng, ks, ks);
        let lhs = dot(&convolve_circular(&x, &k).unwrap(), &y);
        let rhs = dot(&x, &apply_adjoint(&y, &k).unwrap());
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()));
    }
}

#[test]
fn adjoint_is_convolution_with_flipped_kernel() {
    let mut rng = rng(3);
    let y = random_image(&mut rng, 8, 8);
    let k = random_kernel(&mut rng, 3, 3);
    let a = apply_adjoint(&y, &k).unwrap();
    let b = brute_convolve(&y, &flip_kernel(&k));
    assert!(a.max_abs_diff(&b).unwrap() <= 1e-12);

    let sym = Kernel::normalized(3, 3, vec![1.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 1.0]).unwrap();
    let c1 = apply_adjoint(&y, &sym).unwrap();
    let c2 = convolve_circular(&y, &sym).unwrap();
    assert!(c1.max_abs_diff(&c2).unwrap() <= 1e-14);

    let d = Kernel::delta(3, 3).unwrap();
    assert_eq!(apply_adjoint(&y, &d).unwrap(), y);
}

#[test]
fn operator_struct_matches_free_functions() {
    let mut rng = rng(4);
    let x = random_image(&mut rng, 7, 9);
    let k = random_kernel(&mut rng, 3, 5);
    let op = LinearBlurOperator::new(&k, (7, 9)).unwrap();
    assert_eq!(op.boundary(), "circular");
    assert!(op.apply(&x).unwrap().max_abs_diff(&brute_convolve(&x, &k)).unwrap() < 1e-12);
    let normal = op.apply_normal(&x).unwrap();
    let twice = brute_convolve(&brute_convolve(&x, &k), &flip_kernel(&k));
    assert!(normal.max_abs_diff(&twice).unwrap() < 1e-12);
}

#[test]
fn transfer_function_basics() {
    let d = Kernel::delta(3, 3).unwrap();
    let s = transfer_function(&d, (6, 5)).unwrap();
    assert!(s.values().iter().all(|c| (c.re - 1.0).abs() < 1e-15 && c.im.abs() < 1e-15));

    let mut rng = rng(5);
    for _ in 0..20 {
        let k = random_kernel(&mut rng, 5, 3);
        let s = transfer_function(&k, (9, 8)).unwrap();
        assert!((s.get(0, 0).re - 1.0).abs() <= 1e-12);
        assert!(s.get(0, 0).im.abs() <= 1e-12);
        assert!(s.max_abs() <= 1.0 + 1e-12);
    }
}

#[test]
fn transfer_function_matches_direct_dft() {
    // k̂(u,v) = Σ k[a,b] exp(-2πi (u(a-cr)/H + v(b-cc)/W))
    let mut rng = rng(6);
    let k = random_kernel(&mut rng, 3, 5);
    let (h, w) = (6, 7);
    let s = transfer_function(&k, (h, w)).unwrap();
    for u in 0..h {
        for v in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for a in 0..3 {
                for b in 0..5 {
                    let phase = -2.0
                        * std::f64::consts::PI
                        * (u as f64 * (a as f64 - 1.0) / h as f64 + v as f64 * (b as f64 - 2.0) / w as f64);
                    re += k.tap(a, b) * phase.cos();
                    im += k.tap(a, b) * phase.sin();
                }
            }
            assert!((s.get(u, v).re - re).abs() < 1e-13);
            assert!((s.get(u, v).im - im).abs() < 1e-13);
        }
    }
}

#[test]
fn convergence_factors_for_delta_prior() {
    let mut rng = rng(7);
    for _ in 0..10 {
        let k = random_kernel(&mut rng, 3, 3);
        let cf = convergence_factors(&k, &PriorPatch::delta(), 0.01, (10, 12)).unwrap();
        assert!(cf.factors.iter().all(|f| *f <= 0.99 + 1e-12));
        assert!(cf.rho_max <= 0.99 + 1e-12);
    }
}

#[test]
fn trajectory_kernel_rho_on_64_grid() {
    let mut rng = rng(8);
    let taps = (0..441).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
    let random21 = Kernel::normalized(21, 21, taps).unwrap();
    let traj = gen_trajectory_kernel(&KernelGenConfig::trajectory(21, 9)).unwrap();
    for k in [random21, traj] {
        let cf = convergence_factors(&k, &PriorPatch::delta(), 0.01, (64, 64)).unwrap();
        // brute-force maximum over the spectrum
        let spec = transfer_function(&k, (64, 64)).unwrap();
        let brute = spec
            .values()
            .iter()
            .map(|c| (0.99 - c.norm_sqr()).abs())
            .fold(0.0, f64::max);
        assert!((cf.rho_max - brute).abs() < 1e-15);
        assert!(cf.rho_max < 1.0);
    }
}

#[test]
fn dense_operator_matches_convolution() {
    let mut rng = rng(9);
    let d = Kernel::delta(3, 3).unwrap();
    assert_eq!(materialize_operator(&d, (4, 5)).unwrap(), nalgebra::DMatrix::identity(20, 20));

    let k = random_kernel(&mut rng, 3, 3);
    let m = materialize_operator(&k, (6, 6)).unwrap();
    for r in 0..36 {
        assert!((m.row(r).sum() - 1.0).abs() < 1e-12);
    }
    for _ in 0..10 {
        let x = random_image(&mut rng, 6, 6);
        let mx = &m * vectorize(&x);
        let kx = convolve_circular(&x, &k).unwrap();
        let diff = (mx - vectorize(&kx)).amax();
        assert!(diff <= 1e-12);
    }
}

#[test]
fn dense_flip_is_transpose() {
    let mut rng = rng(10);
    for (h, w, kr, kc) in [(6, 6, 3, 3), (5, 7, 5, 3), (8, 8, 5, 5)] {
        let k = random_kernel(&mut rng, kr, kc);
        let m = materialize_operator(&k, (h, w)).unwrap();
        let mf = materialize_operator(&flip_kernel(&k), (h, w)).unwrap();
        assert!((m.transpose() - mf).amax() == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_and_direct_agree(seed in any::<u64>(), h in 3usize..12, w in 3usize..12, half in 0usize..2) {
        let mut rng = rng(seed);
        let ks = 2 * half + 1;
        let x = random_image(&mut rng, h, w);
        let k = random_kernel(&mut rng, ks, ks);
        let a = convolve_circular(&x, &k).unwrap();
        let b = convolve_circular_direct(&x, &k).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-10);
    }

    #[test]
    fn flip_is_involution_and_preserves_taps(seed in any::<u64>(), r in 0usize..3, c in 0usize..3) {
        let mut rng = rng(seed);
        let k = random_kernel(&mut rng, 2 * r + 1, 2 * c + 1);
        let f = flip_kernel(&k);
        prop_assert_eq!(flip_kernel(&f), k.clone());
        let mut a: Vec<f64> = k.taps().to_vec();
        let mut b: Vec<f64> = f.taps().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
        prop_assert!((f.sum() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spectrum_magnitude_bounded(seed in any::<u64>(), h in 5usize..20, w in 5usize..20) {
        let mut rng = rng(seed);
        let k = random_kernel(&mut rng, 5, 5);
        let s = transfer_function(&k, (h, w)).unwrap();
        prop_assert!(s.max_abs() <= 1.0 + 1e-12);
    }
}

#[test]
fn constant_image_survives_any_kernel() {
    let mut rng = rng(11);
    let k = random_kernel(&mut rng, 5, 5);
    let x = Image::filled(9, 9, 0.42);
    assert!(convolve_circular(&x, &k).unwrap().max_abs_diff(&x).unwrap() < 1e-14);
}
