mod common;

use common::*;
use resdeconv_core::operator::{convergence_factors, transfer_function};
use resdeconv_core::{
    degrade::gen_gaussian_kernel, ird_auto_n, ird_deconvolve, ird_series_term, wiener_solve, Image,
    IrdConfig, MmseConfig, PriorPatch,
};

#[test]
fn converges_to_wiener_at_oracle_scale() {
    let mut rng = rng(30);
    for _ in 0..10 {
        let b = random_image(&mut rng, 6, 6);
        let k = random_kernel(&mut rng, 3, 3);
        let (x, _) = ird_deconvolve(&b, &k, &IrdConfig::new(0.1, 500)).unwrap();
        let w = wiener_solve(&b, &k, &MmseConfig::new(0.1)).unwrap();
        assert!(x.rel_l2_error(&w).unwrap() <= 1e-8);
    }
}

#[test]
fn error_follows_geometric_tail_bound() {
    let mut rng = rng(31);
    let b = random_image(&mut rng, 8, 8);
    let k = random_kernel(&mut rng, 3, 3);
    let sigma = 0.2;
    let rho = convergence_factors(&k, &PriorPatch::delta(), sigma, (8, 8)).unwrap().rho_max;
    let w = wiener_solve(&b, &k, &MmseConfig::new(sigma)).unwrap();
    for n in [0usize, 5, 20, 60, 150] {
        let (x, _) = ird_deconvolve(&b, &k, &IrdConfig::new(sigma, n)).unwrap();
        let bound = (rho.powi(n as i32 + 1) / (1.0 - rho)).max(1e-8);
        assert!(x.rel_l2_error(&w).unwrap() <= bound, "n={n}");
    }
}

#[test]
fn prior_patch_series_converges_to_wiener() {
    let mut rng = rng(32);
    let prior = PriorPatch::new(3, 3, vec![0.0, 0.1, 0.0, 0.1, 0.6, 0.1, 0.0, 0.1, 0.0]).unwrap();
    let b = random_image(&mut rng, 8, 8);
    let k = random_kernel(&mut rng, 3, 3);
    let (x, _) = ird_deconvolve(&b, &k, &IrdConfig::new(0.1, 600).with_prior(prior.clone())).unwrap();
    let w = wiener_solve(&b, &k, &MmseConfig::new(0.1).with_prior(prior)).unwrap();
    assert!(x.rel_l2_error(&w).unwrap() <= 1e-8);
}

#[test]
fn terms_resum_to_output() {
    let mut rng = rng(33);
    let b = random_image(&mut rng, 7, 8);
    let k = random_kernel(&mut rng, 3, 3);
    let f = PriorPatch::delta();
    for n_total in [0usize, 1, 10, 37, 100] {
        let mut sum = Image::zeros(7, 8);
        for n in 0..=n_total {
            sum = sum.add_scaled(&ird_series_term(&b, &k, &f, 0.05, n).unwrap(), 1.0).unwrap();
        }
        let (x, _) = ird_deconvolve(&b, &k, &IrdConfig::new(0.05, n_total)).unwrap();
        assert!(x.max_abs_diff(&sum).unwrap() <= 1e-10, "N={n_total}");
    }
}

#[test]
fn trace_components_match_series_terms() {
    let mut rng = rng(34);
    let b = random_image(&mut rng, 6, 6);
    let k = random_kernel(&mut rng, 3, 3);
    let (_, trace) = ird_deconvolve(&b, &k, &IrdConfig::new(0.1, 12).with_trace(4)).unwrap();
    let ns: Vec<usize> = trace.entries.iter().map(|e| e.n).collect();
    assert_eq!(ns, vec![0, 4, 8, 12]);
    assert_eq!(trace.energies.len(), 13);
    for (n, comp) in trace.partial_outputs() {
        let term = ird_series_term(&b, &k, &PriorPatch::delta(), 0.1, n).unwrap();
        assert!(comp.max_abs_diff(&term).unwrap() < 1e-12);
    }
}

#[test]
fn residue_energy_bounded_by_rho_power() {
    let mut rng = rng(35);
    let b = random_image(&mut rng, 12, 12);
    let k = random_kernel(&mut rng, 5, 5);
    let rho = convergence_factors(&k, &PriorPatch::delta(), 0.01, (12, 12)).unwrap().rho_max;
    let (_, trace) = ird_deconvolve(&b, &k, &IrdConfig::new(0.01, 300)).unwrap();
    for (n, e) in trace.energies.iter().enumerate() {
        assert!(e.is_finite());
        assert!(*e <= b.norm_l2() * rho.powi(n as i32) * (1.0 + 1e-9));
    }
}

#[test]
fn auto_n_respects_rho_bound() {
    let mut rng = rng(36);
    let b = random_image(&mut rng, 10, 10);
    let k = random_kernel(&mut rng, 3, 3);
    let rel_tol = 1e-4;
    let rho = convergence_factors(&k, &PriorPatch::delta(), 0.01, (10, 10)).unwrap().rho_max;
    let res = ird_auto_n(&b, &k, &IrdConfig::new(0.01, 0), rel_tol).unwrap();
    assert!(!res.capped);
    assert!(res.final_energy <= rel_tol * b.norm_l2());
    let bound = rel_tol.ln() / rho.ln() + 10.0;
    assert!((res.n_used as f64) <= bound, "n_used={} bound={bound}", res.n_used);
    let (x, _) = ird_deconvolve(&b, &k, &IrdConfig::new(0.01, res.n_used)).unwrap();
    assert_eq!(x, res.x_hat);
}

/// Share of energy at radial frequencies above the median radius.
fn high_frequency_fraction(img: &Image) -> f64 {
    let (h, w) = img.shape();
    let mut radii = Vec::with_capacity(h * w);
    let mut power = Vec::with_capacity(h * w);
    for u in 0..h {
        for v in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for r in 0..h {
                for c in 0..w {
                    let phase = -2.0 * std::f64::consts::PI * (u as f64 * r as f64 / h as f64 + v as f64 * c as f64 / w as f64);
                    re += img.get(r, c) * phase.cos();
                    im += img.get(r, c) * phase.sin();
                }
            }
            let fu = u.min(h - u) as f64 / h as f64;
            let fv = v.min(w - v) as f64 / w as f64;
            radii.push((fu * fu + fv * fv).sqrt());
            power.push(re * re + im * im);
        }
    }
    let mut sorted = radii.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let total: f64 = power.iter().sum();
    let high: f64 = radii.iter().zip(&power).filter(|(r, _)| **r > median).map(|(_, p)| p).sum();
    high / total
}

#[test]
fn components_shift_to_higher_frequencies() {
    let mut rng = rng(37);
    let x = random_image(&mut rng, 24, 24);
    let k = gen_gaussian_kernel(7, 1.2).unwrap();
    // sanity: the kernel is low-pass on this grid
    let spec = transfer_function(&k, (24, 24)).unwrap();
    assert!(spec.get(0, 12).norm() < spec.get(0, 3).norm());
    let b = resdeconv_core::convolve_circular(&x, &k).unwrap();
    let ns: Vec<usize> = (100..=1000).step_by(100).collect();
    let fracs: Vec<f64> = ns
        .iter()
        .map(|&n| high_frequency_fraction(&ird_series_term(&b, &k, &PriorPatch::delta(), 0.01, n).unwrap()))
        .collect();
    let drops = fracs.windows(2).filter(|p| p[1] < p[0]).count();
    assert!(drops as f64 <= 0.05 * (fracs.len() - 1) as f64, "{fracs:?}");
    let f1 = high_frequency_fraction(&ird_series_term(&b, &k, &PriorPatch::delta(), 0.01, 1).unwrap());
    assert!(fracs.last().unwrap() > &f1);
}
