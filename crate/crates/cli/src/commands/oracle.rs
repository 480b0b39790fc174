use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resdeconv_core::ird::IRD_MAX_ITERS;
use resdeconv_core::operator::{unvectorize, vectorize};
use resdeconv_core::{
    convergence_factors, convolve_circular, ird_deconvolve, materialize_operator, mmse_solve_dense, wiener_solve,
    Image, IrdConfig, MmseConfig,
};

use super::{read_kernel, read_prior};
use crate::args::OracleArgs;
use crate::error::{CliError, CliResult};

pub const ORACLE_TOL: f64 = 1e-6;
const SERIES_TAIL: f64 = 1e-14;

pub fn run(a: &OracleArgs) -> CliResult<()> {
    let k = read_kernel(&a.kernel)?;
    let f_x = read_prior(a.fx.as_deref())?;
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let mmse = MmseConfig::new(a.sigma).with_prior(f_x.clone());
    mmse.validate()?;
    IrdConfig::new(a.sigma, 0).validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (mut e_mat, mut e_dense, mut e_ird) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..a.trials {
        let h = rng.random_range(6..=16).max(k.rows());
        let w = rng.random_range(6..=16).max(k.cols());
        let x = Image::from_fn(h, w, |_, _| rng.random::<f64>());

        let fast = convolve_circular(&x, &k)?;
        let dense = unvectorize(&(materialize_operator(&k, (h, w))? * vectorize(&x)), (h, w))?;
        e_mat = e_mat.max(dense.rel_l2_error(&fast)?);

        let b = fast;
        let wiener = wiener_solve(&b, &k, &mmse)?;
        e_dense = e_dense.max(wiener.rel_l2_error(&mmse_solve_dense(&b, &k, &mmse)?)?);

        let n = convergence_factors(&k, &f_x, a.sigma, (h, w))?
            .iterations_for_tail(SERIES_TAIL)
            .map_or(IRD_MAX_ITERS, |n| n.min(IRD_MAX_ITERS));
        let (ird, _) = ird_deconvolve(&b, &k, &IrdConfig::new(a.sigma, n).with_prior(f_x.clone()))?;
        e_ird = e_ird.max(ird.rel_l2_error(&wiener)?);
    }

    println!("check,max_rel_error");
    let checks = [("materialization", e_mat), ("wiener_vs_dense", e_dense), ("ird_vs_wiener", e_ird)];
    for (name, e) in checks {
        println!("{name},{e:e}");
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|(_, e)| !(*e <= ORACLE_TOL))
        .map(|(name, _)| *name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!(
            "relative error above {ORACLE_TOL:e} in: {}",
            failed.join(", ")
        )))
    }
}
