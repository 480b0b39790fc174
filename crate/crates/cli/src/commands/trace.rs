use std::path::Path;

use resdeconv_core::{ird_deconvolve_with, save_image, Image, ImageFormat, IrdConfig, Kernel};

use super::{display_prior, ensure_dir, num, read_image, read_kernel, read_prior, rescale_abs};
use crate::args::TraceArgs;
use crate::error::{AtPath, CliResult};
use crate::manifest::Manifest;

pub const ENERGIES_CSV: &str = "energies.csv";

/// Runs IRD, writing `residue_NNNN.pgm` and `component_NNNN.pgm` (each
/// rescaled to max 1) for every `n` in `at`, plus `energies.csv` with
/// `‖r_n‖₂` for all `n`. Returns `x̂` and the energies.
pub fn run_traced(b: &Image, k: &Kernel, cfg: &IrdConfig, at: &[usize], dir: &Path) -> CliResult<(Image, Vec<f64>)> {
    let mut energies = Vec::with_capacity(cfg.n_iters + 1);
    let x_hat = ird_deconvolve_with(b, k, cfg, |n, r, series| {
        energies.push(r.norm_l2());
        if at.contains(&n) {
            let res = dir.join(format!("residue_{n:04}.pgm"));
            save_image(&rescale_abs(r), &res, ImageFormat::Pgm16)?;
            let comp = dir.join(format!("component_{n:04}.pgm"));
            save_image(&rescale_abs(&series.backproject(r)?), &comp, ImageFormat::Pgm16)?;
        }
        Ok(())
    })
    .at(dir)?;

    let mut w = csv::Writer::from_path(dir.join(ENERGIES_CSV))?;
    w.write_record(["n", "residue_energy"])?;
    for (n, e) in energies.iter().enumerate() {
        w.write_record([n.to_string(), num(*e)])?;
    }
    w.flush().at(&dir.join(ENERGIES_CSV))?;
    Ok((x_hat, energies))
}

pub fn run(a: &TraceArgs, argv: &[String]) -> CliResult<()> {
    let (b, _) = read_image(&a.image)?;
    let k = read_kernel(&a.kernel)?;
    let f_x = read_prior(a.fx.as_deref())?;
    let cfg = IrdConfig::new(a.sigma, a.iters).with_prior(f_x);
    cfg.validate()?;
    ensure_dir(&a.out)?;
    let (_, energies) = run_traced(&b, &k, &cfg, &a.at, &a.out)?;

    let mut m = Manifest::new("trace", argv);
    m.set("image", a.image.display());
    m.set("kernel", a.kernel.display());
    m.set("prior", display_prior(a.fx.as_deref()));
    m.set("solver", "ird");
    m.set("seed", "none");
    m.set("config.sigma", num(a.sigma));
    m.set("config.iters", a.iters);
    let at: Vec<String> = a.at.iter().filter(|n| **n <= a.iters).map(|n| n.to_string()).collect();
    m.set("config.trace_at", at.join(","));
    m.set("final_residual", num(*energies.last().expect("energy of r_0 is always recorded")));
    m.write_to(&a.out)
}
