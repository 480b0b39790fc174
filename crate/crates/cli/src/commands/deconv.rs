use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use resdeconv_core::{
    admm_l1, apg_l1, convergence_factors, ird_deconvolve, save_image, wiener_solve, AdmmConfig, ApgConfig,
    Image, ImageFormat, IrdConfig, Kernel, MmseConfig, PriorPatch,
};

use super::trace::run_traced;
use super::{display_prior, ensure_dir, num, read_image, read_kernel, read_prior, stem};
use crate::args::{DeconvArgs, Method};
use crate::error::{AtPath, CliError, CliResult};
use crate::manifest::Manifest;

struct Outcome {
    output: PathBuf,
    converged: bool,
    iterations: usize,
    final_objective: Option<f64>,
    final_residual: Option<f64>,
    tail_bound: Option<f64>,
}

impl DeconvArgs {
    fn admm_config(&self) -> AdmmConfig {
        AdmmConfig {
            lambda: self.lambda,
            rho: self.rho,
            max_iters: self.max_iters,
            tol: self.tol,
        }
    }

    fn apg_config(&self) -> ApgConfig {
        ApgConfig {
            lambda: self.lambda,
            step: self.step,
            max_iters: self.max_iters,
            tol: self.tol,
            paper_literal_step: self.paper_literal_step,
        }
    }

    fn ird_config(&self, f_x: &PriorPatch) -> IrdConfig {
        IrdConfig::new(self.sigma, self.iters).with_prior(f_x.clone())
    }

    fn validate(&self, f_x: &PriorPatch) -> CliResult<()> {
        match self.method {
            Method::Ird => self.ird_config(f_x).validate()?,
            Method::Wiener => MmseConfig::new(self.sigma).validate()?,
            Method::Admm => self.admm_config().validate()?,
            Method::Apg => self.apg_config().validate()?,
        }
        if self.jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        if self.trace_dir.is_some() && self.method != Method::Ird {
            return Err(CliError::Usage("--trace-dir only applies to --method ird".into()));
        }
        let mut seen = HashSet::new();
        for p in &self.image {
            if !seen.insert(stem(p)?) {
                return Err(CliError::Usage(format!(
                    "two inputs share the name {:?}; outputs would collide",
                    stem(p)?
                )));
            }
        }
        Ok(())
    }

    fn echo(&self, m: &mut Manifest) {
        match self.method {
            Method::Ird => {
                m.set("config.sigma", num(self.sigma));
                m.set("config.iters", self.iters);
                if self.trace_dir.is_some() {
                    let at: Vec<String> = self.trace_at.iter().map(|n| n.to_string()).collect();
                    m.set("config.trace_at", at.join(","));
                }
            }
            Method::Wiener => m.set("config.sigma", num(self.sigma)),
            Method::Admm => {
                m.set("config.lambda", num(self.lambda));
                m.set("config.rho", num(self.rho));
                m.set("config.tol", num(self.tol));
                m.set("config.max_iters", self.max_iters);
            }
            Method::Apg => {
                m.set("config.lambda", num(self.lambda));
                m.set("config.step", num(self.step));
                m.set("config.tol", num(self.tol));
                m.set("config.max_iters", self.max_iters);
                m.set("config.paper_literal_step", self.paper_literal_step);
            }
        }
    }
}

pub fn run(a: &DeconvArgs, argv: &[String]) -> CliResult<()> {
    let k = read_kernel(&a.kernel)?;
    let f_x = read_prior(a.fx.as_deref())?;
    a.validate(&f_x)?;
    ensure_dir(&a.out)?;
    if let Some(dir) = &a.trace_dir {
        ensure_dir(dir)?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let results: Vec<CliResult<Outcome>> =
        pool.install(|| a.image.par_iter().map(|p| restore_one(a, &k, &f_x, p)).collect());

    let mut m = Manifest::new("deconv", argv);
    m.set("kernel", a.kernel.display());
    m.set("prior", display_prior(a.fx.as_deref()));
    m.set("solver", a.method.name());
    m.set("seed", "none");
    a.echo(&mut m);
    m.set("images", a.image.len());
    for (i, (path, res)) in a.image.iter().zip(results).enumerate() {
        let o = res?;
        m.set(format!("image.{i}"), path.display());
        m.set(format!("output.{i}"), o.output.display());
        m.set(format!("converged.{i}"), o.converged);
        m.set(format!("iterations.{i}"), o.iterations);
        if let Some(f) = o.final_objective {
            m.set(format!("final_objective.{i}"), num(f));
        }
        if let Some(r) = o.final_residual {
            m.set(format!("final_residual.{i}"), num(r));
        }
        if let Some(t) = o.tail_bound {
            m.set(format!("tail_bound.{i}"), num(t));
        }
    }
    m.write_to(&a.out)?;
    if let Some(dir) = &a.trace_dir {
        m.write_to(dir)?;
        for p in &a.image {
            m.write_to(&dir.join(stem(p)?))?;
        }
    }
    Ok(())
}

fn restore_one(a: &DeconvArgs, k: &Kernel, f_x: &PriorPatch, path: &Path) -> CliResult<Outcome> {
    let (b, in_format) = read_image(path)?;
    let name = stem(path)?;
    let format: ImageFormat = a.format.unwrap_or(in_format);
    let output = a.out.join(format!("{name}.{}", format.extension()));

    let (x_hat, mut outcome): (Image, Outcome) = match a.method {
        Method::Ird => {
            let cfg = a.ird_config(f_x);
            let (x_hat, energies) = match &a.trace_dir {
                Some(dir) => {
                    let dir = dir.join(&name);
                    ensure_dir(&dir)?;
                    run_traced(&b, k, &cfg, &a.trace_at, &dir)?
                }
                None => {
                    let (x_hat, trace) = ird_deconvolve(&b, k, &cfg).at(path)?;
                    (x_hat, trace.energies)
                }
            };
            let rho = convergence_factors(k, f_x, a.sigma, b.shape()).at(path)?.rho_max;
            let tail = rho.powi(a.iters.min(i32::MAX as usize) as i32 + 1) / (1.0 - rho);
            (
                x_hat,
                Outcome {
                    output: PathBuf::new(),
                    converged: true,
                    iterations: a.iters,
                    final_objective: None,
                    final_residual: energies.last().copied(),
                    tail_bound: Some(tail),
                },
            )
        }
        Method::Wiener => {
            let cfg = MmseConfig::new(a.sigma).with_prior(f_x.clone());
            let x_hat = wiener_solve(&b, k, &cfg).at(path)?;
            (
                x_hat,
                Outcome {
                    output: PathBuf::new(),
                    converged: true,
                    iterations: 0,
                    final_objective: None,
                    final_residual: None,
                    tail_bound: None,
                },
            )
        }
        Method::Admm | Method::Apg => {
            if !f_x.is_delta() {
                return Err(CliError::Usage("--fx is not used by the L1 solvers".into()));
            }
            let res = if a.method == Method::Admm {
                admm_l1(&b, k, &a.admm_config())
            } else {
                apg_l1(&b, k, &a.apg_config())
            }
            .at(path)?;
            let outcome = Outcome {
                output: PathBuf::new(),
                converged: res.converged,
                iterations: res.iterations_used,
                final_objective: Some(res.final_objective()),
                final_residual: Some(res.final_residual),
                tail_bound: None,
            };
            (res.x_hat, outcome)
        }
    };
    save_image(&x_hat, &output, format).at(&output)?;
    outcome.output = output;
    Ok(outcome)
}
