//! Iterative residual deconvolution.
//!
//! Evaluates the truncated series
//! `x̂ = C Hᵀ Σ_{n=0}^{N} (σ' I − H C Hᵀ)ⁿ b`, with `σ' = 1 − σ`, by
//! repeatedly subtracting the blurred-and-correlated residue from the damped
//! residue:
//!
//! ```text
//! s ← b; r ← b
//! repeat N times:
//!     r ← σ' r − k * f_x * k₋ * r
//!     s ← s + r
//! x̂ ← f_x * k₋ * s
//! ```
//!
//! As `N → ∞` the output converges to [`crate::mmse::wiener_solve`] at the
//! geometric rate `ρ_max` from [`crate::operator::convergence_factors`].

use rustfft::num_complex::Complex64;

use crate::error::{DeconvError, Result};
use crate::image::{Image, Kernel, PriorPatch};
use crate::operator::{prior_transfer, LinearBlurOperator};

/// Hard iteration cap for [`ird_auto_n`].
pub const IRD_MAX_ITERS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct IrdConfig {
    /// Regularization in `(0, 1)`.
    pub sigma: f64,
    /// Number of residual iterations `N`.
    pub n_iters: usize,
    pub f_x: PriorPatch,
    /// Keep residue images every `trace_every` iterations; `0` disables.
    pub trace_every: usize,
}

impl IrdConfig {
    pub fn new(sigma: f64, n_iters: usize) -> Self {
        Self {
            sigma,
            n_iters,
            f_x: PriorPatch::delta(),
            trace_every: 0,
        }
    }

    pub fn with_prior(mut self, f_x: PriorPatch) -> Self {
        self.f_x = f_x;
        self
    }

    pub fn with_trace(mut self, every: usize) -> Self {
        self.trace_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(DeconvError::InvalidConfig(format!(
                "IRD sigma must lie in (0, 1), got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// One recorded iteration: residue `r_n` and its component `f_x * k₋ * r_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub n: usize,
    pub residue: Image,
    pub energy: f64,
    pub component: Image,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IrdTrace {
    /// `‖r_n‖₂` for every `n = 0..=N`, recorded whether or not tracing is on.
    pub energies: Vec<f64>,
    /// Residues and components at `n = 0, e, 2e, …` for `trace_every = e`.
    pub entries: Vec<TraceEntry>,
}

impl IrdTrace {
    pub fn residues(&self) -> impl Iterator<Item = (usize, &Image, f64)> {
        self.entries.iter().map(|e| (e.n, &e.residue, e.energy))
    }

    pub fn partial_outputs(&self) -> impl Iterator<Item = (usize, &Image)> {
        self.entries.iter().map(|e| (e.n, &e.component))
    }
}

/// Precomputed pieces of the residual recursion for one (kernel, prior, shape).
pub struct ResidualSeries {
    op: LinearBlurOperator,
    /// `|k̂|² ĉ`, the spectrum of `k * f_x * k₋`.
    normal: Vec<f64>,
    /// `ĉ conj(k̂)`, the spectrum of `f_x * k₋`.
    backproject: Vec<Complex64>,
    damp: f64,
}

impl ResidualSeries {
    pub fn new(k: &Kernel, f_x: &PriorPatch, sigma: f64, shape: (usize, usize)) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(DeconvError::InvalidConfig(format!(
                "IRD sigma must lie in (0, 1), got {sigma}"
            )));
        }
        let op = LinearBlurOperator::new(k, shape)?;
        let prior = prior_transfer(f_x, shape)?;
        let normal = op
            .spectrum_values()
            .iter()
            .zip(&prior)
            .map(|(kh, c)| kh.norm_sqr() * c)
            .collect();
        let backproject = op
            .spectrum_values()
            .iter()
            .zip(&prior)
            .map(|(kh, c)| kh.conj() * *c)
            .collect();
        Ok(Self {
            op,
            normal,
            backproject,
            damp: 1.0 - sigma,
        })
    }

    /// `r ← σ' r − k * f_x * k₋ * r`.
    pub fn step(&self, r: &Image) -> Result<Image> {
        let blurred = self.op.filter(r, |i, _| Complex64::new(self.normal[i], 0.0))?;
        r.scale(self.damp).add_scaled(&blurred, -1.0)
    }

    /// `f_x * k₋ * v`.
    pub fn backproject(&self, v: &Image) -> Result<Image> {
        self.op.filter(v, |i, _| self.backproject[i])
    }
}

/// Runs `cfg.n_iters` residual iterations and returns `x̂` with the trace.
pub fn ird_deconvolve(b: &Image, k: &Kernel, cfg: &IrdConfig) -> Result<(Image, IrdTrace)> {
    let mut trace = IrdTrace::default();
    let x_hat = ird_deconvolve_with(b, k, cfg, |n, r, series| {
        record(series, &mut trace, cfg.trace_every, n, r)
    })?;
    Ok((x_hat, trace))
}

/// Same iteration as [`ird_deconvolve`], but every residue `r_n`
/// (`n = 0..=N`) is handed to `observe` instead of being stored.
/// `cfg.trace_every` is ignored.
pub fn ird_deconvolve_with<F>(b: &Image, k: &Kernel, cfg: &IrdConfig, mut observe: F) -> Result<Image>
where
    F: FnMut(usize, &Image, &ResidualSeries) -> Result<()>,
{
    cfg.validate()?;
    let series = ResidualSeries::new(k, &cfg.f_x, cfg.sigma, b.shape())?;
    let mut s = b.clone();
    let mut r = b.clone();
    observe(0, &r, &series)?;
    for n in 1..=cfg.n_iters {
        r = series.step(&r)?;
        s = s.add_scaled(&r, 1.0)?;
        observe(n, &r, &series)?;
    }
    series.backproject(&s)
}

fn record(series: &ResidualSeries, trace: &mut IrdTrace, every: usize, n: usize, r: &Image) -> Result<()> {
    let energy = r.norm_l2();
    trace.energies.push(energy);
    if every > 0 && n.is_multiple_of(every) {
        trace.entries.push(TraceEntry {
            n,
            residue: r.clone(),
            energy,
            component: series.backproject(r)?,
        });
    }
    Ok(())
}

/// The `n`-th unfolded component `f_x * k₋ * r_n = C Hᵀ (σ' I − H C Hᵀ)ⁿ b`.
pub fn ird_series_term(b: &Image, k: &Kernel, f_x: &PriorPatch, sigma: f64, n: usize) -> Result<Image> {
    let series = ResidualSeries::new(k, f_x, sigma, b.shape())?;
    let mut r = b.clone();
    for _ in 0..n {
        r = series.step(&r)?;
    }
    series.backproject(&r)
}

/// Result of [`ird_auto_n`].
#[derive(Debug, Clone, PartialEq)]
pub struct AutoIrdResult {
    pub x_hat: Image,
    pub n_used: usize,
    /// Set when [`IRD_MAX_ITERS`] was reached before the tolerance.
    pub capped: bool,
    pub final_energy: f64,
}

/// Iterates until `‖r_n‖₂ ≤ rel_tol · ‖b‖₂` or the iteration cap.
/// `cfg.n_iters` and `cfg.trace_every` are ignored.
pub fn ird_auto_n(b: &Image, k: &Kernel, cfg: &IrdConfig, rel_tol: f64) -> Result<AutoIrdResult> {
    cfg.validate()?;
    if !(rel_tol > 0.0) {
        return Err(DeconvError::InvalidConfig(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    let series = ResidualSeries::new(k, &cfg.f_x, cfg.sigma, b.shape())?;
    let target = rel_tol * b.norm_l2();
    let mut s = b.clone();
    let mut r = b.clone();
    let mut n = 0;
    let mut energy = r.norm_l2();
    while energy > target && n < IRD_MAX_ITERS {
        r = series.step(&r)?;
        s = s.add_scaled(&r, 1.0)?;
        n += 1;
        energy = r.norm_l2();
    }
    Ok(AutoIrdResult {
        x_hat: series.backproject(&s)?,
        n_used: n,
        capped: energy > target,
        final_energy: energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Image {
        Image::from_fn(5, 6, |r, c| ((r * 3 + c * 5) % 7) as f64 / 6.0)
    }

    #[test]
    fn delta_geometric_series() {
        let b = sample();
        let d = Kernel::delta(3, 3).unwrap();
        let (x, trace) = ird_deconvolve(&b, &d, &IrdConfig::new(0.5, 3).with_trace(1)).unwrap();
        assert!(x.max_abs_diff(&b.scale(0.625)).unwrap() < 1e-15);
        for (n, r, e) in trace.residues() {
            let expect = b.scale((-0.5f64).powi(n as i32));
            assert!(r.max_abs_diff(&expect).unwrap() < 1e-15);
            assert!((e - 0.5f64.powi(n as i32) * b.norm_l2()).abs() < 1e-12);
        }
        assert_eq!(trace.entries.len(), 4);
        assert_eq!(trace.energies.len(), 4);
    }

    #[test]
    fn zero_iterations_is_correlation() {
        let b = sample();
        let k = Kernel::normalized(3, 3, vec![0.0, 1.0, 0.0, 2.0, 3.0, 0.5, 0.0, 0.0, 1.0]).unwrap();
        let (x, trace) = ird_deconvolve(&b, &k, &IrdConfig::new(0.1, 0)).unwrap();
        let expect = crate::operator::apply_adjoint(&b, &k).unwrap();
        assert!(x.max_abs_diff(&expect).unwrap() < 1e-14);
        assert!(trace.entries.is_empty());
    }

    #[test]
    fn auto_n_delta() {
        let b = sample();
        let d = Kernel::delta(1, 1).unwrap();
        let cfg = IrdConfig::new(0.5, 0);
        assert_eq!(ird_auto_n(&b, &d, &cfg, 1e-6).unwrap().n_used, 20);
        let once = ird_auto_n(&b, &d, &cfg, 1.0).unwrap();
        assert!(once.n_used <= 1);
        assert!(!once.capped);
        assert!(ird_auto_n(&b, &d, &cfg, 0.0).is_err());
    }

    #[test]
    fn invalid_sigma() {
        let b = sample();
        let d = Kernel::delta(1, 1).unwrap();
        assert!(ird_deconvolve(&b, &d, &IrdConfig::new(1.0, 3)).is_err());
        assert!(ird_deconvolve(&b, &d, &IrdConfig::new(0.0, 3)).is_err());
        assert!(ird_series_term(&b, &d, &PriorPatch::delta(), 1.5, 0).is_err());
    }

    #[test]
    fn delta_term_energy() {
        let b = sample();
        let d = Kernel::delta(1, 1).unwrap();
        for n in 0..6 {
            let t = ird_series_term(&b, &d, &PriorPatch::delta(), 0.5, n).unwrap();
            assert!((t.norm_l2() - 0.5f64.powi(n as i32) * b.norm_l2()).abs() < 1e-12);
        }
    }
}
