//! Closed-form MMSE (Wiener) deconvolution
//! `x̂ = C Hᵀ (H C Hᵀ + σ I)⁻¹ b`, evaluated per frequency on the circular
//! operator and, at small sizes, by a dense factorization for cross-checking.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{DeconvError, Result};
use crate::image::{Image, Kernel, PriorPatch};
use crate::operator::{
    materialize_operator, materialize_prior, prior_transfer, unvectorize, vectorize,
    LinearBlurOperator,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MmseConfig {
    /// Noise regularization strength, `> 0`.
    pub sigma: f64,
    pub f_x: PriorPatch,
}

impl MmseConfig {
    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            f_x: PriorPatch::delta(),
        }
    }

    pub fn with_prior(mut self, f_x: PriorPatch) -> Self {
        self.f_x = f_x;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(DeconvError::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Frequency-domain Wiener solve:
/// `x̂(ω) = ĉ(ω) conj(k̂(ω)) b̂(ω) / (|k̂(ω)|² ĉ(ω) + σ)`.
pub fn wiener_solve(b: &Image, k: &Kernel, cfg: &MmseConfig) -> Result<Image> {
    cfg.validate()?;
    let op = LinearBlurOperator::new(k, b.shape())?;
    wiener_with_operator(b, &op, cfg)
}

pub(crate) fn wiener_with_operator(b: &Image, op: &LinearBlurOperator, cfg: &MmseConfig) -> Result<Image> {
    cfg.validate()?;
    let prior = prior_transfer(&cfg.f_x, b.shape())?;
    let sigma = cfg.sigma;
    op.filter(b, |i, kh| {
        let c = prior[i];
        kh.conj() * c / (kh.norm_sqr() * c + sigma)
    })
}

/// Dense evaluation of the same estimator from materialized `H` and `C`.
/// Limited to [`crate::operator::ORACLE_MAX_PIXELS`] pixels.
pub fn mmse_solve_dense(b: &Image, k: &Kernel, cfg: &MmseConfig) -> Result<Image> {
    cfg.validate()?;
    let shape = b.shape();
    let h = materialize_operator(k, shape)?;
    let c = materialize_prior(&cfg.f_x, shape)?;
    let ht = h.transpose();
    let n = h.nrows();
    let system = &h * &c * &ht + DMatrix::identity(n, n) * cfg.sigma;
    let rhs = vectorize(b);
    let y = solve_spd_or_lu(system, rhs)?;
    let x = c * (ht * y);
    unvectorize(&x, shape)
}

/// Solves `A y = rhs` for symmetric positive-definite `A`, falling back to LU.
pub(crate) fn solve_spd_or_lu(
    a: DMatrix<f64>,
    rhs: nalgebra::DVector<f64>,
) -> Result<nalgebra::DVector<f64>> {
    let asym = (&a - a.transpose()).amax();
    if asym <= 1e-12 * a.amax().max(1.0) {
        if let Some(chol) = Cholesky::new(a.clone()) {
            return Ok(chol.solve(&rhs));
        }
    }
    a.lu().solve(&rhs).ok_or(DeconvError::Singular)
}
