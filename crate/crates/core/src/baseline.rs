//! L1-regularized baselines minimizing `F(x) = ‖k * x − b‖₂² + λ ‖x‖₁`:
//! ADMM with an exact per-frequency x-update, and APG (FISTA).

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;

use crate::error::{DeconvError, Result};
use crate::image::{Image, Kernel};
use crate::mmse::solve_spd_or_lu;
use crate::operator::{materialize_operator, unvectorize, vectorize, LinearBlurOperator};

/// Element-wise `sign(v) · max(|v| − threshold, 0)`, the proximal map of
/// `threshold · ‖·‖₁`.
pub fn soft_shrink(v: &Image, threshold: f64) -> Result<Image> {
    if !(threshold >= 0.0) {
        return Err(DeconvError::InvalidConfig(format!(
            "shrinkage threshold must be nonnegative, got {threshold}"
        )));
    }
    Ok(v.map(|x| shrink(x, threshold)))
}

#[inline]
fn shrink(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// `‖k * x − b‖₂² + λ ‖x‖₁`.
pub fn l1_objective(b: &Image, k: &Kernel, x: &Image, lambda: f64) -> Result<f64> {
    let op = LinearBlurOperator::new(k, b.shape())?;
    objective(&op, b, x, lambda)
}

fn objective(op: &LinearBlurOperator, b: &Image, x: &Image, lambda: f64) -> Result<f64> {
    let r = op.apply(x)?.sub(b)?;
    Ok(r.dot(&r)? + lambda * x.norm_l1())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub x_hat: Image,
    pub iterations_used: usize,
    /// `F` at the starting point followed by `F` after every iteration.
    pub objective_history: Vec<f64>,
    pub converged: bool,
    /// ADMM: `‖x − z‖₂` at exit. APG: `‖x_i − x_{i−1}‖₂` at exit.
    pub final_residual: f64,
}

impl SolverResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective_history.last().expect("history holds the initial objective")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    pub lambda: f64,
    pub rho: f64,
    pub max_iters: usize,
    /// Stop once `‖x − z‖₂` and `ρ ‖z − z_prev‖₂` are both `≤ tol · ‖b‖₂`.
    pub tol: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            rho: 1.0,
            max_iters: 1000,
            tol: 1e-6,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(DeconvError::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("rho", self.rho)?;
        positive("tol", self.tol)?;
        if self.max_iters == 0 {
            return Err(DeconvError::InvalidConfig("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// `(HᵀH + ρI)⁻¹ (Hᵀb + ρz − y)`, solved exactly per frequency.
pub fn admm_x_update(b: &Image, k: &Kernel, z: &Image, y: &Image, rho: f64) -> Result<Image> {
    let op = LinearBlurOperator::new(k, b.shape())?;
    let htb = op.apply_adjoint(b)?;
    x_update(&op, &htb, z, y, rho)
}

fn x_update(op: &LinearBlurOperator, htb: &Image, z: &Image, y: &Image, rho: f64) -> Result<Image> {
    let rhs = htb.add_scaled(z, rho)?.sub(y)?;
    op.filter(&rhs, |_, kh| Complex64::new(1.0 / (kh.norm_sqr() + rho), 0.0))
}

/// The same x-update from a dense factorization of `HᵀH + ρI`.
pub fn admm_x_update_dense(b: &Image, k: &Kernel, z: &Image, y: &Image, rho: f64) -> Result<Image> {
    let shape = b.shape();
    let h = materialize_operator(k, shape)?;
    let ht = h.transpose();
    let n = h.ncols();
    let system = &ht * &h + DMatrix::identity(n, n) * rho;
    let rhs = &ht * vectorize(b) + vectorize(z) * rho - vectorize(y);
    unvectorize(&solve_spd_or_lu(system, rhs)?, shape)
}

/// ADMM on `F` with splitting `x = z`; starts from `z = b`, `y = 0`.
/// Returns the shrunk iterate `z` as the estimate.
///
/// The x-update is that of `½‖Hx − b‖² + (λ/2)‖z‖₁`, i.e. of `F / 2`, so
/// the shrinkage threshold is `λ / (2ρ)`; this keeps `λ` on the same scale as
/// in [`apg_l1`].
pub fn admm_l1(b: &Image, k: &Kernel, cfg: &AdmmConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let op = LinearBlurOperator::new(k, b.shape())?;
    let htb = op.apply_adjoint(b)?;
    let threshold = 0.5 * cfg.lambda / cfg.rho;
    let bound = cfg.tol * b.norm_l2();
    let (h, w) = b.shape();

    let mut z = b.clone();
    let mut y = Image::zeros(h, w);
    let mut history = vec![objective(&op, b, &z, cfg.lambda)?];
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < cfg.max_iters {
        iterations += 1;
        let x = x_update(&op, &htb, &z, &y, cfg.rho)?;
        let z_next = soft_shrink(&x.add_scaled(&y, 1.0 / cfg.rho)?, threshold)?;
        let primal = x.sub(&z_next)?;
        y = y.add_scaled(&primal, cfg.rho)?;
        let dual = cfg.rho * z_next.sub(&z)?.norm_l2();
        z = z_next;
        history.push(objective(&op, b, &z, cfg.lambda)?);
        residual = primal.norm_l2();
        if residual <= bound && dual <= bound {
            converged = true;
            break;
        }
    }
    Ok(SolverResult {
        x_hat: z,
        iterations_used: iterations,
        objective_history: history,
        converged,
        final_residual: residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApgConfig {
    pub lambda: f64,
    /// Step size `t`; must not exceed `1 / (2 max|k̂|²) = 0.5`.
    pub step: f64,
    pub max_iters: usize,
    /// Stop once `‖x_i − x_{i−1}‖₂ ≤ tol · max(‖x_i‖₂, ‖x_{i−1}‖₂)`.
    pub tol: f64,
    /// Use the gradient factor `2λt` instead of `2t`.
    pub paper_literal_step: bool,
}

/// Largest admissible APG step for any normalized kernel.
pub const APG_MAX_STEP: f64 = 0.5;

impl Default for ApgConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            step: 0.25,
            max_iters: 1000,
            tol: 1e-6,
            paper_literal_step: false,
        }
    }
}

impl ApgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(DeconvError::InvalidConfig(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.step > 0.0 && self.step <= APG_MAX_STEP) {
            return Err(DeconvError::InvalidConfig(format!(
                "step must lie in (0, {APG_MAX_STEP}], got {}",
                self.step
            )));
        }
        if !(self.tol > 0.0) {
            return Err(DeconvError::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(DeconvError::InvalidConfig("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Accelerated proximal gradient from `x⁰ = y⁰ = b`:
///
/// ```text
/// x_i ← S_{λt}(y − 2t Hᵀ(H y − b))
/// y   ← x_i + (i − 1)/(i + 2) · (x_i − x_{i−1})
/// ```
pub fn apg_l1(b: &Image, k: &Kernel, cfg: &ApgConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let op = LinearBlurOperator::new(k, b.shape())?;
    let htb = op.apply_adjoint(b)?;
    let grad_scale = if cfg.paper_literal_step {
        2.0 * cfg.lambda * cfg.step
    } else {
        2.0 * cfg.step
    };
    let threshold = cfg.lambda * cfg.step;

    let mut x_prev = b.clone();
    let mut y = b.clone();
    let mut history = vec![objective(&op, b, &x_prev, cfg.lambda)?];
    let mut converged = false;
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    while iterations < cfg.max_iters {
        iterations += 1;
        let i = iterations as f64;
        // Hᵀ(Hy − b) = HᵀH y − Hᵀb
        let grad = op.apply_normal(&y)?.sub(&htb)?;
        let x = soft_shrink(&y.add_scaled(&grad, -grad_scale)?, threshold)?;
        let delta = x.sub(&x_prev)?;
        y = x.add_scaled(&delta, (i - 1.0) / (i + 2.0))?;
        history.push(objective(&op, b, &x, cfg.lambda)?);
        change = delta.norm_l2();
        let scale = x.norm_l2().max(x_prev.norm_l2());
        x_prev = x;
        if change <= cfg.tol * scale {
            converged = true;
            break;
        }
    }
    Ok(SolverResult {
        x_hat: x_prev,
        iterations_used: iterations,
        objective_history: history,
        converged,
        final_residual: change,
    })
}
