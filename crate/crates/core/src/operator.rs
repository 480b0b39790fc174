//! Circular-boundary blur operator `H`, its adjoint, its spectrum, and a dense
//! materialization used as a ground-truth oracle.
//!
//! With periodic boundaries `H` is block-circulant, so the 2-D DFT
//! diagonalizes it: `H x = IDFT(k̂ · x̂)` and `Hᵀ y = IDFT(conj(k̂) · ŷ)`, where
//! `k̂` is the DFT of the kernel zero-padded to the image size and shifted so
//! its center tap sits at index `(0, 0)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{DeconvError, Result};
use crate::image::{Image, Kernel, PriorPatch, Stencil};

/// Largest pixel count accepted by the dense oracle paths.
pub const ORACLE_MAX_PIXELS: usize = 4096;

/// Tolerance for the real/nonnegative check on prior-patch spectra.
const PRIOR_SPECTRUM_TOL: f64 = 1e-12;

/// Planned forward/inverse 2-D FFT for one image shape.
#[derive(Clone)]
pub(crate) struct Fft2 {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fft2({}x{})", self.height, self.width)
    }
}

impl Fft2 {
    pub(crate) fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
        for r in 0..rows {
            for c in 0..cols {
                dst[c * rows + r] = src[r * cols + c];
            }
        }
    }

    fn run(&self, buf: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        let (h, w) = (self.height, self.width);
        // rustfft transforms every contiguous chunk of the plan length
        row.process(buf);
        if h > 1 {
            let mut t = vec![Complex64::new(0.0, 0.0); h * w];
            Self::transpose(buf, &mut t, h, w);
            col.process(&mut t);
            Self::transpose(&t, buf, w, h);
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_fwd, &self.col_fwd);
    }

    /// Normalized inverse: `inverse(forward(x)) == x`.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (self.height * self.width) as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    pub(crate) fn forward_real(&self, x: &Image) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse transform keeping the real part.
    pub(crate) fn inverse_real(&self, mut buf: Vec<Complex64>) -> Image {
        self.inverse(&mut buf);
        Image::from_raw(self.height, self.width, buf.into_iter().map(|c| c.re).collect())
    }
}

fn check_fits(rows: usize, cols: usize, shape: (usize, usize)) -> Result<()> {
    let (height, width) = shape;
    if rows > height || cols > width || height == 0 || width == 0 {
        return Err(DeconvError::KernelTooLarge {
            kernel_h: rows,
            kernel_w: cols,
            height,
            width,
        });
    }
    Ok(())
}

/// Places a stencil on an image-sized grid with its center at the origin.
fn stencil_to_grid(s: Stencil<'_>, shape: (usize, usize)) -> Vec<Complex64> {
    let (height, width) = shape;
    let (cr, cc) = (s.rows / 2, s.cols / 2);
    let mut grid = vec![Complex64::new(0.0, 0.0); height * width];
    for a in 0..s.rows {
        let r = (a + height - cr) % height;
        for b in 0..s.cols {
            let c = (b + width - cc) % width;
            grid[r * width + c].re += s.taps[a * s.cols + b];
        }
    }
    grid
}

fn stencil_spectrum(s: Stencil<'_>, shape: (usize, usize), fft: &Fft2) -> Vec<Complex64> {
    let mut grid = stencil_to_grid(s, shape);
    fft.forward(&mut grid);
    grid
}

/// Per-frequency response of a kernel on a given grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    values: Vec<Complex64>,
}

impl Spectrum {
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        self.values[u * self.width + v]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `|k̂(ω)|²` at every frequency.
    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// DFT of the kernel zero-padded to `shape` with its center moved to `(0, 0)`.
pub fn transfer_function(k: &Kernel, shape: (usize, usize)) -> Result<Spectrum> {
    check_fits(k.rows(), k.cols(), shape)?;
    let fft = Fft2::new(shape.0, shape.1);
    Ok(Spectrum {
        height: shape.0,
        width: shape.1,
        values: stencil_spectrum(k.into(), shape, &fft),
    })
}

/// Real, nonnegative spectrum `ĉ(ω)` of a prior patch; errors if the patch
/// does not fit or its spectrum goes negative on this grid.
pub fn prior_transfer(f_x: &PriorPatch, shape: (usize, usize)) -> Result<Vec<f64>> {
    check_fits(f_x.rows(), f_x.cols(), shape)?;
    if f_x.is_delta() {
        return Ok(vec![1.0; shape.0 * shape.1]);
    }
    let fft = Fft2::new(shape.0, shape.1);
    let spec = stencil_spectrum(f_x.into(), shape, &fft);
    let scale = spec.iter().fold(1.0f64, |m, c| m.max(c.norm()));
    let mut out = Vec::with_capacity(spec.len());
    for c in spec {
        if c.im.abs() > PRIOR_SPECTRUM_TOL * scale || c.re < -PRIOR_SPECTRUM_TOL * scale {
            return Err(DeconvError::InvalidPrior(format!(
                "spectrum is not real and nonnegative on a {}x{} grid (value {c})",
                shape.0, shape.1
            )));
        }
        out.push(c.re.max(0.0));
    }
    Ok(out)
}

/// Circular blur operator bound to one kernel and one image shape.
///
/// Planning and the kernel spectrum are computed once; `apply` and
/// `apply_adjoint` then cost one forward and one inverse FFT each.
#[derive(Debug, Clone)]
pub struct LinearBlurOperator {
    kernel: Kernel,
    height: usize,
    width: usize,
    spectrum: Vec<Complex64>,
    fft: Fft2,
}

impl LinearBlurOperator {
    pub fn new(kernel: &Kernel, shape: (usize, usize)) -> Result<Self> {
        check_fits(kernel.rows(), kernel.cols(), shape)?;
        let fft = Fft2::new(shape.0, shape.1);
        let spectrum = stencil_spectrum(kernel.into(), shape, &fft);
        Ok(Self {
            kernel: kernel.clone(),
            height: shape.0,
            width: shape.1,
            spectrum,
            fft,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Boundary handling is always periodic.
    pub fn boundary(&self) -> &'static str {
        "circular"
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            height: self.height,
            width: self.width,
            values: self.spectrum.clone(),
        }
    }

    pub(crate) fn spectrum_values(&self) -> &[Complex64] {
        &self.spectrum
    }

    fn check_input(&self, x: &Image) -> Result<()> {
        if x.shape() != (self.height, self.width) {
            return Err(DeconvError::ShapeMismatch(
                x.height(),
                x.width(),
                self.height,
                self.width,
            ));
        }
        Ok(())
    }

    /// Multiplies `x̂` pointwise by `response(i, k̂_i)` and transforms back.
    pub(crate) fn filter(&self, x: &Image, response: impl Fn(usize, Complex64) -> Complex64) -> Result<Image> {
        self.check_input(x)?;
        let mut buf = self.fft.forward_real(x);
        for (i, (v, k)) in buf.iter_mut().zip(&self.spectrum).enumerate() {
            *v *= response(i, *k);
        }
        Ok(self.fft.inverse_real(buf))
    }

    /// `H x`, i.e. `k * x`.
    pub fn apply(&self, x: &Image) -> Result<Image> {
        self.filter(x, |_, k| k)
    }

    /// `Hᵀ y`, i.e. convolution with the flipped kernel.
    pub fn apply_adjoint(&self, y: &Image) -> Result<Image> {
        self.filter(y, |_, k| k.conj())
    }

    /// `Hᵀ H x`.
    pub fn apply_normal(&self, x: &Image) -> Result<Image> {
        self.filter(x, |_, k| Complex64::new(k.norm_sqr(), 0.0))
    }
}

/// Periodic convolution `k * x` with the kernel centered, computed in the
/// frequency domain.
pub fn convolve_circular(x: &Image, k: &Kernel) -> Result<Image> {
    if k.is_delta() {
        check_fits(k.rows(), k.cols(), x.shape())?;
        return Ok(x.clone());
    }
    LinearBlurOperator::new(k, x.shape())?.apply(x)
}

/// Periodic convolution by explicit summation with wrapped indices.
pub fn convolve_circular_direct(x: &Image, k: &Kernel) -> Result<Image> {
    convolve_stencil_direct(x, k.into())
}

pub(crate) fn convolve_stencil_direct(x: &Image, s: Stencil<'_>) -> Result<Image> {
    let (height, width) = x.shape();
    check_fits(s.rows, s.cols, (height, width))?;
    let (cr, cc) = (s.rows / 2, s.cols / 2);
    Ok(Image::from_fn(height, width, |r, c| {
        let mut acc = 0.0;
        for a in 0..s.rows {
            let rr = (r + height * 2 + cr - a) % height;
            for b in 0..s.cols {
                let t = s.taps[a * s.cols + b];
                if t != 0.0 {
                    let cc2 = (c + width * 2 + cc - b) % width;
                    acc += t * x.get(rr, cc2);
                }
            }
        }
        acc
    }))
}

/// `Hᵀ y`, equal to `convolve_circular(y, flip_kernel(k))`.
pub fn apply_adjoint(y: &Image, k: &Kernel) -> Result<Image> {
    if k.is_delta() {
        check_fits(k.rows(), k.cols(), y.shape())?;
        return Ok(y.clone());
    }
    LinearBlurOperator::new(k, y.shape())?.apply_adjoint(y)
}

/// Per-frequency contraction factors `|σ' − |k̂(ω)|² ĉ(ω)|` of the residual
/// recursion, with `σ' = 1 − σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFactors {
    pub height: usize,
    pub width: usize,
    pub factors: Vec<f64>,
    /// Largest factor; the residual series contracts geometrically at this rate.
    pub rho_max: f64,
}

impl ConvergenceFactors {
    /// Smallest `N` with `ρ^{N+1} / (1 − ρ) ≤ tol`, or `None` if `ρ ≥ 1`.
    pub fn iterations_for_tail(&self, tol: f64) -> Option<usize> {
        tail_bound_iterations(self.rho_max, tol)
    }
}

pub(crate) fn tail_bound_iterations(rho: f64, tol: f64) -> Option<usize> {
    if !(0.0..1.0).contains(&rho) {
        return None;
    }
    if rho == 0.0 {
        return Some(0);
    }
    // ρ^{N+1} ≤ tol (1 − ρ)
    let needed = ((tol * (1.0 - rho)).ln() / rho.ln() - 1.0).ceil();
    Some(needed.max(0.0) as usize)
}

pub fn convergence_factors(
    k: &Kernel,
    f_x: &PriorPatch,
    sigma: f64,
    shape: (usize, usize),
) -> Result<ConvergenceFactors> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(DeconvError::InvalidConfig(format!("sigma must lie in (0, 1), got {sigma}")));
    }
    let spectrum = transfer_function(k, shape)?;
    let prior = prior_transfer(f_x, shape)?;
    let damp = 1.0 - sigma;
    let factors: Vec<f64> = spectrum
        .values()
        .iter()
        .zip(&prior)
        .map(|(kh, c)| (damp - kh.norm_sqr() * c).abs())
        .collect();
    let rho_max = factors.iter().copied().fold(0.0, f64::max);
    Ok(ConvergenceFactors {
        height: shape.0,
        width: shape.1,
        factors,
        rho_max,
    })
}

pub(crate) fn materialize_stencil(s: Stencil<'_>, shape: (usize, usize)) -> Result<DMatrix<f64>> {
    let (height, width) = shape;
    let pixels = height * width;
    if pixels > ORACLE_MAX_PIXELS {
        return Err(DeconvError::TooLargeForOracle {
            pixels,
            limit: ORACLE_MAX_PIXELS,
        });
    }
    check_fits(s.rows, s.cols, shape)?;
    let (cr, cc) = (s.rows / 2, s.cols / 2);
    let mut m = DMatrix::zeros(pixels, pixels);
    for r in 0..height {
        for c in 0..width {
            let row = r * width + c;
            for a in 0..s.rows {
                let rr = (r + height + cr - a) % height;
                for b in 0..s.cols {
                    let cc2 = (c + width + cc - b) % width;
                    m[(row, rr * width + cc2)] += s.taps[a * s.cols + b];
                }
            }
        }
    }
    Ok(m)
}

/// Dense `(HW)×(HW)` matrix of the circular blur acting on row-major `vec(x)`.
pub fn materialize_operator(k: &Kernel, shape: (usize, usize)) -> Result<DMatrix<f64>> {
    materialize_stencil(k.into(), shape)
}

/// Dense matrix of convolution with a prior patch.
pub fn materialize_prior(f_x: &PriorPatch, shape: (usize, usize)) -> Result<DMatrix<f64>> {
    materialize_stencil(f_x.into(), shape)
}

/// Row-major `vec(x)`.
pub fn vectorize(x: &Image) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &nalgebra::DVector<f64>, shape: (usize, usize)) -> Result<Image> {
    Image::new(shape.0, shape.1, v.as_slice().to_vec())
}
