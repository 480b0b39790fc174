//! Image, kernel and prior-patch value types.
//!
//! All types are immutable after construction and validate their invariants on
//! every constructor path, so a [`Kernel`] with a negative tap or a sum away
//! from one cannot exist.

use crate::error::{DeconvError, Result};

/// Tolerance on the kernel tap sum.
pub const KERNEL_SUM_TOL: f64 = 1e-12;

/// Grayscale intensity field, row-major, nominal range `[0, 1]`.
///
/// Values outside `[0, 1]` are allowed; they are clamped only when saved.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(DeconvError::InvalidShape {
                height,
                width,
                reason: "dimensions must be positive".into(),
            });
        }
        if data.len() != height * width {
            return Err(DeconvError::InvalidShape {
                height,
                width,
                reason: format!("expected {} pixels, got {}", height * width, data.len()),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(DeconvError::InvalidShape {
                height,
                width,
                reason: format!("non-finite value at pixel {i}"),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        assert!(value.is_finite());
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self {
            height,
            width,
            data,
        }
    }

    /// Internal constructor for results of arithmetic on valid images.
    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image::from_raw(self.height, self.width, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, factor: f64) -> Image {
        self.map(|v| v * factor)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Image, factor: f64) -> Result<Image> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(Image::from_raw(self.height, self.width, data))
    }

    pub fn sub(&self, other: &Image) -> Result<Image> {
        self.add_scaled(other, -1.0)
    }

    pub fn dot(&self, other: &Image) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm_l2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// `‖self - other‖₂ / ‖other‖₂`, or the absolute distance when `other` is zero.
    pub fn rel_l2_error(&self, reference: &Image) -> Result<f64> {
        let diff = self.sub(reference)?.norm_l2();
        let denom = reference.norm_l2();
        Ok(if denom > 0.0 { diff / denom } else { diff })
    }

    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub(crate) fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(DeconvError::ShapeMismatch(
                self.height,
                self.width,
                other.height,
                other.width,
            ));
        }
        Ok(())
    }
}

/// Multi-channel interleaved image, used only on the way in from color files.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

/// BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Y channel of YCbCr (BT.601) for a three-channel image in `[0, 1]`.
pub fn rgb_to_luma(rgb: &ColorImage) -> Result<Image> {
    if rgb.channels != 3 {
        return Err(DeconvError::UnsupportedFormat(format!(
            "luma conversion needs 3 channels, got {}",
            rgb.channels
        )));
    }
    if rgb.data.len() != rgb.height * rgb.width * 3 {
        return Err(DeconvError::InvalidShape {
            height: rgb.height,
            width: rgb.width,
            reason: "channel buffer length mismatch".into(),
        });
    }
    let data = rgb
        .data
        .chunks_exact(3)
        .map(|px| {
            // same weights, arranged so equal channels reproduce their value exactly
            let y = px[1] + LUMA_WEIGHTS[0] * (px[0] - px[1]) + LUMA_WEIGHTS[2] * (px[2] - px[1]);
            let in_range = px.iter().all(|v| (0.0..=1.0).contains(v));
            if in_range {
                y.clamp(0.0, 1.0)
            } else {
                y
            }
        })
        .collect();
    Image::new(rgb.height, rgb.width, data)
}

fn check_odd_dims(rows: usize, cols: usize, taps: usize) -> std::result::Result<(), String> {
    if rows == 0 || cols == 0 || rows.is_multiple_of(2) || cols.is_multiple_of(2) {
        return Err(format!("dimensions must be odd and positive, got {rows}x{cols}"));
    }
    if taps != rows * cols {
        return Err(format!("expected {} taps, got {taps}", rows * cols));
    }
    Ok(())
}

/// Normalized nonnegative blur kernel with odd dimensions; the center tap sits
/// at `(rows / 2, cols / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: usize,
    cols: usize,
    taps: Vec<f64>,
}

impl Kernel {
    /// Validates taps as given: each finite and `>= 0`, sum within [`KERNEL_SUM_TOL`] of one.
    pub fn new(rows: usize, cols: usize, taps: Vec<f64>) -> Result<Self> {
        check_odd_dims(rows, cols, taps.len()).map_err(DeconvError::InvalidKernel)?;
        if let Some(t) = taps.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(DeconvError::InvalidKernel(format!("tap {t} is negative or non-finite")));
        }
        let sum: f64 = taps.iter().sum();
        if (sum - 1.0).abs() > KERNEL_SUM_TOL {
            return Err(DeconvError::InvalidKernel(format!("taps sum to {sum}, expected 1")));
        }
        Ok(Self { rows, cols, taps })
    }

    /// Divides nonnegative taps by their sum.
    pub fn normalized(rows: usize, cols: usize, taps: Vec<f64>) -> Result<Self> {
        check_odd_dims(rows, cols, taps.len()).map_err(DeconvError::InvalidKernel)?;
        if let Some(t) = taps.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(DeconvError::InvalidKernel(format!("tap {t} is negative or non-finite")));
        }
        let sum: f64 = taps.iter().sum();
        if sum <= 0.0 {
            return Err(DeconvError::InvalidKernel("taps sum to zero".into()));
        }
        Self::new(rows, cols, taps.into_iter().map(|t| t / sum).collect())
    }

    /// Single unit tap.
    pub fn delta(rows: usize, cols: usize) -> Result<Self> {
        check_odd_dims(rows, cols, rows * cols).map_err(DeconvError::InvalidKernel)?;
        let mut taps = vec![0.0; rows * cols];
        taps[(rows / 2) * cols + cols / 2] = 1.0;
        Ok(Self { rows, cols, taps })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn center(&self) -> (usize, usize) {
        (self.rows / 2, self.cols / 2)
    }

    #[inline]
    pub fn tap(&self, row: usize, col: usize) -> f64 {
        self.taps[row * self.cols + col]
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    pub fn is_delta(&self) -> bool {
        let (cr, cc) = self.center();
        self.taps
            .iter()
            .enumerate()
            .all(|(i, &t)| if i == cr * self.cols + cc { t == 1.0 } else { t == 0.0 })
    }
}

/// Rotates the kernel by 180°, giving the kernel of the adjoint operator.
pub fn flip_kernel(k: &Kernel) -> Kernel {
    // 180° rotation of a row-major grid is a reversal of the buffer
    Kernel {
        rows: k.rows,
        cols: k.cols,
        taps: k.taps.iter().rev().copied().collect(),
    }
}

/// Centrally symmetric correlation patch acting as the image prior.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorPatch {
    rows: usize,
    cols: usize,
    taps: Vec<f64>,
}

impl PriorPatch {
    pub fn new(rows: usize, cols: usize, taps: Vec<f64>) -> Result<Self> {
        check_odd_dims(rows, cols, taps.len()).map_err(DeconvError::InvalidPrior)?;
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(DeconvError::InvalidPrior("non-finite tap".into()));
        }
        let n = taps.len();
        for i in 0..n / 2 {
            if taps[i] != taps[n - 1 - i] {
                return Err(DeconvError::InvalidPrior(format!(
                    "patch is not centrally symmetric at tap {i}"
                )));
            }
        }
        Ok(Self { rows, cols, taps })
    }

    /// The independent-pixel prior `f_x = δ`.
    pub fn delta() -> Self {
        Self {
            rows: 1,
            cols: 1,
            taps: vec![1.0],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn is_delta(&self) -> bool {
        let center = (self.rows / 2) * self.cols + self.cols / 2;
        self.taps
            .iter()
            .enumerate()
            .all(|(i, &t)| if i == center { t == 1.0 } else { t == 0.0 })
    }
}

impl Default for PriorPatch {
    fn default() -> Self {
        Self::delta()
    }
}

/// Borrowed view of an odd-sized stencil, shared by kernels and prior patches.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil<'a> {
    pub rows: usize,
    pub cols: usize,
    pub taps: &'a [f64],
}

impl<'a> From<&'a Kernel> for Stencil<'a> {
    fn from(k: &'a Kernel) -> Self {
        Stencil {
            rows: k.rows,
            cols: k.cols,
            taps: &k.taps,
        }
    }
}

impl<'a> From<&'a PriorPatch> for Stencil<'a> {
    fn from(p: &'a PriorPatch) -> Self {
        Stencil {
            rows: p.rows,
            cols: p.cols,
            taps: &p.taps,
        }
    }
}
