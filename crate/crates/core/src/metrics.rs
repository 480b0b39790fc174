//! Quality metrics and training losses.
//!
//! PSNR and SSIM assume a peak intensity of 1.0. SSIM uses an 11×11 Gaussian
//! window (σ = 1.5) over every fully contained window position with the usual
//! stabilizers `K1 = 0.01`, `K2 = 0.03`.
//!
//! Losses are per-pixel means: a smooth-L1 content term and a squared
//! difference of circular forward-difference gradients.

use crate::error::{DeconvError, Result};
use crate::image::Image;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Default content-loss weight.
pub const DEFAULT_ALPHA: f64 = 5000.0;
/// Default edge-loss weight.
pub const DEFAULT_GAMMA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    /// `+∞` for identical images.
    pub psnr_db: f64,
    pub ssim: f64,
}

pub fn quality(x_hat: &Image, x: &Image) -> Result<QualityReport> {
    Ok(QualityReport {
        psnr_db: psnr(x_hat, x)?,
        ssim: ssim(x_hat, x)?,
    })
}

pub fn mse(x_hat: &Image, x: &Image) -> Result<f64> {
    x_hat.check_same_shape(x)?;
    let sum: f64 = x_hat
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / x.len() as f64)
}

/// `10 log10(1 / MSE)`.
pub fn psnr(x_hat: &Image, x: &Image) -> Result<f64> {
    let m = mse(x_hat, x)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * m.log10())
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = g.iter().sum();
    let g: Vec<f64> = g.into_iter().map(|v| v / s).collect();
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for a in &g {
        for b in &g {
            w.push(a * b);
        }
    }
    w
}

/// Mean SSIM over all window positions.
pub fn ssim(x_hat: &Image, x: &Image) -> Result<f64> {
    x_hat.check_same_shape(x)?;
    let (h, w) = x.shape();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(DeconvError::InvalidShape {
            height: h,
            width: w,
            reason: format!("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels"),
        });
    }
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let win = gaussian_window();
    let (a, b) = (x_hat.as_slice(), x.as_slice());
    let mut total = 0.0;
    let mut count = 0usize;
    for r0 in 0..=h - SSIM_WINDOW {
        for c0 in 0..=w - SSIM_WINDOW {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..SSIM_WINDOW {
                let row = (r0 + i) * w + c0;
                for j in 0..SSIM_WINDOW {
                    let g = win[i * SSIM_WINDOW + j];
                    let (va, vb) = (a[row + j], b[row + j]);
                    ma += g * va;
                    mb += g * vb;
                    saa += g * va * va;
                    sbb += g * vb * vb;
                    sab += g * va * vb;
                }
            }
            let var_a = saa - ma * ma;
            let var_b = sbb - mb * mb;
            let cov = sab - ma * mb;
            let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
            let den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
            total += num / den;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

#[inline]
fn smooth_l1(d: f64) -> f64 {
    let a = d.abs();
    if a < 1.0 {
        0.5 * d * d
    } else {
        a - 0.5
    }
}

/// Mean smooth-L1 of `x̂ − x` (quadratic below `|d| = 1`).
pub fn content_loss(x_hat: &Image, x: &Image) -> Result<f64> {
    x_hat.check_same_shape(x)?;
    let sum: f64 = x_hat
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(a, b)| smooth_l1(a - b))
        .sum();
    Ok(sum / x.len() as f64)
}

/// Per-pixel mean of `(∂_h x̂ − ∂_h x)² + (∂_v x̂ − ∂_v x)²` with circular
/// forward differences.
pub fn edge_loss(x_hat: &Image, x: &Image) -> Result<f64> {
    x_hat.check_same_shape(x)?;
    let (h, w) = x.shape();
    // gradients are linear, so difference first
    let d = x_hat.sub(x)?;
    let mut sum = 0.0;
    for r in 0..h {
        for c in 0..w {
            let v = d.get(r, c);
            let dh = d.get(r, (c + 1) % w) - v;
            let dv = d.get((r + 1) % h, c) - v;
            sum += dh * dh + dv * dv;
        }
    }
    Ok(sum / (h * w) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub content: f64,
    pub edge: f64,
    /// `alpha · content + gamma · edge`.
    pub total: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl LossReport {
    pub fn from_parts(content: f64, edge: f64, alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha >= 0.0 && gamma >= 0.0) {
            return Err(DeconvError::InvalidConfig(format!(
                "loss weights must be nonnegative, got alpha={alpha} gamma={gamma}"
            )));
        }
        Ok(Self {
            content,
            edge,
            total: alpha * content + gamma * edge,
            alpha,
            gamma,
        })
    }
}

pub fn total_loss(x_hat: &Image, x: &Image, alpha: f64, gamma: f64) -> Result<LossReport> {
    LossReport::from_parts(content_loss(x_hat, x)?, edge_loss(x_hat, x)?, alpha, gamma)
}

/// [`total_loss`] with the default weights.
pub fn default_total_loss(x_hat: &Image, x: &Image) -> Result<LossReport> {
    total_loss(x_hat, x, DEFAULT_ALPHA, DEFAULT_GAMMA)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texture(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, |r, c| ((r * 13 + c * 7) % 11) as f64 / 10.0)
    }

    #[test]
    fn psnr_cases() {
        let x = texture(8, 8);
        assert_eq!(psnr(&x, &x).unwrap(), f64::INFINITY);
        let shifted = x.map(|v| v + 0.1);
        assert!((psnr(&shifted, &x).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&x, &Image::zeros(8, 7)).is_err());
    }

    #[test]
    fn ssim_identical_and_constant() {
        let x = texture(16, 16);
        assert_eq!(ssim(&x, &x).unwrap(), 1.0);
        let c = Image::filled(12, 12, 0.5);
        assert_eq!(ssim(&c, &c).unwrap(), 1.0);
        assert!(ssim(&Image::zeros(10, 20), &Image::zeros(10, 20)).is_err());
    }

    #[test]
    fn content_cases() {
        let x = texture(4, 4);
        assert_eq!(content_loss(&x, &x).unwrap(), 0.0);
        assert_eq!(content_loss(&x.map(|v| v + 0.5), &x).unwrap(), 0.125);
        assert!((content_loss(&x.map(|v| v + 2.0), &x).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn edge_constants() {
        let a = Image::filled(5, 5, 0.2);
        let b = Image::filled(5, 5, 0.9);
        assert_eq!(edge_loss(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn total_arithmetic() {
        let r = LossReport::from_parts(0.1, 0.01, DEFAULT_ALPHA, DEFAULT_GAMMA).unwrap();
        assert!((r.total - 501.0).abs() < 1e-9);
        assert!(LossReport::from_parts(0.1, 0.01, -1.0, 0.0).is_err());
        let x = texture(6, 6);
        let y = x.map(|v| v * 0.5);
        let pure = total_loss(&y, &x, 3.0, 0.0).unwrap();
        assert_eq!(pure.total, 3.0 * pure.content);
        assert_eq!(default_total_loss(&x, &x).unwrap().total, 0.0);
    }
}
