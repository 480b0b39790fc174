//! Synthetic degradation `b = k * x + η` and blur-kernel generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{DeconvError, Result};
use crate::image::{Image, Kernel};
use crate::operator::convolve_circular;

/// Name of the generator behind every seeded draw in this module.
pub const PRNG_NAME: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradeConfig {
    /// Standard deviation of the additive Gaussian noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl DegradeConfig {
    pub fn new(noise_sigma: f64, seed: u64) -> Self {
        Self { noise_sigma, seed }
    }
}

/// Blurs circularly and adds i.i.d. Gaussian noise drawn in row-major order.
pub fn degrade(x: &Image, k: &Kernel, cfg: &DegradeConfig) -> Result<Image> {
    if !(cfg.noise_sigma >= 0.0 && cfg.noise_sigma.is_finite()) {
        return Err(DeconvError::InvalidConfig(format!(
            "noise_sigma must be nonnegative, got {}",
            cfg.noise_sigma
        )));
    }
    let blurred = convolve_circular(x, k)?;
    if cfg.noise_sigma == 0.0 {
        return Ok(blurred);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, cfg.noise_sigma).expect("finite nonnegative sigma");
    let (h, w) = blurred.shape();
    let data = blurred
        .into_vec()
        .into_iter()
        .map(|v| v + normal.sample(&mut rng))
        .collect();
    Image::new(h, w, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Trajectory,
    Disk,
    Gaussian,
}

impl std::str::FromStr for KernelFamily {
    type Err = DeconvError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trajectory" => Ok(KernelFamily::Trajectory),
            "disk" => Ok(KernelFamily::Disk),
            "gaussian" => Ok(KernelFamily::Gaussian),
            _ => Err(DeconvError::InvalidConfig(format!("unknown kernel family {s:?}"))),
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelFamily::Trajectory => "trajectory",
            KernelFamily::Disk => "disk",
            KernelFamily::Gaussian => "gaussian",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGenConfig {
    /// Odd grid size, at least 3.
    pub size: usize,
    pub seed: u64,
    pub family: KernelFamily,
}

impl KernelGenConfig {
    pub fn trajectory(size: usize, seed: u64) -> Self {
        Self {
            size,
            seed,
            family: KernelFamily::Trajectory,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 3 || self.size.is_multiple_of(2) {
            return Err(DeconvError::InvalidConfig(format!(
                "kernel size must be odd and at least 3, got {}",
                self.size
            )));
        }
        Ok(())
    }
}

/// Generates a kernel of the configured family. Disk radius and Gaussian
/// width are drawn from the seed.
pub fn gen_kernel(cfg: &KernelGenConfig) -> Result<Kernel> {
    cfg.validate()?;
    let half = (cfg.size / 2) as f64;
    match cfg.family {
        KernelFamily::Trajectory => gen_trajectory_kernel(cfg),
        KernelFamily::Disk => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let radius = rng.random_range(0.35 * half..=half);
            disk_on_grid(radius, cfg.size)
        }
        KernelFamily::Gaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let sigma = rng.random_range(cfg.size as f64 / 12.0..=cfg.size as f64 / 6.0);
            gen_gaussian_kernel(cfg.size, sigma)
        }
    }
}

const TRAJECTORY_STEPS: usize = 64;
const TRAJECTORY_MAX_RETRIES: u64 = 10;
/// Spacing of splatted samples along each trajectory segment, in pixels.
const SPLAT_SPACING: f64 = 0.25;

/// Camera-shake kernel from a seeded random walk with momentum.
///
/// The walk is resampled densely along its segments, centered on its mean,
/// scaled to a random extent inside the grid, splatted bilinearly, smoothed
/// with a 3×3 Gaussian (σ = 0.5), and normalized. Centering on the sample
/// mean puts the kernel's center of mass on the grid center.
pub fn gen_trajectory_kernel(cfg: &KernelGenConfig) -> Result<Kernel> {
    cfg.validate()?;
    for attempt in 0..=TRAJECTORY_MAX_RETRIES {
        if let Some(k) = try_trajectory(cfg.size, cfg.seed.wrapping_add(attempt))? {
            return Ok(k);
        }
    }
    Err(DeconvError::InvalidKernel(format!(
        "degenerate trajectory after {TRAJECTORY_MAX_RETRIES} retries from seed {}",
        cfg.seed
    )))
}

fn try_trajectory(size: usize, seed: u64) -> Result<Option<Kernel>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let momentum = 0.7;

    let mut vertices = Vec::with_capacity(TRAJECTORY_STEPS + 1);
    let (mut p, mut v) = ([0.0f64; 2], [0.0f64; 2]);
    vertices.push(p);
    for _ in 0..TRAJECTORY_STEPS {
        for d in 0..2 {
            v[d] = momentum * v[d] + normal.sample(&mut rng);
            p[d] += v[d];
        }
        vertices.push(p);
    }

    let extent = vertices
        .iter()
        .flat_map(|q| q.iter())
        .fold(0.0f64, |m, c| m.max(c.abs()));
    if extent < 1e-9 {
        return Ok(None);
    }

    // uniform arc-length samples, so the mean is the path's center of mass
    let mut samples = Vec::new();
    for seg in vertices.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let n = ((len / SPLAT_SPACING).ceil() as usize).max(1);
        for i in 0..n {
            let t = i as f64 / n as f64;
            samples.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    samples.push(*vertices.last().expect("nonempty walk"));
    let count = samples.len() as f64;
    let mean = samples.iter().fold([0.0, 0.0], |m, s| [m[0] + s[0], m[1] + s[1]]);
    let mean = [mean[0] / count, mean[1] / count];
    for s in &mut samples {
        s[0] -= mean[0];
        s[1] -= mean[1];
    }
    let spread = samples
        .iter()
        .flat_map(|s| s.iter())
        .fold(0.0f64, |m, c| m.max(c.abs()));
    if spread < 0.5 {
        return Ok(None);
    }

    // bilinear footprint plus the smoothing stencil must stay on the grid
    let center = (size / 2) as f64;
    let limit = center - 1.0 - 1e-6;
    let target = rng.random_range(0.35..=1.0) * limit;
    let scale = target / spread;

    let mut grid = vec![0.0; size * size];
    for s in &samples {
        let (y, x) = (center + s[0] * scale, center + s[1] * scale);
        let (y0, x0) = (y.floor(), x.floor());
        let (fy, fx) = (y - y0, x - x0);
        let (r, c) = (y0 as usize, x0 as usize);
        grid[r * size + c] += (1.0 - fy) * (1.0 - fx);
        grid[r * size + c + 1] += (1.0 - fy) * fx;
        grid[(r + 1) * size + c] += fy * (1.0 - fx);
        grid[(r + 1) * size + c + 1] += fy * fx;
    }

    let smoothed = smooth3(&grid, size);
    let taps: Vec<f64> = smoothed.into_iter().map(|t| t.max(0.0)).collect();
    Kernel::normalized(size, size, taps).map(Some)
}

/// 3×3 Gaussian (σ = 0.5) with zero padding.
fn smooth3(grid: &[f64], size: usize) -> Vec<f64> {
    let side = (-1.0f64 / (2.0 * 0.25)).exp();
    let norm = 1.0 + 2.0 * side;
    let w = [side / norm, 1.0 / norm, side / norm];
    let mut out = vec![0.0; size * size];
    for r in 0..size {
        for c in 0..size {
            let mut acc = 0.0;
            for (dr, wr) in w.iter().enumerate() {
                for (dc, wc) in w.iter().enumerate() {
                    let (rr, cc) = (r + dr, c + dc);
                    if rr >= 1 && cc >= 1 && rr <= size && cc <= size {
                        acc += wr * wc * grid[(rr - 1) * size + (cc - 1)];
                    }
                }
            }
            out[r * size + c] = acc;
        }
    }
    out
}

const DISK_SUPERSAMPLE: usize = 16;

/// Uniform disk with pixel-coverage anti-aliasing on a `(2⌈r⌉ + 1)²` grid.
pub fn gen_disk_kernel(radius: f64) -> Result<Kernel> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DeconvError::InvalidConfig(format!("disk radius must be positive, got {radius}")));
    }
    let size = 2 * radius.ceil() as usize + 1;
    disk_on_grid(radius, size)
}

fn disk_on_grid(radius: f64, size: usize) -> Result<Kernel> {
    let center = (size / 2) as f64;
    let r2 = radius * radius;
    let offsets: Vec<f64> = (0..DISK_SUPERSAMPLE)
        .map(|k| (k as f64 + 0.5) / DISK_SUPERSAMPLE as f64 - 0.5)
        .collect();
    let mut taps = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            let (dy, dx) = (r as f64 - center, c as f64 - center);
            let mut covered = 0u32;
            for oy in &offsets {
                for ox in &offsets {
                    let (y, x) = (dy + oy, dx + ox);
                    if y * y + x * x <= r2 {
                        covered += 1;
                    }
                }
            }
            taps.push(covered as f64);
        }
    }
    Kernel::normalized(size, size, taps)
}

/// Isotropic Gaussian on a `size × size` grid.
pub fn gen_gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel> {
    if !(sigma > 0.0) {
        return Err(DeconvError::InvalidConfig(format!("gaussian sigma must be positive, got {sigma}")));
    }
    let center = (size / 2) as f64;
    let mut taps = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            let (dy, dx) = (r as f64 - center, c as f64 - center);
            taps.push((-(dy * dy + dx * dx) / (2.0 * sigma * sigma)).exp());
        }
    }
    Kernel::normalized(size, size, taps)
}

/// Number of taps above `threshold`.
pub fn support_size(k: &Kernel, threshold: f64) -> usize {
    k.taps().iter().filter(|t| **t > threshold).count()
}

/// Center of mass `(row, col)` of the taps.
pub fn center_of_mass(k: &Kernel) -> (f64, f64) {
    let (mut r, mut c) = (0.0, 0.0);
    for i in 0..k.rows() {
        for j in 0..k.cols() {
            let t = k.tap(i, j);
            r += t * i as f64;
            c += t * j as f64;
        }
    }
    (r, c)
}
