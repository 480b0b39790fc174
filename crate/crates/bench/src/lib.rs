//! Shared inputs for the criterion benches.

use resdeconv_core::{gen_trajectory_kernel, Image, Kernel, KernelGenConfig};

/// A smooth deterministic test pattern.
pub fn pattern(n: usize) -> Image {
    Image::from_fn(n, n, |r, c| {
        let (y, x) = (r as f64 / n as f64, c as f64 / n as f64);
        0.5 + 0.25 * (9.0 * x).sin() * (7.0 * y).cos() + 0.2 * ((x - 0.5).abs() < 0.2) as u8 as f64
    })
}

pub fn kernel(size: usize) -> Kernel {
    gen_trajectory_kernel(&KernelGenConfig::trajectory(size, 3)).expect("valid trajectory config")
}
