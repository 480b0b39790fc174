#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resdeconv_core::{Image, Kernel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, h: usize, w: usize) -> Image {
    Image::from_fn(h, w, |_, _| rng.random::<f64>())
}

pub fn random_kernel(rng: &mut impl Rng, rows: usize, cols: usize) -> Kernel {
    let taps = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
    Kernel::normalized(rows, cols, taps).unwrap()
}

/// Kernel whose spectrum stays away from zero: a dominant center tap.
pub fn center_heavy_kernel(rng: &mut impl Rng, size: usize, center_mass: f64) -> Kernel {
    let mut taps: Vec<f64> = (0..size * size).map(|_| rng.random::<f64>()).collect();
    let c = (size / 2) * size + size / 2;
    taps[c] = 0.0;
    let rest: f64 = taps.iter().sum();
    for t in &mut taps {
        *t *= (1.0 - center_mass) / rest;
    }
    taps[c] = center_mass;
    Kernel::normalized(size, size, taps).unwrap()
}

/// Periodic convolution by a plain double loop with explicit wrapping.
pub fn brute_convolve(x: &Image, k: &Kernel) -> Image {
    let (h, w) = x.shape();
    let (kr, kc) = (k.rows() as isize, k.cols() as isize);
    let (cr, cc) = (kr / 2, kc / 2);
    Image::from_fn(h, w, |r, c| {
        let mut acc = 0.0;
        for a in 0..kr {
            for b in 0..kc {
                let rr = (r as isize - (a - cr)).rem_euclid(h as isize) as usize;
                let cc2 = (c as isize - (b - cc)).rem_euclid(w as isize) as usize;
                acc += k.tap(a as usize, b as usize) * x.get(rr, cc2);
            }
        }
        acc
    })
}

pub fn dot(a: &Image, b: &Image) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}
