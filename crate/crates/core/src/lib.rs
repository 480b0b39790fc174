//! Non-blind image deconvolution on a circular blur operator.
//!
//! The centerpiece is [`ird::ird_deconvolve`], which evaluates the MMSE
//! estimator `C Hᵀ (H C Hᵀ + σ I)⁻¹ b` as a truncated residual series using
//! nothing but convolutions. Its limit is available in closed form through
//! [`mmse::wiener_solve`], and both can be checked against dense-matrix
//! oracles ([`operator::materialize_operator`], [`mmse::mmse_solve_dense`]) at
//! small sizes. L1-regularized ADMM and APG solvers are provided for
//! comparison.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod degrade;
pub mod error;
pub mod image;
pub mod io;
pub mod ird;
pub mod metrics;
pub mod mmse;
pub mod operator;

pub use baseline::{admm_l1, apg_l1, soft_shrink, AdmmConfig, ApgConfig, SolverResult};
pub use degrade::{degrade, gen_disk_kernel, gen_kernel, gen_trajectory_kernel, DegradeConfig, KernelFamily, KernelGenConfig};
pub use error::{DeconvError, Result};
pub use image::{flip_kernel, rgb_to_luma, ColorImage, Image, Kernel, PriorPatch};
pub use io::{load_image, load_kernel_text, save_image, save_kernel_text, ImageFormat};
pub use ird::{ird_auto_n, ird_deconvolve, ird_deconvolve_with, ird_series_term, IrdConfig, IrdTrace};
pub use metrics::{content_loss, edge_loss, psnr, ssim, total_loss, LossReport, QualityReport};
pub use mmse::{mmse_solve_dense, wiener_solve, MmseConfig};
pub use operator::{
    apply_adjoint, convergence_factors, convolve_circular, materialize_operator, transfer_function,
    LinearBlurOperator, Spectrum,
};
