pub mod deconv;
pub mod degrade;
pub mod eval;
pub mod fixture;
pub mod kernels;
pub mod oracle;
pub mod replay;
pub mod trace;

use std::fs;
use std::path::Path;

use resdeconv_core::io::load_prior_text;
use resdeconv_core::{load_image, load_kernel_text, Image, ImageFormat, Kernel, PriorPatch};

use crate::error::{AtPath, CliError, CliResult};

pub(crate) fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).at(dir)
}

pub(crate) fn read_image(path: &Path) -> CliResult<(Image, ImageFormat)> {
    let format = ImageFormat::from_path(path).at(path)?;
    Ok((load_image(path, format).at(path)?, format))
}

pub(crate) fn read_kernel(path: &Path) -> CliResult<Kernel> {
    load_kernel_text(path).at(path)
}

pub(crate) fn read_prior(path: Option<&Path>) -> CliResult<PriorPatch> {
    match path {
        Some(p) => load_prior_text(p).at(p),
        None => Ok(PriorPatch::delta()),
    }
}

pub(crate) fn stem(path: &Path) -> CliResult<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| CliError::Usage(format!("cannot derive a name from {}", path.display())))
}

pub(crate) fn display_prior(path: Option<&Path>) -> String {
    path.map_or_else(|| "delta".to_string(), |p| p.display().to_string())
}

/// Full-precision float text that parses back to the same `f64`.
pub(crate) fn num(v: f64) -> String {
    format!("{v:?}")
}

/// `|v| / max|v|`, for visualizing signed fields as images.
pub(crate) fn rescale_abs(img: &Image) -> Image {
    let m = img.max_abs();
    if m > 0.0 {
        img.map(|v| v.abs() / m)
    } else {
        img.clone()
    }
}
