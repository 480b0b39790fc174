//! Image and kernel file formats.
//!
//! Images: binary PGM (`P5`, 8- or 16-bit) and 8-bit PNG (gray or RGB; RGB is
//! reduced to BT.601 luma on load). Intensities map linearly onto `[0, 1]` and
//! are clamped to that range on save. A lossless plain-text matrix format
//! (`.txt`, same layout as kernels) keeps full `f64` precision, unclamped.
//!
//! Kernels: plain text, first line `rows cols`, then row-major taps.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{DeconvError, Result};
use crate::image::{rgb_to_luma, ColorImage, Image, Kernel, PriorPatch};

/// Tolerance within which a loaded kernel is re-normalized rather than rejected.
pub const KERNEL_LOAD_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm8,
    Pgm16,
    Png8,
    Text,
}

impl ImageFormat {
    /// Guesses from the file extension; PGM defaults to 16-bit on save.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("pgm") => Ok(ImageFormat::Pgm16),
            Some("png") => Ok(ImageFormat::Png8),
            Some("txt") => Ok(ImageFormat::Text),
            other => Err(DeconvError::UnsupportedFormat(format!(
                "unknown image extension {other:?}"
            ))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Pgm8 | ImageFormat::Pgm16 => "pgm",
            ImageFormat::Png8 => "png",
            ImageFormat::Text => "txt",
        }
    }

    /// Quantization levels; `None` for the lossless text format.
    pub fn max_value(self) -> Option<u32> {
        match self {
            ImageFormat::Pgm8 | ImageFormat::Png8 => Some(255),
            ImageFormat::Pgm16 => Some(65535),
            ImageFormat::Text => None,
        }
    }
}

impl std::str::FromStr for ImageFormat {
    type Err = DeconvError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm8" => Ok(ImageFormat::Pgm8),
            "pgm16" | "pgm" => Ok(ImageFormat::Pgm16),
            "png" | "png8" => Ok(ImageFormat::Png8),
            "txt" | "text" => Ok(ImageFormat::Text),
            _ => Err(DeconvError::UnsupportedFormat(s.to_string())),
        }
    }
}

/// Loads a grayscale image. For PGM both bit depths are accepted regardless of
/// whether `Pgm8` or `Pgm16` is passed; the file's maxval decides.
pub fn load_image(path: &Path, format: ImageFormat) -> Result<Image> {
    match format {
        ImageFormat::Pgm8 | ImageFormat::Pgm16 => decode_pgm(&fs::read(path)?),
        ImageFormat::Png8 => load_png(path),
        ImageFormat::Text => {
            let (rows, cols, data) = parse_taps_text(&fs::read_to_string(path)?)?;
            Image::new(rows, cols, data)
        }
    }
}

pub fn save_image(image: &Image, path: &Path, format: ImageFormat) -> Result<()> {
    match format {
        ImageFormat::Pgm8 => Ok(fs::write(path, encode_pgm(image, 255))?),
        ImageFormat::Pgm16 => Ok(fs::write(path, encode_pgm(image, 65535))?),
        ImageFormat::Text => {
            let mut out = BufWriter::new(fs::File::create(path)?);
            write_taps(&mut out, image.height(), image.width(), image.as_slice())?;
            out.flush()?;
            Ok(())
        }
        ImageFormat::Png8 => {
            let buf: Vec<u8> = image
                .as_slice()
                .iter()
                .map(|&v| quantize(v, 255) as u8)
                .collect();
            let gray = image::GrayImage::from_raw(image.width() as u32, image.height() as u32, buf)
                .expect("buffer length matches dimensions");
            gray.save_with_format(path, image::ImageFormat::Png)?;
            Ok(())
        }
    }
}

#[inline]
fn quantize(v: f64, max: u32) -> u32 {
    (v.clamp(0.0, 1.0) * max as f64).round() as u32
}

pub fn encode_pgm(image: &Image, max_value: u32) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", image.width(), image.height(), max_value).into_bytes();
    if max_value < 256 {
        out.extend(image.as_slice().iter().map(|&v| quantize(v, max_value) as u8));
    } else {
        for &v in image.as_slice() {
            out.extend_from_slice(&(quantize(v, max_value) as u16).to_be_bytes());
        }
    }
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0;
    let mut fields = [0usize; 3];
    let magic = next_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(DeconvError::UnsupportedFormat(
            "only binary PGM (P5) is supported".into(),
        ));
    }
    for f in fields.iter_mut() {
        let tok = next_token(bytes, &mut pos)?;
        *f = std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| DeconvError::Parse("malformed PGM header".into()))?;
    }
    let [width, height, max_value] = fields;
    if max_value == 0 || max_value > 65535 {
        return Err(DeconvError::UnsupportedFormat(format!(
            "PGM maxval {max_value} is not an 8- or 16-bit depth"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let bytes_per = if max_value < 256 { 1 } else { 2 };
    let need = width * height * bytes_per;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| DeconvError::Parse("truncated PGM raster".into()))?;
    let scale = 1.0 / max_value as f64;
    let data: Vec<f64> = if bytes_per == 1 {
        raster.iter().map(|&b| b as f64 * scale).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale)
            .collect()
    };
    Image::new(height, width, data)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(DeconvError::Parse("unexpected end of PGM header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn load_png(path: &Path) -> Result<Image> {
    let decoded = image::ImageReader::open(path)?.with_guessed_format()?.decode()?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        image::DynamicImage::ImageLuma8(g) => {
            Image::new(h, w, g.into_raw().into_iter().map(|v| v as f64 / 255.0).collect())
        }
        image::DynamicImage::ImageRgb8(rgb) => {
            let color = ColorImage {
                height: h,
                width: w,
                channels: 3,
                data: rgb.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
            };
            rgb_to_luma(&color)
        }
        other => Err(DeconvError::UnsupportedFormat(format!(
            "PNG color type {:?} (only 8-bit gray or RGB)",
            other.color()
        ))),
    }
}

fn parse_taps_text(text: &str) -> Result<(usize, usize, Vec<f64>)> {
    let mut tokens = text.split_whitespace();
    let mut dim = |name: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| DeconvError::Parse(format!("missing {name}")))?
            .parse()
            .map_err(|e| DeconvError::Parse(format!("bad {name}: {e}")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let taps = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| DeconvError::Parse(format!("bad tap {t:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if taps.len() != rows * cols {
        return Err(DeconvError::Parse(format!(
            "expected {} taps, found {}",
            rows * cols,
            taps.len()
        )));
    }
    Ok((rows, cols, taps))
}

/// Parses the kernel text format, re-normalizing taps whose sum is within
/// [`KERNEL_LOAD_SUM_TOL`] of one.
pub fn parse_kernel_text(text: &str) -> Result<Kernel> {
    let (rows, cols, taps) = parse_taps_text(text)?;
    if rows.is_multiple_of(2) || cols.is_multiple_of(2) || rows == 0 || cols == 0 {
        return Err(DeconvError::InvalidKernel(format!(
            "dimensions must be odd, got {rows}x{cols}"
        )));
    }
    if let Some(t) = taps.iter().find(|t| **t < 0.0 || !t.is_finite()) {
        return Err(DeconvError::InvalidKernel(format!("negative or non-finite tap {t}")));
    }
    let sum: f64 = taps.iter().sum();
    if (sum - 1.0).abs() > KERNEL_LOAD_SUM_TOL {
        return Err(DeconvError::InvalidKernel(format!("taps sum to {sum}, expected 1")));
    }
    if (sum - 1.0).abs() <= 1e-12 {
        Kernel::new(rows, cols, taps)
    } else {
        Kernel::normalized(rows, cols, taps)
    }
}

pub fn load_kernel_text(path: &Path) -> Result<Kernel> {
    parse_kernel_text(&fs::read_to_string(path)?)
}

fn write_taps(out: &mut impl Write, rows: usize, cols: usize, taps: &[f64]) -> std::io::Result<()> {
    writeln!(out, "{rows} {cols}")?;
    for row in taps.chunks(cols) {
        let line: Vec<String> = row.iter().map(|t| format!("{t:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Writes taps with 17 significant digits, enough to round-trip every `f64`.
pub fn save_kernel_text(k: &Kernel, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write_taps(&mut out, k.rows(), k.cols(), k.taps())?;
    out.flush()?;
    Ok(())
}

/// Prior patches share the kernel text layout but are neither normalized nor
/// required to be nonnegative; they must be centrally symmetric.
pub fn load_prior_text(path: &Path) -> Result<PriorPatch> {
    let (rows, cols, taps) = parse_taps_text(&fs::read_to_string(path)?)?;
    PriorPatch::new(rows, cols, taps)
}

pub fn save_prior_text(p: &PriorPatch, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write_taps(&mut out, p.rows(), p.cols(), p.taps())?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_delta() {
        let k = parse_kernel_text("1 1\n1.0").unwrap();
        assert!(k.is_delta());
    }

    #[test]
    fn rejects_bad_sum() {
        let err = parse_kernel_text("1 3\n0.3 0.3 0.3").unwrap_err();
        assert!(matches!(err, DeconvError::InvalidKernel(_)));
    }

    #[test]
    fn rejects_negative_and_even() {
        assert!(parse_kernel_text("1 3\n-0.1 0.6 0.5").is_err());
        assert!(parse_kernel_text("2 1\n0.5 0.5").is_err());
        assert!(parse_kernel_text("1 3\n0.5 0.5").is_err());
    }

    #[test]
    fn renormalizes_close_sums() {
        let k = parse_kernel_text("1 3\n0.3333333 0.3333333 0.3333333").unwrap();
        assert!((k.sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pgm_header_with_comments() {
        let mut bytes = b"P5\n# comment\n2 1\n255\n".to_vec();
        bytes.extend([0u8, 255]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.shape(), (1, 2));
        assert_eq!(img.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn pgm_truncated() {
        assert!(decode_pgm(b"P5\n4 4\n255\n\x00\x00").is_err());
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
    }

    #[test]
    fn format_from_path() {
        assert_eq!(ImageFormat::from_path(Path::new("a.PNG")).unwrap(), ImageFormat::Png8);
        assert_eq!(ImageFormat::from_path(Path::new("a.pgm")).unwrap(), ImageFormat::Pgm16);
        assert!(ImageFormat::from_path(Path::new("a.tif")).is_err());
    }
}
