//! Grayscale raster I/O.
//!
//! Reads binary PGM (P5, 8- or 16-bit) and grayscale PNG; writes 8-bit
//! binary PGM. Pixel values are mapped to [0, 1] on load and quantized by
//! `round(v * 255)` after clamping on save, so an 8-bit PGM round-trips
//! bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::Image2D;

/// Load an 8- or 16-bit grayscale PGM (P5) or PNG raster, normalized to [0, 1].
pub fn load_raster(path: impl AsRef<Path>) -> Result<Image2D> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"P5") {
        parse_pgm(&bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        parse_png(&bytes)
    } else {
        Err(Error::format(format!(
            "{}: not a P5 PGM or PNG file",
            path.display()
        )))
    }
}

/// Write `img` as an 8-bit binary PGM. Values are clamped to [0, 1] and
/// quantized by `round(v * 255)` (round half up).
pub fn write_raster(img: &Image2D, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::with_capacity(img.rows() * img.cols() + 32);
    write!(out, "P5\n{} {}\n255\n", img.cols(), img.rows())?;
    out.extend(
        img.pixels()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    fs::write(path, out)?;
    Ok(())
}

fn parse_pgm(bytes: &[u8]) -> Result<Image2D> {
    let mut pos = 2; // past "P5"
    let cols = read_pgm_number(bytes, &mut pos)?;
    let rows = read_pgm_number(bytes, &mut pos)?;
    let maxval = read_pgm_number(bytes, &mut pos)?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(format!("PGM maxval {maxval} out of range")));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::format("zero-sized PGM"));
    }
    // exactly one whitespace byte separates the header from the payload
    pos += 1;
    let n = rows * cols;
    let wide = maxval > 255;
    let payload = bytes
        .get(pos..pos + n * if wide { 2 } else { 1 })
        .ok_or_else(|| Error::format("PGM pixel payload truncated"))?;
    let scale = 1.0 / maxval as f64;
    let pixels: Vec<f64> = if wide {
        payload
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 * scale)
            .collect()
    } else {
        payload.iter().map(|&b| b as f64 * scale).collect()
    };
    Image2D::new(rows, cols, pixels)
}

/// Parse one ASCII integer, skipping whitespace and `#` comments.
fn read_pgm_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format("malformed PGM header"));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .map_err(|_| Error::format("malformed PGM header"))?
        .parse()
        .map_err(|_| Error::format("malformed PGM header"))
}

fn parse_png(bytes: &[u8]) -> Result<Image2D> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(format!("PNG decode failed: {e}")))?;
    let (cols, rows) = (img.width() as usize, img.height() as usize);
    if rows == 0 || cols == 0 {
        return Err(Error::format("zero-sized PNG"));
    }
    let gray = img.into_luma16();
    let pixels: Vec<f64> = gray.pixels().map(|p| p.0[0] as f64 / 65535.0).collect();
    Image2D::new(rows, cols, pixels)
}
