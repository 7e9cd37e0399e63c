//! Portable FloatMap (PFM) reading and writing.
//!
//! Header: "Pf" (grayscale) or "PF" (RGB), a dimensions line "W H", and a
//! scale line whose sign encodes endianness (negative = little-endian).
//! Pixel rows are stored bottom-to-top as 32-bit floats. Round-trips are
//! bit-exact; non-finite samples are rejected on both paths.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::shading::ImagePlane;
use crate::{RelightError, Result};

/// Raw f32 image as stored in a PFM file.
#[derive(Debug, Clone, PartialEq)]
pub struct PfmImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    /// Row-major, top-to-bottom, channel-interleaved.
    pub data: Vec<f32>,
}

impl PfmImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(RelightError::Pfm(format!("unsupported channel count {channels}")));
        }
        if data.len() != width * height * channels {
            return Err(RelightError::Pfm(format!(
                "data length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(RelightError::Pfm(format!("non-finite sample {bad}")));
        }
        Ok(PfmImage { width, height, channels, data })
    }

    pub fn from_plane(img: &ImagePlane) -> Result<Self> {
        let data: Vec<f32> = img.data().iter().map(|&v| v as f32).collect();
        PfmImage::new(img.width(), img.height(), img.channels(), data)
    }

    pub fn to_plane(&self) -> ImagePlane {
        let mut img = ImagePlane::new(self.width, self.height, self.channels);
        for (dst, &src) in img.data_mut().iter_mut().zip(&self.data) {
            *dst = src as f64;
        }
        img
    }
}

/// Reads one whitespace-terminated token (PFM headers allow any whitespace,
/// including single newlines, between fields).
fn read_token(r: &mut impl Read) -> Result<String> {
    let mut tok = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        match r.read(&mut byte)? {
            0 => break,
            _ => {
                if byte[0].is_ascii_whitespace() {
                    if tok.is_empty() {
                        continue;
                    }
                    break;
                }
                tok.push(byte[0]);
                if tok.len() > 32 {
                    return Err(RelightError::Pfm("oversized header token".into()));
                }
            }
        }
    }
    if tok.is_empty() {
        return Err(RelightError::Pfm("truncated header".into()));
    }
    String::from_utf8(tok).map_err(|_| RelightError::Pfm("non-ASCII header".into()))
}

pub fn read(path: &Path) -> Result<PfmImage> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    read_from(&mut r)
}

pub fn read_from(r: &mut impl BufRead) -> Result<PfmImage> {
    let magic = read_token(r)?;
    let channels = match magic.as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => return Err(RelightError::Pfm(format!("bad magic '{other}'"))),
    };
    let parse_dim = |tok: String| -> Result<usize> {
        let v: usize =
            tok.parse().map_err(|_| RelightError::Pfm(format!("bad dimension '{tok}'")))?;
        if v == 0 {
            return Err(RelightError::Pfm("zero dimension".into()));
        }
        Ok(v)
    };
    let width = parse_dim(read_token(r)?)?;
    let height = parse_dim(read_token(r)?)?;
    let scale_tok = read_token(r)?;
    let scale: f64 = scale_tok
        .parse()
        .map_err(|_| RelightError::Pfm(format!("bad scale '{scale_tok}'")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(RelightError::Pfm(format!("bad scale {scale}")));
    }
    let little_endian = scale < 0.0;

    let n = width * height * channels;
    let mut raw = vec![0u8; n * 4];
    r.read_exact(&mut raw)
        .map_err(|_| RelightError::Pfm("truncated pixel data".into()))?;

    let mut data = vec![0.0f32; n];
    // PFM stores the bottom row first; flip into top-to-bottom order.
    for fr in 0..height {
        let dr = height - 1 - fr;
        for k in 0..width * channels {
            let off = (fr * width * channels + k) * 4;
            let b: [u8; 4] = raw[off..off + 4].try_into().unwrap();
            let v = if little_endian { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
            data[dr * width * channels + k] = v;
        }
    }
    PfmImage::new(width, height, channels, data)
}

pub fn write(path: &Path, img: &PfmImage) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_to(&mut w, img)
}

pub fn write_to(w: &mut impl Write, img: &PfmImage) -> Result<()> {
    if let Some(bad) = img.data.iter().find(|v| !v.is_finite()) {
        return Err(RelightError::Pfm(format!("non-finite sample {bad}")));
    }
    let magic = if img.channels == 1 { "Pf" } else { "PF" };
    write!(w, "{magic}\n{} {}\n-1.0\n", img.width, img.height)?;
    for fr in 0..img.height {
        let sr = img.height - 1 - fr;
        for k in 0..img.width * img.channels {
            let v = img.data[sr * img.width * img.channels + k];
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}
