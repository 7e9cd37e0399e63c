//! 8-bit PNG input/output with the sRGB transfer function.
//!
//! Internal images are linear; bytes on disk are sRGB-encoded. Out-of-range
//! linear values are clamped before encoding.

use std::path::Path;

use crate::shading::ImagePlane;
use crate::{RelightError, Result};

/// sRGB encode: linear [0, 1] → byte. Values outside [0, 1] are clamped.
pub fn linear_to_srgb_byte(v: f64) -> u8 {
    let v = v.clamp(0.0, 1.0);
    let s = if v <= 0.003_130_8 { 12.92 * v } else { 1.055 * v.powf(1.0 / 2.4) - 0.055 };
    (s * 255.0).round() as u8
}

/// sRGB decode: byte → linear [0, 1].
pub fn srgb_byte_to_linear(b: u8) -> f64 {
    let s = b as f64 / 255.0;
    if s <= 0.040_45 {
        s / 12.92
    } else {
        ((s + 0.055) / 1.055).powf(2.4)
    }
}

pub fn write_png(path: &Path, img: &ImagePlane) -> Result<()> {
    let w = img.width() as u32;
    let h = img.height() as u32;
    let bytes: Vec<u8> = img.data().iter().map(|&v| linear_to_srgb_byte(v)).collect();
    let err = |e: image::ImageError| RelightError::Png(e.to_string());
    match img.channels() {
        1 => image::GrayImage::from_raw(w, h, bytes)
            .expect("buffer sized from image")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(err),
        3 => image::RgbImage::from_raw(w, h, bytes)
            .expect("buffer sized from image")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(err),
        c => Err(RelightError::Png(format!("unsupported channel count {c}"))),
    }
}

/// PNG without the sRGB transfer: straight [0, 1] → byte quantization, for
/// data images like normal maps where gamma would distort the encoding.
pub fn write_png_linear(path: &Path, img: &ImagePlane) -> Result<()> {
    let w = img.width() as u32;
    let h = img.height() as u32;
    let bytes: Vec<u8> =
        img.data().iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    let err = |e: image::ImageError| RelightError::Png(e.to_string());
    match img.channels() {
        1 => image::GrayImage::from_raw(w, h, bytes)
            .expect("buffer sized from image")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(err),
        3 => image::RgbImage::from_raw(w, h, bytes)
            .expect("buffer sized from image")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(err),
        c => Err(RelightError::Png(format!("unsupported channel count {c}"))),
    }
}

pub fn read_png(path: &Path) -> Result<ImagePlane> {
    let dynimg = image::open(path).map_err(|e| RelightError::Png(e.to_string()))?;
    let (img, channels): (Vec<u8>, usize) = match dynimg {
        image::DynamicImage::ImageLuma8(g) => (g.into_raw(), 1),
        other => (other.into_rgb8().into_raw(), 3),
    };
    let (w, h) = {
        let d = image::image_dimensions(path).map_err(|e| RelightError::Png(e.to_string()))?;
        (d.0 as usize, d.1 as usize)
    };
    let mut plane = ImagePlane::new(w, h, channels);
    for (dst, &b) in plane.data_mut().iter_mut().zip(&img) {
        *dst = srgb_byte_to_linear(b);
    }
    Ok(plane)
}
