//! 8-bit grayscale PGM (P2/P5) and PNG reading and writing.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};
use lrr_fusion_core::Image;

use crate::error::{Error, Result};

/// ITU-R BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

fn luma(r: u8, g: u8, b: u8) -> f64 {
    let [wr, wg, wb] = LUMA_WEIGHTS;
    (wr * r as f64 + wg * g as f64 + wb * b as f64) / 255.0
}

/// Loads an 8-bit gray or colour image as luminance in `[0, 1]`.
/// Alpha channels are ignored.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let reader = reader.with_guessed_format().map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(e) => Error::io(path, e),
        image::ImageError::Unsupported(e) => Error::Unsupported { path: path.into(), reason: e.to_string() },
        other => Error::Decode { path: path.into(), message: other.to_string() },
    })?;

    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::Unsupported { path: path.into(), reason: format!("zero-size image {w}x{h}") });
    }
    let data: Vec<f64> = match &decoded {
        DynamicImage::ImageLuma8(img) => img.as_raw().iter().map(|&v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA8(img) => img.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageRgb8(img) => img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(img) => img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        other => {
            return Err(Error::Unsupported {
                path: path.into(),
                reason: format!("only 8-bit images are supported, got {:?}", other.color()),
            })
        }
    };
    Ok(Image::new_clamped(w, h, data)?)
}

/// `round(clamp(v, 0, 1) · 255)`
pub fn to_byte(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Png,
    Pgm,
}

fn format_for(path: &Path) -> Result<Format> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(Format::Png),
        Some("pgm") | Some("pnm") => Ok(Format::Pgm),
        _ => Err(Error::Unsupported { path: path.into(), reason: "output extension must be .png or .pgm".into() }),
    }
}

/// Writes an 8-bit grayscale file; the format follows the extension
/// (`.png`, or `.pgm` for binary P5).
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = format_for(path)?;
    let bytes: Vec<u8> = img.as_slice().iter().map(|&v| to_byte(v)).collect();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let out = BufWriter::new(file);
    let (w, h) = (img.width() as u32, img.height() as u32);
    let written = match format {
        Format::Png => PngEncoder::new(out).write_image(&bytes, w, h, ExtendedColorType::L8),
        Format::Pgm => PnmEncoder::new(out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&bytes, w, h, ExtendedColorType::L8),
    };
    written.map_err(|e| match e {
        image::ImageError::IoError(e) => Error::io(path, e),
        other => Error::Decode { path: path.into(), message: other.to_string() },
    })
}
