//! PNG and PFM readers/writers.
//!
//! PNG colour data is decoded through the sRGB transfer function into linear
//! intensity. PFM files carry raw `f32` samples and are written little-endian
//! (scale `-1.0`), bottom row first as the format requires.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, Luma, Rgb};

use crate::imgcore::{LinearImage, ScalarField};
use crate::{Error, Result};

/// sRGB electro-optical transfer function, encoded value in [0, 1].
pub fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

pub fn linear_to_srgb(l: f64) -> f64 {
    if l <= 0.0031308 {
        l * 12.92
    } else {
        1.055 * l.powf(1.0 / 2.4) - 0.055
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Decoded PNG samples normalised to [0, 1] without any transfer function.
struct RawPng {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

fn read_png_raw(path: &Path) -> Result<RawPng> {
    let img = image::open(path)?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let sixteen = matches!(
        img,
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) | DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_)
    );
    let gray = !img.color().has_color();
    let (channels, data): (usize, Vec<f64>) = match (gray, sixteen) {
        (true, false) => (1, img.to_luma8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect()),
        (true, true) => (1, img.to_luma16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect()),
        (false, false) => (3, img.to_rgb8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect()),
        (false, true) => (3, img.to_rgb16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect()),
    };
    Ok(RawPng {
        width,
        height,
        channels,
        data,
    })
}

/// Reads an 8- or 16-bit PNG as a linear image. Alpha is dropped.
pub fn read_png_linear(path: impl AsRef<Path>) -> Result<LinearImage> {
    let raw = read_png_raw(path.as_ref())?;
    let data = raw.data.into_iter().map(srgb_to_linear).collect();
    LinearImage::new(raw.width, raw.height, raw.channels, data)
}

/// Reads a single-channel PNG as values in [0, 1] (`v / max code`), with no
/// transfer function. Used for heatmaps stored as 8/16-bit PNG.
pub fn read_png_unit(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let raw = read_png_raw(path)?;
    if raw.channels != 1 {
        return Err(format_err(path, "expected a single-channel PNG"));
    }
    ScalarField::new(raw.width, raw.height, raw.data)
}

/// Writes a linear image as an 8-bit sRGB PNG, clamping to [0, 1].
pub fn write_png_srgb(path: impl AsRef<Path>, img: &LinearImage) -> Result<()> {
    let encode = |v: f64| (linear_to_srgb(v.clamp(0.0, 1.0)) * 255.0).round() as u8;
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes: Vec<u8> = img.data().iter().map(|&v| encode(v)).collect();
    match img.channels() {
        1 => ImageBuffer::<Luma<u8>, _>::from_raw(w, h, bytes)
            .expect("buffer length matches")
            .save(path)?,
        _ => ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, bytes)
            .expect("buffer length matches")
            .save(path)?,
    }
    Ok(())
}

/// Writes raw 8-bit codes as a single-channel PNG.
pub fn write_png_codes(path: impl AsRef<Path>, width: usize, height: usize, codes: Vec<u8>) -> Result<()> {
    let img = GrayImage::from_raw(width as u32, height as u32, codes)
        .ok_or_else(|| Error::Dimensions(format!("{width}x{height} code buffer has wrong length")))?;
    img.save(path)?;
    Ok(())
}

/// Reads a single-channel 8-bit PNG as raw codes.
pub fn read_png_codes(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let img = image::open(path)?;
    let img = match img {
        DynamicImage::ImageLuma8(g) => g,
        _ => return Err(format_err(path, "expected an 8-bit single-channel PNG")),
    };
    Ok((img.width() as usize, img.height() as usize, img.into_raw()))
}

/// Raw PFM contents, rows stored top to bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct Pfm {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

fn read_token(reader: &mut impl BufRead) -> std::io::Result<String> {
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        reader.read_exact(&mut byte)?;
        if byte[0].is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            return Ok(String::from_utf8_lossy(&token).into_owned());
        }
        token.push(byte[0]);
    }
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<Pfm> {
    let path = path.as_ref();
    let mut reader = BufReader::new(File::open(path)?);
    let channels = match read_token(&mut reader)?.as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(format_err(path, format!("bad PFM magic {other:?}"))),
    };
    let parse_dim = |s: String| {
        s.parse::<usize>()
            .map_err(|_| format_err(path, format!("bad dimension {s:?}")))
    };
    let width = parse_dim(read_token(&mut reader)?)?;
    let height = parse_dim(read_token(&mut reader)?)?;
    let scale_tok = read_token(&mut reader)?;
    let scale: f32 = scale_tok
        .parse()
        .map_err(|_| format_err(path, format!("bad scale {scale_tok:?}")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(format_err(path, "scale must be non-zero"));
    }
    let little_endian = scale < 0.0;

    let n = width * height * channels;
    let mut bytes = vec![0u8; n * 4];
    reader
        .read_exact(&mut bytes)
        .map_err(|_| format_err(path, "truncated sample data"))?;
    let samples: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| {
            let b = [c[0], c[1], c[2], c[3]];
            if little_endian {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();

    // Flip to top-to-bottom.
    let row = width * channels;
    let mut data = Vec::with_capacity(n);
    for y in (0..height).rev() {
        data.extend_from_slice(&samples[y * row..(y + 1) * row]);
    }
    Ok(Pfm {
        width,
        height,
        channels,
        data,
    })
}

pub fn write_pfm(path: impl AsRef<Path>, pfm: &Pfm) -> Result<()> {
    if pfm.channels != 1 && pfm.channels != 3 {
        return Err(Error::Dimensions(format!("PFM needs 1 or 3 channels, got {}", pfm.channels)));
    }
    let row = pfm.width * pfm.channels;
    if pfm.data.len() != row * pfm.height {
        return Err(Error::Dimensions("PFM sample count does not match header".into()));
    }
    let mut out = BufWriter::new(File::create(path)?);
    let magic = if pfm.channels == 3 { "PF" } else { "Pf" };
    write!(out, "{magic}\n{} {}\n-1.0\n", pfm.width, pfm.height)?;
    for y in (0..pfm.height).rev() {
        for v in &pfm.data[y * row..(y + 1) * row] {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn to_f64(path: &Path, data: &[f32]) -> Result<Vec<f64>> {
    if data.iter().any(|v| !v.is_finite()) {
        return Err(format_err(path, "non-finite sample"));
    }
    Ok(data.iter().map(|&v| v as f64).collect())
}

pub fn read_pfm_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let pfm = read_pfm(path)?;
    if pfm.channels != 1 {
        return Err(format_err(path, "expected a single-channel PFM"));
    }
    ScalarField::new(pfm.width, pfm.height, to_f64(path, &pfm.data)?)
}

pub fn read_pfm_image(path: impl AsRef<Path>) -> Result<LinearImage> {
    let path = path.as_ref();
    let pfm = read_pfm(path)?;
    LinearImage::new(pfm.width, pfm.height, pfm.channels, to_f64(path, &pfm.data)?)
}

pub fn write_pfm_field(path: impl AsRef<Path>, f: &ScalarField) -> Result<()> {
    write_pfm(
        path,
        &Pfm {
            width: f.width(),
            height: f.height(),
            channels: 1,
            data: f.data().iter().map(|&v| v as f32).collect(),
        },
    )
}

pub fn write_pfm_image(path: impl AsRef<Path>, img: &LinearImage) -> Result<()> {
    write_pfm(
        path,
        &Pfm {
            width: img.width(),
            height: img.height(),
            channels: img.channels(),
            data: img.data().iter().map(|&v| v as f32).collect(),
        },
    )
}

/// Reads an image by extension: `.pfm` as raw linear floats, anything else
/// as an sRGB PNG.
pub fn read_image(path: impl AsRef<Path>) -> Result<LinearImage> {
    let path = path.as_ref();
    if has_pfm_ext(path) {
        read_pfm_image(path)
    } else {
        read_png_linear(path)
    }
}

/// Reads a scalar map by extension: `.pfm` raw, otherwise a PNG mapped to [0, 1].
pub fn read_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    if has_pfm_ext(path) {
        read_pfm_field(path)
    } else {
        read_png_unit(path)
    }
}

fn has_pfm_ext(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pfm"))
}
