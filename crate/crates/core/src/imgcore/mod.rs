//! Image containers and the pixel-window primitives shared by every stage.
//!
//! All containers store row-major data and are immutable once built; every
//! operation returns a fresh value.

mod gradient;
mod morphology;
mod resize;

pub use gradient::{gradient, gradient_magnitude, luminance};
pub use morphology::{binary_dilation, binary_erosion, max_filter};
pub(crate) use resize::bilinear;
pub use resize::{
    fit_dims, resize_field_max_dim, resize_field_to, resize_mask_max_dim, resize_mask_to, resize_max_dim,
};

use crate::{Error, Result};

/// Rec. 709 luma weights applied to linear RGB.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

fn check_len(width: usize, height: usize, per_pixel: usize, len: usize) -> Result<()> {
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(per_pixel))
        .ok_or_else(|| Error::Dimensions(format!("{width}x{height} overflows")))?;
    if expected != len {
        return Err(Error::Dimensions(format!(
            "{width}x{height}x{per_pixel} needs {expected} values, got {len}"
        )));
    }
    Ok(())
}

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidValue(format!("non-finite value at index {i}"))),
        None => Ok(()),
    }
}

/// A floating point image in linear intensity with 1 or 3 interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl LinearImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Dimensions(format!(
                "images carry 1 or 3 channels, got {channels}"
            )));
        }
        check_len(width, height, channels, data.len())?;
        check_finite(&data)?;
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds an RGB image from a per-pixel closure.
    pub fn from_rgb_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, 3, data)
    }

    /// Builds a single-channel image from a per-pixel closure.
    pub fn from_gray_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, 1, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Channel values of the pixel at `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn pixels(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.channels)
    }
}

/// A single real value per pixel: luminance, log intensity, gradient
/// magnitudes, log shading and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, 1, data.len())?;
        check_finite(&data)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Applies `f` to every value. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A boolean value per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_len(width, height, 1, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// True where both masks are true.
    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a && b).collect(),
        })
    }

    /// True where either mask is true.
    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a || b).collect(),
        })
    }

    /// True iff every true pixel of `self` is also true in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lengths_and_channels() {
        assert!(LinearImage::new(2, 2, 3, vec![0.0; 11]).is_err());
        assert!(LinearImage::new(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(ScalarField::new(3, 2, vec![0.0; 5]).is_err());
        assert!(BinaryMask::new(3, 2, vec![false; 7]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(LinearImage::new(1, 1, 1, vec![f64::NAN]).is_err());
        assert!(ScalarField::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn values_above_one_are_allowed() {
        let img = LinearImage::new(1, 1, 3, vec![1.5, 2.0, 0.1]).unwrap();
        assert_eq!(img.pixel(0, 0), &[1.5, 2.0, 0.1]);
    }

    #[test]
    fn mask_set_algebra() {
        let a = BinaryMask::from_fn(3, 1, |x, _| x < 2);
        let b = BinaryMask::from_fn(3, 1, |x, _| x > 0);
        assert_eq!(a.and(&b).unwrap().data(), &[false, true, false]);
        assert_eq!(a.or(&b).unwrap().count(), 3);
        assert!(a.and(&b).unwrap().is_subset_of(&a));
        assert!(a.and(&BinaryMask::filled(2, 1, true)).is_err());
    }
}
