use crate::imgcore::LinearImage;
use crate::{Error, Result};

/// Pixels whose channel sum falls below this have no usable chromaticity.
pub const CHROMA_MIN_SUM: f64 = 1e-6;

/// Intensity-normalised colour `(r, g) / (r + g + b)` per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChromaImage {
    width: usize,
    height: usize,
    chroma: Vec<[f64; 2]>,
    valid: Vec<bool>,
}

impl ChromaImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Chromaticity at pixel index `i`, or `None` for near-black pixels.
    pub fn at(&self, i: usize) -> Option<[f64; 2]> {
        self.valid[i].then_some(self.chroma[i])
    }

    pub fn get(&self, x: usize, y: usize) -> Option<[f64; 2]> {
        self.at(y * self.width + x)
    }

    /// L2 distance between two pixels' chromaticities, `None` if either is
    /// invalid.
    pub fn distance(&self, p: usize, q: usize) -> Option<f64> {
        let (a, b) = (self.at(p)?, self.at(q)?);
        Some((a[0] - b[0]).hypot(a[1] - b[1]))
    }

    fn from_rgb(width: usize, height: usize, rgb: impl Iterator<Item = [f64; 3]>) -> Self {
        let mut chroma = Vec::with_capacity(width * height);
        let mut valid = Vec::with_capacity(width * height);
        for [r, g, b] in rgb {
            let sum = r + g + b;
            if sum < CHROMA_MIN_SUM {
                chroma.push([0.0, 0.0]);
                valid.push(false);
            } else {
                chroma.push([r / sum, g / sum]);
                valid.push(true);
            }
        }
        Self {
            width,
            height,
            chroma,
            valid,
        }
    }

    /// Chromaticity of a gray image viewed as RGB with equal channels:
    /// `(1/3, 1/3)` wherever the intensity is usable.
    pub(crate) fn of_gray(img: &LinearImage) -> Self {
        Self::from_rgb(img.width(), img.height(), img.data().iter().map(|&v| [v, v, v]))
    }
}

/// Chromaticity of an RGB image. Gray images have no chromaticity and are
/// rejected.
pub fn chromaticity(img: &LinearImage) -> Result<ChromaImage> {
    if img.channels() != 3 {
        return Err(Error::InvalidParameter(
            "chromaticity needs a 3-channel image".into(),
        ));
    }
    Ok(ChromaImage::from_rgb(
        img.width(),
        img.height(),
        img.pixels().map(|p| [p[0], p[1], p[2]]),
    ))
}
