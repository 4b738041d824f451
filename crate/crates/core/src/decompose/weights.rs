use serde::{Deserialize, Serialize};

use super::chroma::{chromaticity, ChromaImage};
use crate::imgcore::{ensure_same_dims, LinearImage, ScalarField};
use crate::{Error, Result};

/// Per-pixel probability of smooth shading.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMap(ScalarField);

impl HeatMap {
    pub fn new(probs: ScalarField) -> Result<Self> {
        if let Some(v) = probs.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidValue(format!("heatmap value {v} outside [0, 1]")));
        }
        Ok(Self(probs))
    }

    pub fn constant(width: usize, height: usize, p: f64) -> Result<Self> {
        Self::new(ScalarField::constant(width, height, p)?)
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }
}

/// How the free additive constant of the log shading is fixed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShadingAnchor {
    /// Mean log shading is zero.
    #[default]
    ZeroMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetinexParams {
    /// Chromaticity distance above which a pair may change reflectance.
    pub t: f64,
    /// Reflectance-constancy weight for pairs below the threshold.
    pub w_reflectance: f64,
    /// Scale the reflectance weight by the smooth-shading heatmap.
    pub use_prior: bool,
    pub anchor: ShadingAnchor,
    /// Relative residual at which conjugate gradients stops.
    pub tolerance: f64,
    /// Iteration cap; `None` means 10 x pixel count.
    pub max_iterations: Option<usize>,
}

impl Default for RetinexParams {
    fn default() -> Self {
        Self {
            t: 0.02,
            w_reflectance: 100.0,
            use_prior: false,
            anchor: ShadingAnchor::ZeroMean,
            tolerance: 1e-10,
            max_iterations: None,
        }
    }
}

impl RetinexParams {
    pub fn validate(&self) -> Result<()> {
        if self.t.is_nan() || self.t < 0.0 {
            return Err(Error::InvalidParameter(format!("retinex t must be >= 0, got {}", self.t)));
        }
        if !(self.w_reflectance > 0.0 && self.w_reflectance.is_finite()) {
            return Err(Error::InvalidParameter("reflectance weight must be > 0".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidParameter("solver tolerance must be > 0".into()));
        }
        Ok(())
    }
}

/// Reflectance weights on the 4-neighbour edges of a grid.
///
/// `horizontal[y * (w - 1) + x]` joins `(x, y)` and `(x + 1, y)`;
/// `vertical[y * w + x]` joins `(x, y)` and `(x, y + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairWeights {
    width: usize,
    height: usize,
    horizontal: Vec<f64>,
    vertical: Vec<f64>,
}

impl PairWeights {
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut horizontal = Vec::with_capacity(width.saturating_sub(1) * height);
        let mut vertical = Vec::with_capacity(width * height.saturating_sub(1));
        for y in 0..height {
            for x in 0..width.saturating_sub(1) {
                let p = y * width + x;
                horizontal.push(f(p, p + 1));
            }
        }
        for y in 0..height.saturating_sub(1) {
            for x in 0..width {
                let p = y * width + x;
                vertical.push(f(p, p + width));
            }
        }
        Self {
            width,
            height,
            horizontal,
            vertical,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn horizontal(&self, x: usize, y: usize) -> f64 {
        self.horizontal[y * (self.width - 1) + x]
    }

    pub fn vertical(&self, x: usize, y: usize) -> f64 {
        self.vertical[y * self.width + x]
    }

    /// Every edge as `(p, q, weight)` with pixel indices `p < q`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let w = self.width;
        let hw = w.saturating_sub(1);
        let h = self.horizontal.iter().enumerate().map(move |(k, &om)| {
            let (y, x) = (k / hw, k % hw);
            let p = y * w + x;
            (p, p + 1, om)
        });
        let v = self.vertical.iter().enumerate().map(move |(k, &om)| (k, k + w, om));
        h.chain(v)
    }

    pub fn edge_count(&self) -> usize {
        self.horizontal.len() + self.vertical.len()
    }
}

/// Chromaticity-gated reflectance weights for every 4-neighbour pair.
///
/// A pair whose chromaticity distance exceeds `t`, or where either pixel is
/// too dark for a chromaticity, gets weight 0. Otherwise the weight is
/// `w_reflectance`, scaled by `1 - (H_p + H_q) / 2` when the prior is on.
/// The heatmap is ignored unless `use_prior` is set. Gray images are treated
/// as having uniform chromaticity.
pub fn retinex_weights(img: &LinearImage, params: &RetinexParams, heat: Option<&HeatMap>) -> Result<PairWeights> {
    params.validate()?;
    let heat = match (params.use_prior, heat) {
        (true, None) => {
            return Err(Error::InvalidParameter("use_prior requires a heatmap".into()));
        }
        (true, Some(h)) => {
            ensure_same_dims(img.dims(), h.dims())?;
            Some(h.field().data())
        }
        (false, _) => None,
    };
    let chroma = match img.channels() {
        3 => chromaticity(img)?,
        _ => ChromaImage::of_gray(img),
    };
    let (w, h) = img.dims();
    Ok(PairWeights::from_fn(w, h, |p, q| match chroma.distance(p, q) {
        Some(d) if d <= params.t => match heat {
            Some(hm) => params.w_reflectance * (1.0 - (hm[p] + hm[q]) / 2.0),
            None => params.w_reflectance,
        },
        _ => 0.0,
    }))
}
