//! Normal/depth discontinuity labels from RGB-D geometry.

use serde::{Deserialize, Serialize};

use crate::imgcore::{binary_erosion, ensure_same_dims, gradient, gradient_magnitude, BinaryMask, ScalarField};
use crate::{Error, Result};

/// Per-pixel scene depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap(ScalarField);

impl DepthMap {
    pub fn new(depth: ScalarField) -> Self {
        Self(depth)
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }
}

/// Per-pixel surface normals. Each normal is unit length (within 1e-3) or
/// the zero vector, which marks a pixel without a normal estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    width: usize,
    height: usize,
    normals: Vec<[f64; 3]>,
}

pub const NORMAL_UNIT_TOLERANCE: f64 = 1e-3;

impl NormalMap {
    pub fn new(width: usize, height: usize, normals: Vec<[f64; 3]>) -> Result<Self> {
        if normals.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{width}x{height} normal map needs {} normals, got {}",
                width * height,
                normals.len()
            )));
        }
        for (i, n) in normals.iter().enumerate() {
            if n.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidValue(format!("non-finite normal at index {i}")));
            }
            let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if norm != 0.0 && (norm - 1.0).abs() > NORMAL_UNIT_TOLERANCE {
                return Err(Error::InvalidValue(format!("normal at index {i} has length {norm}")));
            }
        }
        Ok(Self {
            width,
            height,
            normals,
        })
    }

    /// Builds a map from interleaved xyz samples, rescaling each non-zero
    /// vector to unit length.
    pub fn from_interleaved_normalized(width: usize, height: usize, xyz: &[f64]) -> Result<Self> {
        if xyz.len() != width * height * 3 {
            return Err(Error::Dimensions("normal buffer length must be width*height*3".into()));
        }
        let normals = xyz
            .chunks_exact(3)
            .map(|c| {
                let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                if n > 1e-12 {
                    [c[0] / n, c[1] / n, c[2] / n]
                } else {
                    [0.0; 3]
                }
            })
            .collect();
        Self::new(width, height, normals)
    }

    pub fn constant(width: usize, height: usize, n: [f64; 3]) -> Result<Self> {
        Self::new(width, height, vec![n; width * height])
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn normals(&self) -> &[[f64; 3]] {
        &self.normals
    }

    fn component(&self, c: usize) -> ScalarField {
        ScalarField::new(self.width, self.height, self.normals.iter().map(|n| n[c]).collect())
            .expect("normal components are finite")
    }

    /// L2 norm over all six partial derivatives (3 components x 2 axes).
    pub fn gradient_magnitude(&self) -> Result<ScalarField> {
        let mut sq = vec![0.0; self.width * self.height];
        for c in 0..3 {
            let (gx, gy) = gradient(&self.component(c))?;
            for ((s, a), b) in sq.iter_mut().zip(gx.data()).zip(gy.data()) {
                *s += a * a + b * b;
            }
        }
        ScalarField::new(self.width, self.height, sq.into_iter().map(f64::sqrt).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsNdParams {
    pub tau_depth: f64,
    pub tau_normal: f64,
    pub mask_erosion_iters: usize,
    /// Border exclusion band as a fraction of the image width.
    pub border_margin_frac: f64,
}

impl Default for NsNdParams {
    fn default() -> Self {
        Self {
            tau_depth: 2.0,
            tau_normal: 1.5,
            mask_erosion_iters: 3,
            border_margin_frac: 0.05,
        }
    }
}

impl NsNdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_depth > 0.0 && self.tau_normal > 0.0) {
            return Err(Error::InvalidParameter("NS-ND thresholds must be > 0".into()));
        }
        if !(0.0..0.5).contains(&self.border_margin_frac) {
            return Err(Error::InvalidParameter("border margin must be in [0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Marks pixels where the depth or normal gradient exceeds its threshold.
///
/// A pixel is kept only if it survives erosion of the reliability `mask`
/// and lies at least `border_margin_frac * width` pixels from every edge.
pub fn generate_nsnd(
    depth: &DepthMap,
    normal: &NormalMap,
    mask: &BinaryMask,
    params: &NsNdParams,
) -> Result<BinaryMask> {
    params.validate()?;
    ensure_same_dims(depth.dims(), normal.dims())?;
    ensure_same_dims(depth.dims(), mask.dims())?;
    let (w, h) = depth.dims();

    let depth_grad = gradient_magnitude(depth.field())?;
    let normal_grad = normal.gradient_magnitude()?;
    let reliable = binary_erosion(mask, params.mask_erosion_iters);
    let margin = params.border_margin_frac * w as f64;

    Ok(BinaryMask::from_fn(w, h, |x, y| {
        let edge_dist = x.min(y).min(w - 1 - x).min(h - 1 - y) as f64;
        let fires = depth_grad.get(x, y) > params.tau_depth || normal_grad.get(x, y) > params.tau_normal;
        fires && reliable.get(x, y) && edge_dist >= margin
    }))
}
