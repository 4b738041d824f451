//! Per-photo label generation at the working resolution.

use serde::{Deserialize, Serialize};

use super::labels::{build_label_map, ShadingLabelMap};
use super::model::AnnotationSet;
use super::nsnd::{generate_nsnd, DepthMap, NormalMap, NsNdParams};
use super::raster::rasterize_smooth_regions;
use super::shadow::{candidate_shadow_point, majority_vote, ShadowCandidate};
use super::Judgment;
use crate::imgcore::{bilinear, fit_dims, resize_field_to, resize_mask_to, resize_max_dim, BinaryMask, LinearImage};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelGenOptions {
    /// Photos are resized so that their larger side is at most this.
    pub max_dim: usize,
    pub smooth_erosion_iters: usize,
    /// Dilate non-smooth labels (training split only).
    pub dilate_ns: bool,
    pub nsnd: NsNdParams,
}

impl Default for LabelGenOptions {
    fn default() -> Self {
        Self {
            max_dim: 512,
            smooth_erosion_iters: 3,
            dilate_ns: false,
            nsnd: NsNdParams::default(),
        }
    }
}

/// RGB-D geometry for a photo. A missing mask means every pixel is reliable.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub depth: DepthMap,
    pub normals: NormalMap,
    pub mask: Option<BinaryMask>,
}

impl Geometry {
    /// Resamples to `dims`: bilinear for depth and normals (renormalized),
    /// nearest for the mask.
    fn resized(&self, dims: (usize, usize)) -> Result<(DepthMap, NormalMap, BinaryMask)> {
        let depth = DepthMap::new(resize_field_to(self.depth.field(), dims)?);
        let normals = if self.normals.dims() == dims {
            self.normals.clone()
        } else {
            let flat: Vec<f64> = self.normals.normals().iter().flatten().copied().collect();
            NormalMap::from_interleaved_normalized(dims.0, dims.1, &bilinear(&flat, self.normals.dims(), 3, dims))?
        };
        let mask = match &self.mask {
            Some(m) => resize_mask_to(m, dims),
            None => BinaryMask::filled(dims.0, dims.1, true),
        };
        Ok((depth, normals, mask))
    }
}

/// Builds the label map of one photo at `fit_dims(width, height, max_dim)`.
pub fn generate_labels(
    ann: &AnnotationSet,
    geometry: Option<&Geometry>,
    opts: &LabelGenOptions,
) -> Result<ShadingLabelMap> {
    ann.validate()?;
    let (w, h) = fit_dims(ann.width, ann.height, opts.max_dim);
    let smooth = rasterize_smooth_regions(&ann.regions, w, h, opts.smooth_erosion_iters)?;
    let nsnd = match geometry {
        Some(g) => {
            let (depth, normals, mask) = g.resized((w, h))?;
            generate_nsnd(&depth, &normals, &mask, &opts.nsnd)?
        }
        None => BinaryMask::filled(w, h, false),
    };
    let points: Vec<_> = ann.validated_points().copied().collect();
    build_label_map(&smooth, &nsnd, &points, opts.dilate_ns)
}

/// Candidate shadow-boundary points for every comparison whose majority
/// judgment is not `Equal`, computed on the image resized to `max_dim`.
pub fn shadow_candidates(img: &LinearImage, ann: &AnnotationSet, max_dim: usize) -> Result<Vec<ShadowCandidate>> {
    let img = resize_max_dim(img, max_dim)?;
    let mut out = Vec::new();
    for c in &ann.comparisons {
        if majority_vote(c)? == Judgment::Equal || c.p1 == c.p2 {
            continue;
        }
        if let Some(cand) = candidate_shadow_point(&img, c)? {
            out.push(cand);
        }
    }
    Ok(out)
}
