//! Smooth-vs-non-smooth shading scores.
//!
//! Every score map follows one convention: higher means more likely smooth,
//! and a pixel is predicted smooth when its score exceeds the threshold.
//! Gradient-based scores are negated filtered gradients, so "score > -tau"
//! is the same as "filtered gradient < tau".

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decompose::{HeatMap, LUMINANCE_FLOOR};
use crate::imgcore::{gradient_magnitude, luminance, max_filter, LinearImage, ScalarField};
use crate::{io, Error, Result};

/// Window of the maximum filter applied to shading gradients.
pub const GRADIENT_MAX_FILTER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreKind {
    /// Negated, max-filtered log-shading gradient magnitude.
    NegGradient,
    /// Smooth-shading probability in [0, 1].
    Probability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothScoreMap {
    scores: ScalarField,
    kind: ScoreKind,
}

impl SmoothScoreMap {
    pub fn new(scores: ScalarField, kind: ScoreKind) -> Result<Self> {
        if kind == ScoreKind::Probability && scores.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidValue("probability scores must lie in [0, 1]".into()));
        }
        Ok(Self { scores, kind })
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn scores(&self) -> &ScalarField {
        &self.scores
    }

    pub fn dims(&self) -> (usize, usize) {
        self.scores.dims()
    }

    /// Predicted smooth at `threshold`.
    pub fn smooth_mask(&self, threshold: f64) -> Vec<bool> {
        self.scores.data().iter().map(|&s| s > threshold).collect()
    }

    pub fn save_pfm(&self, path: impl AsRef<Path>) -> Result<()> {
        io::write_pfm_field(path, &self.scores)
    }

    pub fn load_pfm(path: impl AsRef<Path>, kind: ScoreKind) -> Result<Self> {
        Self::new(io::read_pfm_field(path)?, kind)
    }
}

/// `max_filter(|grad ln S|, 10)` for a strictly positive shading layer.
pub fn filtered_log_gradient(shading: &ScalarField) -> Result<ScalarField> {
    if let Some(v) = shading.data().iter().find(|&&v| v <= 0.0) {
        return Err(Error::InvalidValue(format!("shading must be > 0, found {v}")));
    }
    let log_s = shading.map(f64::ln)?;
    max_filter(&gradient_magnitude(&log_s)?, GRADIENT_MAX_FILTER)
}

/// Scores a shading layer from any decomposition.
pub fn score_from_shading(shading: &ScalarField) -> Result<SmoothScoreMap> {
    let g = filtered_log_gradient(shading)?;
    SmoothScoreMap::new(g.map(|v| -v)?, ScoreKind::NegGradient)
}

/// Constant-reflectance baseline: the input's own luminance (floored at
/// 1e-4) serves as the shading layer.
pub fn constant_reflectance_scores(img: &LinearImage) -> Result<SmoothScoreMap> {
    score_from_shading(&luminance(img).map(|l| l.max(LUMINANCE_FLOOR))?)
}

/// Heatmap probabilities used directly as scores.
pub fn score_from_heatmap(heat: &HeatMap) -> SmoothScoreMap {
    SmoothScoreMap {
        scores: heat.field().clone(),
        kind: ScoreKind::Probability,
    }
}
