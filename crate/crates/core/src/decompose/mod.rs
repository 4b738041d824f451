//! Retinex intrinsic-image decomposition with an optional smooth-shading
//! prior.
//!
//! Works in the log domain, where `i = r + s` for log luminance `i`, log
//! reflectance `r` and log shading `s`. For every 4-neighbour pair the
//! energy charges `(s_p - s_q)^2` for shading change and
//! `w_pq (r_p - r_q)^2` for reflectance change. `w_pq` is large for pairs
//! with matching chromaticity (they are assumed to share reflectance) and 0
//! otherwise; a heatmap of smooth-shading probability `H` lowers it to
//! `w (1 - (H_p + H_q) / 2)`, releasing the constancy constraint where the
//! shading is known to be smooth.
//!
//! Shading is scalar; reflectance keeps the colour: `R_c = I_c / S`.

mod chroma;
mod energy;
mod solver;
mod weights;

pub use chroma::{chromaticity, ChromaImage, CHROMA_MIN_SUM};
pub use energy::{energy, energy_with_weights, log_luminance, LUMINANCE_FLOOR};
pub use solver::{rhs, solve_log_shading, SolveStats};
pub use weights::{retinex_weights, HeatMap, PairWeights, RetinexParams, ShadingAnchor};

use crate::imgcore::{ensure_same_dims, LinearImage, ScalarField};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub reflectance: LinearImage,
    /// Linear shading, strictly positive.
    pub shading: ScalarField,
    pub log_shading: ScalarField,
    /// Energy at the returned solution.
    pub energy: f64,
    pub stats: SolveStats,
}

/// Splits `img` into reflectance and shading by minimising the Retinex
/// energy with conjugate gradients.
pub fn decompose_retinex(img: &LinearImage, params: &RetinexParams, heat: Option<&HeatMap>) -> Result<Decomposition> {
    if let Some(h) = heat {
        ensure_same_dims(img.dims(), h.dims())?;
    }
    let weights = retinex_weights(img, params, heat)?;
    let log_lum = log_luminance(img);
    let (w, h) = img.dims();
    let max_iterations = params.max_iterations.unwrap_or(10 * w * h).max(1);
    let (log_shading, stats) = solve_log_shading(&log_lum, &weights, params.tolerance, max_iterations)?;
    let log_shading = match params.anchor {
        // The solver already returns the zero-mean representative.
        ShadingAnchor::ZeroMean => log_shading,
    };
    let energy = energy_with_weights(&log_lum, &log_shading, &weights)?;

    let shading = log_shading.map(f64::exp)?;
    let channels = img.channels();
    let reflectance_data = img
        .data()
        .iter()
        .enumerate()
        .map(|(k, &v)| v / shading.data()[k / channels])
        .collect();
    let reflectance = LinearImage::new(w, h, channels, reflectance_data)?;

    Ok(Decomposition {
        reflectance,
        shading,
        log_shading,
        energy,
        stats,
    })
}
