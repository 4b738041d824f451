//! Shading-annotation processing, smooth-shading classification and
//! intrinsic image decomposition.
//!
//! The crate is organised around the data flow of a labelling and
//! evaluation run:
//!
//! * [`imgcore`] holds the image containers and the window/gradient
//!   primitives everything else is built from.
//! * [`io`] reads and writes PNG (sRGB-decoded) and PFM (raw float) files.
//! * [`annotations`] turns polygon regions, depth/normal maps and validated
//!   shadow-boundary points into per-pixel [`annotations::ShadingLabelMap`]s.
//! * [`decompose`] solves the chromaticity-gated Retinex energy, optionally
//!   modulated by a smooth-shading heatmap.
//! * [`classify`] turns shading layers or heatmaps into smooth-shading scores.
//! * [`eval`] sweeps thresholds over scores to build class-balanced
//!   precision-recall curves.

pub mod annotations;
pub mod classify;
pub mod decompose;
mod error;
pub mod eval;
pub mod imgcore;
pub mod io;

pub use error::{Error, Result};
