//! Annotation records and the label-generation pipeline.
//!
//! Smooth (S) labels come from eroded constant-shading polygons, NS-ND
//! labels from thresholded depth/normal gradients and NS-SB labels from
//! crowd-validated shadow-boundary points.

mod labels;
mod model;
mod nsnd;
mod pipeline;
mod raster;
mod shadow;

pub use labels::{build_label_map, ClassCounts, ShadingClass, ShadingLabelMap, LABEL_DILATION_WINDOW};
pub use model::{AnnotationSet, ConstantShadingRegion, Judgment, NormPoint, PointComparison, ShadowBoundaryPoint};
pub use nsnd::{generate_nsnd, DepthMap, NormalMap, NsNdParams, NORMAL_UNIT_TOLERANCE};
pub use pipeline::{generate_labels, shadow_candidates, Geometry, LabelGenOptions};
pub use raster::rasterize_smooth_regions;
pub use shadow::{
    bresenham, candidate_shadow_point, log_intensity, majority_vote, normalized_length, ShadowCandidate,
    LOG_EPSILON, MAX_SEGMENT_LENGTH, MIN_LOG_GRADIENT,
};
