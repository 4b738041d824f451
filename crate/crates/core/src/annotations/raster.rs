//! Scanline fill of constant-shading polygons.

use super::model::ConstantShadingRegion;
use crate::imgcore::{binary_erosion, BinaryMask};
use crate::Result;

/// Fills `region` into `mask` using the even-odd rule. A pixel is inside
/// when its centre is; centres exactly on a left/top edge are included and
/// on a right/bottom edge excluded.
fn fill_polygon(mask: &mut BinaryMask, region: &ConstantShadingRegion) {
    let (w, h) = mask.dims();
    let pts: Vec<(f64, f64)> = region
        .vertices
        .iter()
        .map(|p| (p.x() * w as f64, p.y() * h as f64))
        .collect();
    let n = pts.len();
    let mut crossings = Vec::with_capacity(n);
    for y in 0..h {
        let yc = y as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % n];
            // Half-open in y so shared vertices count once.
            if (y0 <= yc && yc < y1) || (y1 <= yc && yc < y0) {
                crossings.push(x0 + (yc - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        crossings.sort_by(|a, b| a.total_cmp(b));
        for span in crossings.chunks_exact(2) {
            // Pixel centres x + 0.5 in [left, right).
            let first = (span[0] - 0.5).ceil().max(0.0) as usize;
            let end = ((span[1] - 0.5).ceil().max(0.0) as usize).min(w);
            for x in first..end {
                mask.set(x, y, true);
            }
        }
    }
}

/// Union of the filled regions, eroded `erosion_iters` times with the 3x3
/// element.
pub fn rasterize_smooth_regions(
    regions: &[ConstantShadingRegion],
    width: usize,
    height: usize,
    erosion_iters: usize,
) -> Result<BinaryMask> {
    let mut mask = BinaryMask::filled(width, height, false);
    for region in regions {
        region.validate()?;
        fill_polygon(&mut mask, region);
    }
    Ok(binary_erosion(&mask, erosion_iters))
}
