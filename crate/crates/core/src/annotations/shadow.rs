//! Vote aggregation and candidate shadow-boundary points.

use serde::{Deserialize, Serialize};

use super::model::{Judgment, NormPoint, PointComparison};
use crate::imgcore::{gradient_magnitude, luminance, LinearImage, ScalarField};
use crate::{Error, Result};

/// Offset added to luminance before taking logs.
pub const LOG_EPSILON: f64 = 1e-4;
/// Longest comparison segment, as a fraction of the image diagonal.
pub const MAX_SEGMENT_LENGTH: f64 = 0.2;
/// Weakest log-intensity gradient accepted as a boundary candidate.
pub const MIN_LOG_GRADIENT: f64 = 0.3;

/// Modal judgment of a comparison. Ties between the top judgments resolve
/// to [`Judgment::Equal`].
pub fn majority_vote(c: &PointComparison) -> Result<Judgment> {
    if c.votes.is_empty() {
        return Err(Error::InvalidAnnotation("comparison has no votes".into()));
    }
    let count = |j| c.votes.iter().filter(|&&v| v == j).count();
    let tally = [
        (Judgment::Point1Darker, count(Judgment::Point1Darker)),
        (Judgment::Point2Darker, count(Judgment::Point2Darker)),
        (Judgment::Equal, count(Judgment::Equal)),
    ];
    let best = tally.iter().map(|t| t.1).max().unwrap_or(0);
    let mut leaders = tally.iter().filter(|t| t.1 == best);
    match (leaders.next(), leaders.next()) {
        (Some(&(j, _)), None) => Ok(j),
        _ => Ok(Judgment::Equal),
    }
}

/// `ln(luminance + 1e-4)`.
pub fn log_intensity(img: &LinearImage) -> Result<ScalarField> {
    luminance(img).map(|l| (l.max(0.0) + LOG_EPSILON).ln())
}

/// A proposed shadow-boundary location awaiting crowd validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowCandidate {
    pub pixel: (usize, usize),
    /// Normalized position of the pixel centre.
    pub pos: NormPoint,
    pub gradient: f64,
}

/// Pixels crossed by the segment from `a` to `b`, in order from `a`.
pub fn bresenham(a: (usize, usize), b: (usize, usize)) -> Vec<(usize, usize)> {
    let (mut x, mut y) = (a.0 as i64, a.1 as i64);
    let (x1, y1) = (b.0 as i64, b.1 as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push((x as usize, y as usize));
        if x == x1 && y == y1 {
            return out;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Segment length in pixels divided by the image diagonal.
pub fn normalized_length(p1: NormPoint, p2: NormPoint, width: usize, height: usize) -> f64 {
    let dx = (p2.x() - p1.x()) * width as f64;
    let dy = (p2.y() - p1.y()) * height as f64;
    dx.hypot(dy) / (width as f64).hypot(height as f64)
}

/// Strongest log-intensity gradient pixel on the segment between the two
/// compared points.
///
/// Returns `None` when the segment is longer than 0.2 of the image diagonal
/// or the strongest gradient is below 0.3. Ties go to the pixel nearest the
/// first point. Fails if the majority judgment is `Equal` or the points
/// coincide.
pub fn candidate_shadow_point(img: &LinearImage, c: &PointComparison) -> Result<Option<ShadowCandidate>> {
    c.validate()?;
    if majority_vote(c)? == Judgment::Equal {
        return Err(Error::InvalidAnnotation(
            "comparison majority is Equal; no boundary between the points".into(),
        ));
    }
    if c.p1 == c.p2 {
        return Err(Error::InvalidAnnotation("comparison points coincide".into()));
    }
    let (w, h) = img.dims();
    if normalized_length(c.p1, c.p2, w, h) > MAX_SEGMENT_LENGTH {
        return Ok(None);
    }
    let grad = gradient_magnitude(&log_intensity(img)?)?;
    let start = c.p1.nearest_pixel(w, h);
    let end = c.p2.nearest_pixel(w, h);

    let mut best: Option<((usize, usize), f64)> = None;
    for (x, y) in bresenham(start, end) {
        let g = grad.get(x, y);
        if best.is_none_or(|(_, b)| g > b) {
            best = Some(((x, y), g));
        }
    }
    Ok(best.filter(|&(_, g)| g >= MIN_LOG_GRADIENT).map(|(pixel, g)| ShadowCandidate {
        pixel,
        pos: NormPoint((pixel.0 as f64 + 0.5) / w as f64, (pixel.1 as f64 + 0.5) / h as f64),
        gradient: g,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Judgment::*;

    fn cmp(p1: (f64, f64), p2: (f64, f64), votes: Vec<Judgment>) -> PointComparison {
        PointComparison {
            p1: NormPoint(p1.0, p1.1),
            p2: NormPoint(p2.0, p2.1),
            votes,
        }
    }

    /// Counts every judgment and picks a unique maximum, independently of
    /// the implementation's tally.
    fn counting_oracle(votes: &[Judgment]) -> Judgment {
        let mut counts = std::collections::HashMap::new();
        for v in votes {
            *counts.entry(*v).or_insert(0usize) += 1;
        }
        let max = *counts.values().max().unwrap();
        let top: Vec<_> = counts.into_iter().filter(|&(_, n)| n == max).collect();
        if top.len() == 1 {
            top[0].0
        } else {
            Equal
        }
    }

    #[test]
    fn vote_examples() {
        let c = |v| cmp((0.1, 0.1), (0.2, 0.2), v);
        assert_eq!(majority_vote(&c(vec![Point1Darker, Point1Darker, Point1Darker, Point2Darker, Point2Darker, Equal])).unwrap(), Point1Darker);
        assert_eq!(majority_vote(&c(vec![Point1Darker])).unwrap(), Point1Darker);
        let tie = vec![Point1Darker, Point1Darker, Point2Darker, Point2Darker];
        assert_eq!(majority_vote(&c(tie.clone())).unwrap(), Equal);
        assert_eq!(counting_oracle(&tie), Equal);
        assert!(majority_vote(&c(vec![])).is_err());
    }

    fn step_image(w: usize, h: usize, at: usize, contrast: f64) -> LinearImage {
        LinearImage::from_gray_fn(w, h, |x, _| if x >= at { 0.2 * contrast.exp() } else { 0.2 }).unwrap()
    }

    #[test]
    fn long_segment_is_rejected() {
        let img = step_image(40, 40, 20, 1.0);
        let c = cmp((0.1, 0.5), (0.6, 0.5), vec![Point1Darker]);
        assert!(normalized_length(c.p1, c.p2, 40, 40) > 0.2);
        assert_eq!(candidate_shadow_point(&img, &c).unwrap(), None);
    }

    #[test]
    fn step_edge_yields_the_step_pixel() {
        let img = step_image(40, 40, 20, 1.0);
        let c = cmp((15.5 / 40.0, 0.5), (24.5 / 40.0, 0.5), vec![Point1Darker, Point1Darker]);
        let cand = candidate_shadow_point(&img, &c).unwrap().unwrap();
        // Forward differences put the jump on the last dark column.
        assert_eq!(cand.pixel, (19, 20));
        let expected = (0.2 * 1f64.exp() + LOG_EPSILON).ln() - (0.2 + LOG_EPSILON).ln();
        assert!((cand.gradient - expected).abs() < 1e-12);

        // Exhaustive scan of the row segment agrees.
        let grad = gradient_magnitude(&log_intensity(&img).unwrap()).unwrap();
        let best = (15..=24).max_by(|&a, &b| grad.get(a, 20).total_cmp(&grad.get(b, 20)).then(b.cmp(&a))).unwrap();
        assert_eq!(best, 19);
    }

    #[test]
    fn flat_region_has_no_candidate() {
        let img = LinearImage::from_gray_fn(30, 30, |_, _| 0.4).unwrap();
        let c = cmp((0.4, 0.4), (0.5, 0.5), vec![Point2Darker]);
        assert_eq!(candidate_shadow_point(&img, &c).unwrap(), None);
    }

    #[test]
    fn equal_majority_and_coincident_points_fail() {
        let img = step_image(20, 20, 10, 1.0);
        assert!(candidate_shadow_point(&img, &cmp((0.4, 0.4), (0.5, 0.5), vec![Equal])).is_err());
        assert!(candidate_shadow_point(&img, &cmp((0.4, 0.4), (0.4, 0.4), vec![Point1Darker])).is_err());
    }

    #[test]
    fn ties_prefer_the_first_point() {
        // A bright band: the up and down steps have identical magnitude, so
        // the one nearer p1 wins regardless of direction.
        let img = LinearImage::from_gray_fn(40, 100, |x, _| match x {
            15..=24 => 0.1 * 1f64.exp(),
            _ => 0.1,
        })
        .unwrap();
        let left = (10.5 / 40.0, 0.55);
        let right = (29.5 / 40.0, 0.55);
        let forward = candidate_shadow_point(&img, &cmp(left, right, vec![Point1Darker])).unwrap().unwrap();
        let backward = candidate_shadow_point(&img, &cmp(right, left, vec![Point2Darker])).unwrap().unwrap();
        assert!(forward.pixel.0 < backward.pixel.0);
    }

    #[test]
    fn bresenham_endpoints_and_connectivity() {
        let line = bresenham((2, 7), (9, 3));
        assert_eq!(line.first(), Some(&(2, 7)));
        assert_eq!(line.last(), Some(&(9, 3)));
        assert_eq!(line.len(), 8);
        for pair in line.windows(2) {
            let dx = pair[0].0.abs_diff(pair[1].0);
            let dy = pair[0].1.abs_diff(pair[1].1);
            assert!(dx <= 1 && dy <= 1 && dx + dy > 0);
        }
        assert_eq!(bresenham((3, 3), (3, 3)), vec![(3, 3)]);
    }

    proptest! {
        #[test]
        fn votes_match_counting_oracle(votes in proptest::collection::vec(0u8..3, 1..12)) {
            let votes: Vec<Judgment> = votes.into_iter().map(|v| [Point1Darker, Point2Darker, Equal][v as usize]).collect();
            let c = cmp((0.1, 0.1), (0.2, 0.2), votes.clone());
            prop_assert_eq!(majority_vote(&c).unwrap(), counting_oracle(&votes));
        }

        #[test]
        fn candidate_is_the_segment_maximum(
            seed in any::<u64>(),
            x1 in 0.2f64..0.8, y1 in 0.2f64..0.8, dx in -0.1f64..0.1, dy in -0.1f64..0.1,
        ) {
            let (w, h) = (32, 24);
            let img = LinearImage::from_gray_fn(w, h, |x, y| {
                let v = (seed ^ ((x * 131 + y * 7919) as u64)).wrapping_mul(0x9E3779B97F4A7C15) >> 44;
                0.01 + (v % 1000) as f64 / 1000.0
            }).unwrap();
            let c = cmp((x1, y1), (x1 + dx, y1 + dy), vec![Point1Darker]);
            prop_assume!(c.p1 != c.p2);
            if let Some(cand) = candidate_shadow_point(&img, &c).unwrap() {
                let grad = gradient_magnitude(&log_intensity(&img).unwrap()).unwrap();
                prop_assert!(cand.gradient >= MIN_LOG_GRADIENT);
                prop_assert_eq!(cand.gradient, grad.get(cand.pixel.0, cand.pixel.1));
                // Lies within half a pixel diagonal of the continuous segment
                // between the endpoint pixel centres.
                let a = c.p1.nearest_pixel(w, h);
                let b = c.p2.nearest_pixel(w, h);
                let (ax, ay, bx, by) = (a.0 as f64, a.1 as f64, b.0 as f64, b.1 as f64);
                let (px, py) = (cand.pixel.0 as f64, cand.pixel.1 as f64);
                let len2 = (bx - ax).powi(2) + (by - ay).powi(2);
                let t = if len2 == 0.0 { 0.0 } else { (((px - ax) * (bx - ax) + (py - ay) * (by - ay)) / len2).clamp(0.0, 1.0) };
                let dist = (px - ax - t * (bx - ax)).hypot(py - ay - t * (by - ay));
                prop_assert!(dist <= std::f64::consts::FRAC_1_SQRT_2 + 1e-9);
                for (x, y) in bresenham(a, b) {
                    prop_assert!(grad.get(x, y) <= cand.gradient);
                }
            }
        }
    }
}
