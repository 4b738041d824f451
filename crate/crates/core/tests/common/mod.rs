//! Fixtures and independent reference implementations shared by the
//! integration tests. Nothing here calls into the code under test except to
//! build its input types.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use shading_core::annotations::{
    AnnotationSet, ConstantShadingRegion, DepthMap, Geometry, NormPoint, NormalMap, ShadowBoundaryPoint,
};
use shading_core::decompose::HeatMap;
use shading_core::imgcore::{LinearImage, ScalarField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Patchwork of a few base colours with random brightness, chroma jitter
/// and the occasional black pixel, so every kind of pair weight shows up.
pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, jitter: f64) -> LinearImage {
    let palette: Vec<[f64; 3]> = (0..3)
        .map(|_| [rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)])
        .collect();
    let block = rng.gen_range(2..6);
    let bw = w.div_ceil(block);
    let blocks: Vec<usize> = (0..bw * h.div_ceil(block)).map(|_| rng.gen_range(0..3)).collect();
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            if rng.gen_bool(0.02) {
                data.extend([0.0; 3]);
                continue;
            }
            let base = palette[blocks[(y / block) * bw + x / block]];
            let k = rng.gen_range(0.05..2.0);
            for c in base {
                data.push(k * c * (1.0 + rng.gen_range(-jitter..=jitter)));
            }
        }
    }
    LinearImage::new(w, h, 3, data).unwrap()
}

pub fn random_heat(rng: &mut ChaCha8Rng, w: usize, h: usize) -> HeatMap {
    HeatMap::new(ScalarField::from_fn(w, h, |_, _| rng.gen_range(0.0..=1.0)).unwrap()).unwrap()
}

/// `ln(max(luminance, 1e-4))`.
pub fn ref_log_lum(img: &LinearImage) -> Vec<f64> {
    img.data()
        .chunks(3)
        .map(|p| (0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2]).max(1e-4).ln())
        .collect()
}

/// Every 4-neighbour pair `(p, q, weight)`, written out pixel by pixel.
pub fn ref_edges(img: &LinearImage, t: f64, w_refl: f64, heat: Option<&[f64]>) -> Vec<(usize, usize, f64)> {
    let (w, h) = img.dims();
    let chroma: Vec<Option<(f64, f64)>> = img
        .data()
        .chunks(3)
        .map(|p| {
            let s = p[0] + p[1] + p[2];
            (s >= 1e-6).then(|| (p[0] / s, p[1] / s))
        })
        .collect();
    let weight = |p: usize, q: usize| match (chroma[p], chroma[q]) {
        (Some(a), Some(b)) if ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() <= t => match heat {
            Some(hm) => w_refl * (1.0 - 0.5 * (hm[p] + hm[q])),
            None => w_refl,
        },
        _ => 0.0,
    };
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if x + 1 < w {
                edges.push((p, p + 1, weight(p, p + 1)));
            }
            if y + 1 < h {
                edges.push((p, p + w, weight(p, p + w)));
            }
        }
    }
    edges
}

pub fn ref_energy(i: &[f64], s: &[f64], edges: &[(usize, usize, f64)]) -> f64 {
    edges
        .iter()
        .map(|&(p, q, om)| {
            let ds = s[p] - s[q];
            let dr = (i[p] - i[q]) - ds;
            ds * ds + om * dr * dr
        })
        .sum()
}

/// Zero-mean minimiser of the energy by a dense Cholesky solve of
/// `(A + 1 1^T) s = b`. Because `1^T A = 0` and `1^T b = 0`, the solution
/// automatically has zero mean.
pub fn dense_solve(n: usize, i: &[f64], edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut a = DMatrix::<f64>::from_element(n, n, 1.0);
    let mut b = DVector::<f64>::zeros(n);
    for &(p, q, om) in edges {
        let c = 1.0 + om;
        a[(p, p)] += c;
        a[(q, q)] += c;
        a[(p, q)] -= c;
        a[(q, p)] -= c;
        let d = om * (i[p] - i[q]);
        b[p] += d;
        b[q] -= d;
    }
    let chol = a.cholesky().expect("anchored system is positive definite");
    chol.solve(&b).iter().copied().collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Textured reflectance of one chroma times a smooth shading ramp. The
/// texture occupies `region` (x0, y0, x1, y1), half-open.
pub fn textured_fixture(w: usize, h: usize, region: (usize, usize, usize, usize), seed: u64) -> LinearImage {
    let mut rng = rng(seed);
    let (x0, y0, x1, y1) = region;
    let base = [0.55, 0.45, 0.35];
    LinearImage::from_rgb_fn(w, h, |x, y| {
        let shading = (0.6 * (x as f64 / w as f64) - 0.4 * (y as f64 / h as f64) + 0.2 * (y as f64 / 7.0).sin()).exp();
        let albedo = if (x0..x1).contains(&x) && (y0..y1).contains(&y) {
            rng.gen_range(0.2..1.0)
        } else {
            0.6
        };
        // Per-channel jitter of 0.5% keeps chroma distances well below 0.02.
        base.map(|c| albedo * c * shading * (1.0 + rng.gen_range(-0.005..=0.005)))
    })
    .unwrap()
}

/// Label fixture: 32x32 photo, one square region with vertices on pixel
/// corners 2 and 13, a depth step of 5 between columns 19 and 20, and one
/// validated shadow point at pixel (22, 10).
pub fn label_fixture() -> (AnnotationSet, Geometry) {
    let (w, h) = (32usize, 32usize);
    let corner = |x: f64, y: f64| NormPoint(x / w as f64, y / h as f64);
    let mut ann = AnnotationSet::empty("fixture", w, h);
    ann.regions.push(
        ConstantShadingRegion::new(vec![corner(2.0, 2.0), corner(13.0, 2.0), corner(13.0, 13.0), corner(2.0, 13.0)])
            .unwrap(),
    );
    ann.shadow_points.push(ShadowBoundaryPoint {
        pos: corner(22.5, 10.5),
        validated: true,
    });
    let depth = DepthMap::new(ScalarField::from_fn(w, h, |x, _| if x >= 20 { 5.0 } else { 0.0 }).unwrap());
    let normals = NormalMap::constant(w, h, [0.0, 0.0, 1.0]).unwrap();
    (ann, Geometry { depth, normals, mask: None })
}
