use super::weights::{retinex_weights, HeatMap, PairWeights, RetinexParams};
use crate::imgcore::{ensure_same_dims, luminance, LinearImage, ScalarField};
use crate::Result;

/// Luminance is clamped to at least this before taking logs.
pub const LUMINANCE_FLOOR: f64 = 1e-4;

/// `ln(max(luminance, 1e-4))`.
pub fn log_luminance(img: &LinearImage) -> ScalarField {
    luminance(img)
        .map(|l| l.max(LUMINANCE_FLOOR).ln())
        .expect("log of a clamped finite luminance is finite")
}

/// `sum over edges (s_p - s_q)^2 + w_pq ((i_p - i_q) - (s_p - s_q))^2`,
/// with `i` the log luminance and `s` the log shading.
pub fn energy_with_weights(log_lum: &ScalarField, log_shading: &ScalarField, weights: &PairWeights) -> Result<f64> {
    ensure_same_dims(log_lum.dims(), log_shading.dims())?;
    ensure_same_dims(log_lum.dims(), weights.dims())?;
    let (i, s) = (log_lum.data(), log_shading.data());
    Ok(weights
        .edges()
        .map(|(p, q, om)| {
            let ds = s[p] - s[q];
            let dr = (i[p] - i[q]) - ds;
            ds * ds + om * dr * dr
        })
        .sum())
}

/// Retinex energy of log shading `s` for `img`.
pub fn energy(img: &LinearImage, log_shading: &ScalarField, params: &RetinexParams, heat: Option<&HeatMap>) -> Result<f64> {
    let weights = retinex_weights(img, params, heat)?;
    energy_with_weights(&log_luminance(img), log_shading, &weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> LinearImage {
        // Two palette colours so some edges are gated off.
        let palette = [[0.2, 0.3, 0.5], [0.5, 0.3, 0.2]];
        LinearImage::from_rgb_fn(w, h, |_, _| {
            let c = palette[rng.gen_range(0..2)];
            let k = rng.gen_range(0.1..1.0);
            [c[0] * k, c[1] * k, c[2] * k]
        })
        .unwrap()
    }

    #[test]
    fn all_shading_and_all_reflectance_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = random_image(&mut rng, 5, 4);
        let params = RetinexParams::default();
        let i = log_luminance(&img);
        let w = retinex_weights(&img, &params, None).unwrap();

        let variation: f64 = w.edges().map(|(p, q, _)| (i.data()[p] - i.data()[q]).powi(2)).sum();
        assert!((energy(&img, &i, &params, None).unwrap() - variation).abs() < 1e-12);

        let weighted: f64 = w.edges().map(|(p, q, om)| om * (i.data()[p] - i.data()[q]).powi(2)).sum();
        let flat = ScalarField::constant(5, 4, 0.7).unwrap();
        assert!((energy(&img, &flat, &params, None).unwrap() - weighted).abs() < 1e-9 * weighted.max(1.0));
    }

    #[test]
    fn matches_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let img = random_image(&mut rng, 4, 4);
        let s = ScalarField::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let params = RetinexParams::default();

        // Neighbour pairs enumerated by explicit offsets; weights from the
        // rule evaluated directly on the pixels.
        let px = |x: usize, y: usize| img.pixel(x, y).to_vec();
        let chroma = |p: &[f64]| {
            let sum: f64 = p.iter().sum();
            (p[0] / sum, p[1] / sum)
        };
        let lum = |p: &[f64]| (0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2]).max(1e-4).ln();
        let mut oracle = 0.0;
        for y in 0..4 {
            for x in 0..4 {
                for (dx, dy) in [(1, 0), (0, 1)] {
                    let (qx, qy) = (x + dx, y + dy);
                    if qx >= 4 || qy >= 4 {
                        continue;
                    }
                    let (a, b) = (px(x, y), px(qx, qy));
                    let (ca, cb) = (chroma(&a), chroma(&b));
                    let dist = ((ca.0 - cb.0).powi(2) + (ca.1 - cb.1).powi(2)).sqrt();
                    let om = if dist > 0.02 { 0.0 } else { 100.0 };
                    let ds = s.get(x, y) - s.get(qx, qy);
                    let di = lum(&a) - lum(&b);
                    oracle += ds * ds + om * (di - ds) * (di - ds);
                }
            }
        }
        let e = energy(&img, &s, &params, None).unwrap();
        assert!((e - oracle).abs() <= 1e-10 * oracle, "{e} vs {oracle}");
    }

    #[test]
    fn gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let img = random_image(&mut rng, 6, 5);
        let s = ScalarField::from_fn(6, 5, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let shifted = s.map(|v| v + 3.25).unwrap();
        let params = RetinexParams::default();
        let (a, b) = (energy(&img, &s, &params, None).unwrap(), energy(&img, &shifted, &params, None).unwrap());
        assert!((a - b).abs() <= 1e-10 * a);
    }
}
