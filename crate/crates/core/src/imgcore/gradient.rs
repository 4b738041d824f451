use super::{LinearImage, ScalarField, LUMA_WEIGHTS};
use crate::{Error, Result};

/// Per-pixel luminance. RGB uses Rec. 709 weights; gray images are copied.
pub fn luminance(img: &LinearImage) -> ScalarField {
    let data = match img.channels() {
        1 => img.data().to_vec(),
        _ => img
            .pixels()
            .map(|p| LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2])
            .collect(),
    };
    ScalarField::new(img.width(), img.height(), data).expect("luminance of a valid image is valid")
}

/// Forward-difference partial derivatives `(d/dx, d/dy)`.
///
/// The last column and last row fall back to backward differences so the
/// outputs keep the input dimensions.
pub fn gradient(f: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    let (w, h) = f.dims();
    if w < 2 || h < 2 {
        return Err(Error::Dimensions(format!(
            "gradient needs at least 2x2 pixels, got {w}x{h}"
        )));
    }
    let v = f.data();
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            gx[i] = if x + 1 < w { v[i + 1] - v[i] } else { v[i] - v[i - 1] };
            gy[i] = if y + 1 < h { v[i + w] - v[i] } else { v[i] - v[i - w] };
        }
    }
    Ok((ScalarField::new(w, h, gx)?, ScalarField::new(w, h, gy)?))
}

/// L2 norm of the forward-difference gradient at each pixel.
pub fn gradient_magnitude(f: &ScalarField) -> Result<ScalarField> {
    let (gx, gy) = gradient(f)?;
    let data = gx
        .data()
        .iter()
        .zip(gy.data())
        .map(|(a, b)| a.hypot(*b))
        .collect();
    ScalarField::new(f.width(), f.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central-index stencil evaluated independently of the implementation.
    fn oracle(v: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let h = v.len();
        let w = v[0].len();
        let mut out = vec![vec![0.0; w]; h];
        for y in 0..h {
            for x in 0..w {
                let dx = if x == w - 1 { v[y][x] - v[y][x - 1] } else { v[y][x + 1] - v[y][x] };
                let dy = if y == h - 1 { v[y][x] - v[y - 1][x] } else { v[y + 1][x] - v[y][x] };
                out[y][x] = (dx * dx + dy * dy).sqrt();
            }
        }
        out
    }

    #[test]
    fn luminance_examples() {
        let img = LinearImage::new(3, 1, 3, vec![1., 1., 1., 0., 0., 0., 1., 0., 0.]).unwrap();
        let l = luminance(&img);
        assert!((l.data()[0] - 1.0).abs() < 1e-12);
        assert_eq!(l.data()[1], 0.0);
        assert_eq!(l.data()[2], 0.2126);

        let gray = LinearImage::new(2, 1, 1, vec![0.25, 0.75]).unwrap();
        assert_eq!(luminance(&gray).data(), &[0.25, 0.75]);
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let f = ScalarField::constant(5, 4, 3.7).unwrap();
        assert!(gradient_magnitude(&f).unwrap().data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn unit_ramp_has_unit_gradient() {
        let f = ScalarField::from_fn(6, 3, |x, _| x as f64).unwrap();
        assert!(gradient_magnitude(&f).unwrap().data().iter().all(|&g| g == 1.0));
    }

    #[test]
    fn center_spike_matches_hand_stencil() {
        let h = 2.5;
        let f = ScalarField::from_fn(3, 3, |x, y| if (x, y) == (1, 1) { h } else { 0.0 }).unwrap();
        let g = gradient_magnitude(&f).unwrap();
        let expected = [0.0, h, 0.0, h, h * 2f64.sqrt(), h, 0.0, h, 0.0];
        for (a, b) in g.data().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let rows: Vec<Vec<f64>> = (0..3).map(|y| (0..3).map(|x| f.get(x, y)).collect()).collect();
        let o: Vec<f64> = oracle(&rows).concat();
        assert_eq!(g.data(), o.as_slice());
    }

    #[test]
    fn degenerate_fields_are_rejected() {
        assert!(gradient_magnitude(&ScalarField::constant(1, 5, 0.0).unwrap()).is_err());
        assert!(gradient_magnitude(&ScalarField::constant(5, 1, 0.0).unwrap()).is_err());
    }
}
