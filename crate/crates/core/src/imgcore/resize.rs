use super::{BinaryMask, LinearImage, ScalarField};
use crate::{Error, Result};

/// Output size for fitting `(width, height)` inside `max_dim`, keeping the
/// aspect ratio. The long side becomes exactly `max_dim`; images already
/// within the bound keep their size.
pub fn fit_dims(width: usize, height: usize, max_dim: usize) -> (usize, usize) {
    let long = width.max(height);
    if long <= max_dim || long == 0 {
        return (width, height);
    }
    let scale = max_dim as f64 / long as f64;
    let scaled = |v: usize| {
        if v == long {
            max_dim
        } else {
            ((v as f64 * scale).round() as usize).clamp(1, max_dim)
        }
    };
    (scaled(width), scaled(height))
}

/// Source coordinate sampled by output index `i` under pixel-centre alignment.
fn source_coord(i: usize, src_len: usize, dst_len: usize) -> (usize, usize, f64) {
    let s = ((i as f64 + 0.5) * src_len as f64 / dst_len as f64 - 0.5).clamp(0.0, (src_len - 1) as f64);
    let i0 = s.floor() as usize;
    let i1 = (i0 + 1).min(src_len - 1);
    (i0, i1, s - i0 as f64)
}

/// Bilinear resampling of interleaved `channels`-wide pixel data.
pub(crate) fn bilinear(
    data: &[f64],
    (w, h): (usize, usize),
    channels: usize,
    (nw, nh): (usize, usize),
) -> Vec<f64> {
    let mut out = Vec::with_capacity(nw * nh * channels);
    for y in 0..nh {
        let (y0, y1, fy) = source_coord(y, h, nh);
        for x in 0..nw {
            let (x0, x1, fx) = source_coord(x, w, nw);
            for c in 0..channels {
                let at = |xx: usize, yy: usize| data[(yy * w + xx) * channels + c];
                let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
                let top = lerp(at(x0, y0), at(x1, y0), fx);
                let bottom = lerp(at(x0, y1), at(x1, y1), fx);
                out.push(lerp(top, bottom, fy));
            }
        }
    }
    out
}

fn check_max_dim(max_dim: usize) -> Result<()> {
    if max_dim == 0 {
        return Err(Error::InvalidParameter("max_dim must be >= 1".into()));
    }
    Ok(())
}

/// Bilinear downscale so that the larger dimension is at most `max_dim`.
pub fn resize_max_dim(img: &LinearImage, max_dim: usize) -> Result<LinearImage> {
    check_max_dim(max_dim)?;
    let dims = fit_dims(img.width(), img.height(), max_dim);
    if dims == img.dims() {
        return Ok(img.clone());
    }
    let data = bilinear(img.data(), img.dims(), img.channels(), dims);
    LinearImage::new(dims.0, dims.1, img.channels(), data)
}

pub fn resize_field_max_dim(f: &ScalarField, max_dim: usize) -> Result<ScalarField> {
    check_max_dim(max_dim)?;
    let dims = fit_dims(f.width(), f.height(), max_dim);
    if dims == f.dims() {
        return Ok(f.clone());
    }
    ScalarField::new(dims.0, dims.1, bilinear(f.data(), f.dims(), 1, dims))
}

/// Bilinear resample of a field to exactly `dims`.
pub fn resize_field_to(f: &ScalarField, dims: (usize, usize)) -> Result<ScalarField> {
    if dims == f.dims() {
        return Ok(f.clone());
    }
    ScalarField::new(dims.0, dims.1, bilinear(f.data(), f.dims(), 1, dims))
}

/// Nearest-neighbour resample of a mask to exactly `(nw, nh)`.
pub fn resize_mask_to(m: &BinaryMask, (nw, nh): (usize, usize)) -> BinaryMask {
    if (nw, nh) == m.dims() {
        return m.clone();
    }
    let pick = |i: usize, src: usize, dst: usize| (((i as f64 + 0.5) * src as f64 / dst as f64) as usize).min(src - 1);
    BinaryMask::from_fn(nw, nh, |x, y| m.get(pick(x, m.width(), nw), pick(y, m.height(), nh)))
}

/// Nearest-neighbour downscale for masks.
pub fn resize_mask_max_dim(m: &BinaryMask, max_dim: usize) -> Result<BinaryMask> {
    check_max_dim(max_dim)?;
    Ok(resize_mask_to(m, fit_dims(m.width(), m.height(), max_dim)))
}
