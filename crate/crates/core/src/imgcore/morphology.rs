//! Sliding-window maximum and binary erosion/dilation.
//!
//! Windows are clipped at the image border: no padding values are invented.

use super::{BinaryMask, ScalarField};
use crate::{Error, Result};

/// Window offsets `(-before, +after)` for a window of `size` pixels. Even
/// sizes put the extra pixel on the positive side.
fn window_extent(size: usize) -> (usize, usize) {
    ((size - 1) / 2, size / 2)
}

/// Runs a clipped 1-D window reduction along rows (`horizontal`) or columns.
fn reduce_1d<T: Copy>(
    data: &[T],
    (w, h): (usize, usize),
    size: usize,
    horizontal: bool,
    reduce: impl Fn(T, T) -> T,
) -> Vec<T> {
    let (before, after) = window_extent(size);
    let mut out = data.to_vec();
    let (len, lines) = if horizontal { (w, h) } else { (h, w) };
    let index = |line: usize, pos: usize| {
        if horizontal {
            line * w + pos
        } else {
            pos * w + line
        }
    };
    for line in 0..lines {
        for pos in 0..len {
            let lo = pos.saturating_sub(before);
            let hi = (pos + after).min(len - 1);
            let mut acc = data[index(line, lo)];
            for p in lo + 1..=hi {
                acc = reduce(acc, data[index(line, p)]);
            }
            out[index(line, pos)] = acc;
        }
    }
    out
}

/// Maximum of `f` over a `size`x`size` window at every pixel.
pub fn max_filter(f: &ScalarField, size: usize) -> Result<ScalarField> {
    if size == 0 {
        return Err(Error::InvalidParameter("max filter size must be >= 1".into()));
    }
    let rows = reduce_1d(f.data(), f.dims(), size, true, f64::max);
    let out = reduce_1d(&rows, f.dims(), size, false, f64::max);
    ScalarField::new(f.width(), f.height(), out)
}

/// Iterated erosion with the full 3x3 structuring element. Pixels outside
/// the image count as false, so true regions shrink at the border.
pub fn binary_erosion(m: &BinaryMask, iterations: usize) -> BinaryMask {
    let (w, h) = m.dims();
    let mut cur = m.clone();
    for _ in 0..iterations {
        if cur.count() == 0 {
            break;
        }
        let prev = cur.clone();
        cur = BinaryMask::from_fn(w, h, |x, y| {
            if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
                return false;
            }
            (y - 1..=y + 1).all(|yy| (x - 1..=x + 1).all(|xx| prev.get(xx, yy)))
        });
    }
    cur
}

/// A pixel is true iff any pixel of `m` in its `window`x`window`
/// neighbourhood is true.
pub fn binary_dilation(m: &BinaryMask, window: usize) -> Result<BinaryMask> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "dilation window must be odd and >= 1, got {window}"
        )));
    }
    let rows = reduce_1d(m.data(), m.dims(), window, true, |a, b| a || b);
    let out = reduce_1d(&rows, m.dims(), window, false, |a, b| a || b);
    BinaryMask::new(m.width(), m.height(), out)
}
