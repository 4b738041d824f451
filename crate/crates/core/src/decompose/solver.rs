//! Matrix-free preconditioned conjugate gradients on the grid normal
//! equations of the Retinex energy.
//!
//! Setting the gradient of the energy to zero gives `A s = b` with
//! `A = sum (1 + w_pq) e_pq e_pq^T` and `b = sum w_pq (i_p - i_q) e_pq`,
//! where `e_pq = e_p - e_q`. `A` is a weighted graph Laplacian: symmetric,
//! positive semi-definite, with the constant vector as its null space
//! (the unit shading term connects the whole grid). `b` is orthogonal to
//! constants, so the system is consistent.

use super::weights::PairWeights;
use crate::imgcore::{ensure_same_dims, ScalarField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn apply(weights: &PairWeights, x: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (p, q, om) in weights.edges() {
        let c = (1.0 + om) * (x[p] - x[q]);
        out[p] += c;
        out[q] -= c;
    }
}

/// Right-hand side `b` of the normal equations.
pub fn rhs(log_lum: &ScalarField, weights: &PairWeights) -> Vec<f64> {
    let i = log_lum.data();
    let mut b = vec![0.0; i.len()];
    for (p, q, om) in weights.edges() {
        let c = om * (i[p] - i[q]);
        b[p] += c;
        b[q] -= c;
    }
    b
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn subtract_mean(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Minimises the energy over log shading, returning the zero-mean solution.
///
/// Stops when `||b - A s|| <= tolerance * ||b||`; fails with
/// [`Error::NotConverged`] after `max_iterations`.
pub fn solve_log_shading(
    log_lum: &ScalarField,
    weights: &PairWeights,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(ScalarField, SolveStats)> {
    ensure_same_dims(log_lum.dims(), weights.dims())?;
    let (w, h) = log_lum.dims();
    let n = w * h;
    let b = rhs(log_lum, weights);
    let b_norm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        let stats = SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        };
        return Ok((ScalarField::new(w, h, x)?, stats));
    }

    let mut diag = vec![0.0; n];
    for (p, q, om) in weights.edges() {
        diag[p] += 1.0 + om;
        diag[q] += 1.0 + om;
    }
    let inv_diag: Vec<f64> = diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect();

    let mut r = b;
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = 1.0;

    for it in 1..=max_iterations {
        apply(weights, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // Search direction collapsed into the null space.
            break;
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        residual = dot(&r, &r).sqrt() / b_norm;
        if residual <= tolerance {
            subtract_mean(&mut x);
            let stats = SolveStats {
                iterations: it,
                relative_residual: residual,
            };
            return Ok((ScalarField::new(w, h, x)?, stats));
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_is_solved_immediately() {
        let i = ScalarField::from_fn(4, 4, |x, _| x as f64).unwrap();
        let w = PairWeights::from_fn(4, 4, |_, _| 0.0);
        let (s, stats) = solve_log_shading(&i, &w, 1e-8, 10).unwrap();
        assert_eq!(stats.iterations, 0);
        assert!(s.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let i = ScalarField::from_fn(12, 12, |x, y| ((x * 7 + y * 3) % 5) as f64 * 0.3).unwrap();
        let w = PairWeights::from_fn(12, 12, |p, _| if p % 3 == 0 { 0.0 } else { 100.0 });
        match solve_log_shading(&i, &w, 1e-14, 2) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0 && residual.is_finite());
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn uniform_weight_splits_each_step() {
        // Single edge: minimise d^2 + w (delta - d)^2 -> d = w delta / (1 + w).
        let i = ScalarField::new(2, 1, vec![0.0, 1.0]).unwrap();
        let w = PairWeights::from_fn(2, 1, |_, _| 100.0);
        let (s, _) = solve_log_shading(&i, &w, 1e-12, 20).unwrap();
        let d = s.data()[0] - s.data()[1];
        assert!((d - (-100.0 / 101.0)).abs() < 1e-12);
        assert!((s.data()[0] + s.data()[1]).abs() < 1e-15);
    }
}
