//! Small dense and matrix-free solvers for symmetric positive definite systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves `A x = b` for SPD `A` (row-major, `m × m`) by Cholesky.
///
/// If the factorization breaks down, a diagonal shift of growing size is
/// applied (up to `1e-6` of the largest diagonal entry).
pub fn cholesky_solve<T: Real>(a: &[T], m: usize, b: &[T]) -> Result<Vec<T>> {
    debug_assert_eq!(a.len(), m * m);
    let max_diag = (0..m).map(|i| a[i * m + i].abs()).fold(T::zero(), T::max);
    let mut shift = T::zero();
    for attempt in 0..8 {
        if let Some(l) = cholesky(a, m, shift) {
            return Ok(substitute(&l, m, b));
        }
        shift = max_diag * T::lit(1e-14) * T::lit(10.0).powi(attempt);
    }
    Err(Error::Accuracy {
        context: "normal matrix is not positive definite".into(),
        estimate: f64::NAN,
    })
}

fn cholesky<T: Real>(a: &[T], m: usize, shift: T) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); m * m];
    for j in 0..m {
        for k in 0..=j {
            let (rj, rk) = (&l[j * m..j * m + k], &l[k * m..k * m + k]);
            let dot: T = rj.iter().zip(rk).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
            if k == j {
                let d = a[j * m + j] + shift - dot;
                if !(d > T::zero()) {
                    return None;
                }
                l[j * m + j] = d.sqrt();
            } else {
                l[j * m + k] = (a[j * m + k] - dot) / l[k * m + k];
            }
        }
    }
    Some(l)
}

fn substitute<T: Real>(l: &[T], m: usize, b: &[T]) -> Vec<T> {
    let mut y = b.to_vec();
    for i in 0..m {
        let dot: T = (0..i).fold(T::zero(), |acc, k| acc + l[i * m + k] * y[k]);
        y[i] = (y[i] - dot) / l[i * m + i];
    }
    for i in (0..m).rev() {
        let dot: T = ((i + 1)..m).fold(T::zero(), |acc, k| acc + l[k * m + i] * y[k]);
        y[i] = (y[i] - dot) / l[i * m + i];
    }
    y
}

/// Jacobi-preconditioned conjugate gradients, warm-started at `x0`.
/// Stops when `‖r‖ ≤ rel_tol·‖b‖` or after `max_iter` steps.
pub fn conjugate_gradient<T: Real, F: Fn(&[T]) -> Vec<T>>(
    apply: F,
    diag: &[T],
    b: &[T],
    x0: &[T],
    rel_tol: T,
    max_iter: usize,
) -> Vec<T> {
    let dot = |u: &[T], v: &[T]| u.iter().zip(v).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    let precond = |r: &[T]| -> Vec<T> {
        r.iter()
            .zip(diag)
            .map(|(&ri, &d)| if d > T::zero() { ri / d } else { ri })
            .collect()
    };
    let mut x = x0.to_vec();
    let ax = apply(&x);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &a)| bi - a).collect();
    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        return vec![T::zero(); b.len()];
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= rel_tol * bnorm {
            break;
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let step = rz / pap;
        for i in 0..x.len() {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(m: usize) -> Vec<f64> {
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = 1.0 / (1.0 + (i as f64 - j as f64).abs());
            }
            a[i * m + i] += m as f64;
        }
        a
    }

    #[test]
    fn cholesky_and_cg_agree() {
        let m = 12;
        let a = spd(m);
        let b: Vec<f64> = (0..m).map(|i| (i as f64).sin()).collect();
        let x = cholesky_solve(&a, m, &b).unwrap();
        for i in 0..m {
            let ax: f64 = (0..m).map(|j| a[i * m + j] * x[j]).sum();
            assert!((ax - b[i]).abs() < 1e-12);
        }
        let apply = |v: &[f64]| (0..m).map(|i| (0..m).map(|j| a[i * m + j] * v[j]).sum()).collect();
        let diag: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
        let y = conjugate_gradient(apply, &diag, &b, &vec![0.0; m], 1e-14, 100);
        for i in 0..m {
            assert!((x[i] - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_solve(&a, 2, &[1.0, 1.0]).is_err());
    }
}
