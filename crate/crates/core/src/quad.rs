//! Adaptive Simpson quadrature for smooth, non-oscillatory integrands.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_DEPTH: u32 = 48;

/// `∫_a^b f` to within `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    // A coarse 8-panel estimate sets the relative scale.
    let scale = {
        let h = (b - a) / T::lit(8.0);
        let mut s = T::zero();
        for i in 0..8 {
            let x0 = a + h * T::from_count(i);
            let x1 = x0 + h;
            s += simpson(x0, x1, f(x0), f((x0 + x1) / two), f(x1));
        }
        s.abs()
    };
    let tol = abs_tol.max(rel_tol * scale);
    let mut failed = false;
    let v = recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut failed);
    if failed || !v.is_finite() {
        return Err(Error::Accuracy {
            context: "adaptive Simpson reached maximum depth".into(),
            estimate: v.as_f64(),
        });
    }
    Ok(v)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
    failed: &mut bool,
) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let fifteen = T::lit(15.0);
    if delta.abs() <= fifteen * tol || depth == 0 || (m - a).abs() <= T::epsilon() * m.abs() {
        if depth == 0 && delta.abs() > fifteen * tol {
            *failed = true;
        }
        return left + right + delta / fifteen;
    }
    recurse(f, a, m, fa, flm, fm, left, tol / two, depth - 1, failed)
        + recurse(f, m, b, fm, frm, fb, right, tol / two, depth - 1, failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_and_exponentials() {
        let v = adaptive_simpson(|x: f64| x * x, 0.0, 3.0, 1e-14, 1e-14).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let v = adaptive_simpson(|x: f64| x.exp(), 0.0, 1.0, 0.0, 1e-12).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(adaptive_simpson(|x: f64| x, 2.0, 2.0, 1e-12, 1e-12).unwrap(), 0.0);
    }
}
