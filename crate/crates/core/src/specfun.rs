//! Special functions: Gamma, Pochhammer symbols, Gauss's hypergeometric
//! function at unit argument, the integral `I_s(υ)` and `L_s` norms of cosine.

use crate::error::{Error, Result};
use crate::params::Index;
use crate::quad::adaptive_simpson;
use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x.fract() == T::zero()
}

/// Lanczos series `A(x)` for `Γ(x+1) = √(2π) t^{x+1/2} e^{-t} A(x)`, `t = x + g + 1/2`.
fn lanczos_sum<T: Real>(x: T) -> T {
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_count(i as u64));
    }
    acc
}

/// `Γ(x)` by the Lanczos approximation (g = 7, 9 terms) with reflection for
/// `x < 1/2`. Returns NaN at the poles.
pub fn gamma<T: Real>(x: T) -> T {
    if is_nonpositive_integer(x) {
        return T::nan();
    }
    let half = T::lit(0.5);
    if x < half {
        return T::PI() / ((T::PI() * x).sin() * gamma(T::one() - x));
    }
    if x > T::lit(140.0) {
        let (lg, _) = ln_gamma_signed(x);
        return lg.exp();
    }
    let xm = x - T::one();
    let t = xm + T::lit(LANCZOS_G) + half;
    (T::TAU()).sqrt() * t.powf(xm + half) * (-t).exp() * lanczos_sum(xm)
}

/// `(ln|Γ(x)|, sign Γ(x))`. At the poles returns `(+∞, 0)`.
pub fn ln_gamma_signed<T: Real>(x: T) -> (T, T) {
    if is_nonpositive_integer(x) {
        return (T::infinity(), T::zero());
    }
    let half = T::lit(0.5);
    if x < half {
        let s = (T::PI() * x).sin();
        let (lg, _) = ln_gamma_signed(T::one() - x);
        return (T::PI().ln() - s.abs().ln() - lg, s.signum());
    }
    let xm = x - T::one();
    let t = xm + T::lit(LANCZOS_G) + half;
    let lg = half * T::TAU().ln() + (xm + half) * t.ln() - t + lanczos_sum(xm).ln();
    (lg, T::one())
}

/// Rising factorial `x(x+1)···(x+k−1)`; `1` for `k = 0`.
pub fn pochhammer<T: Real>(x: T, k: u32) -> T {
    (0..k).fold(T::one(), |acc, i| acc * (x + T::from_count(i as u64)))
}

fn check_unit_args<T: Real>(a: T, b: T, c: T) -> Result<()> {
    if is_nonpositive_integer(c) {
        return Err(Error::domain(format!("c = {c} is a pole of Γ")));
    }
    let s = c - a - b;
    if !(s > T::zero()) {
        return Err(Error::Divergence(format!(
            "F(a,b;c;1) requires c - a - b > 0, got {s}"
        )));
    }
    Ok(())
}

/// `F(a,b;c;1) = Γ(c)Γ(c−a−b) / (Γ(c−a)Γ(c−b))` (Gauss's summation theorem).
pub fn gauss_2f1_unit<T: Real>(a: T, b: T, c: T) -> Result<T> {
    check_unit_args(a, b, c)?;
    let (ca, cb, s) = (c - a, c - b, c - a - b);
    // 1/Γ vanishes at the poles: the series terminates with sum zero.
    if is_nonpositive_integer(ca) || is_nonpositive_integer(cb) {
        return Ok(T::zero());
    }
    let small = T::lit(100.0);
    if [c, ca, cb, s].iter().all(|v| v.abs() < small) {
        return Ok(gamma(c) * gamma(s) / (gamma(ca) * gamma(cb)));
    }
    let (l1, s1) = ln_gamma_signed(c);
    let (l2, s2) = ln_gamma_signed(s);
    let (l3, s3) = ln_gamma_signed(ca);
    let (l4, s4) = ln_gamma_signed(cb);
    Ok(s1 * s2 * s3 * s4 * (l1 + l2 - l3 - l4).exp())
}

/// Direct summation of the `F(a,b;c;1)` series.
///
/// Terms are accumulated until they fall below `rel_stop` of the partial sum
/// (once they are monotonically decreasing); the remaining tail, whose terms
/// behave like `k^{-1-(c-a-b)}`, is added by a midpoint integral estimate.
pub fn gauss_2f1_unit_series<T: Real>(a: T, b: T, c: T, rel_stop: T) -> Result<T> {
    check_unit_args(a, b, c)?;
    const MAX_TERMS: u64 = 200_000_000;
    let s = c - a - b;
    let mut sum = T::zero();
    let mut term = T::one();
    let mut k = 0u64;
    loop {
        sum += term;
        let kk = T::from_count(k);
        let ratio = (a + kk) * (b + kk) / ((c + kk) * (kk + T::one()));
        term *= ratio;
        k += 1;
        if term == T::zero() {
            return Ok(sum);
        }
        if ratio.abs() < T::one() && term.abs() < rel_stop * sum.abs() {
            break;
        }
        if k >= MAX_TERMS {
            return Err(Error::Accuracy {
                context: "hypergeometric series did not reach its stopping rule".into(),
                estimate: sum.as_f64(),
            });
        }
    }
    // `term` is the first omitted term, index k.
    let kk = T::from_count(k);
    let half = T::lit(0.5);
    let tail = term * kk.powf(T::one() + s) * (kk - half).powf(-s) / s;
    Ok(sum + tail)
}

/// `F(1/2, (3−p′)/2; 3/2; 1)^{1/p′}`, the constant in the main term.
pub fn theorem_main_f<T: Real>(pprime: T) -> Result<T> {
    if !(pprime > T::one() && pprime.is_finite()) {
        return Err(Error::domain(format!("p' must be finite and > 1, got {pprime}")));
    }
    let half = T::lit(0.5);
    let f = gauss_2f1_unit(half, (T::lit(3.0) - pprime) * half, T::lit(1.5))?;
    Ok(f.powf(pprime.recip()))
}

/// `I_s(υ) = ‖(1+t²)^{-1/2}‖_{L_s[0,υ]}`.
pub fn i_s<T: Real>(s: Index<T>, v: T) -> Result<T> {
    let s = s.validated()?;
    if !(v >= T::zero()) {
        return Err(Error::domain(format!("I_s requires v >= 0, got {v}")));
    }
    let s = match s {
        Index::Inf => return Ok(if v > T::zero() { T::one() } else { T::zero() }),
        Index::Finite(s) => s,
    };
    if v == T::zero() {
        return Ok(T::zero());
    }
    let exponent = -s / T::lit(2.0);
    let integrand = |t: T| (T::one() + t * t).powf(exponent);
    let rel = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    // Geometric panels [0,1], [1,2], [2,4], ... keep each piece well scaled.
    let mut total = T::zero();
    let mut lo = T::zero();
    let mut hi = T::one().min(v);
    loop {
        total += adaptive_simpson(integrand, lo, hi, T::zero(), rel)?;
        if hi >= v {
            break;
        }
        lo = hi;
        hi = (hi * T::lit(2.0)).min(v);
    }
    Ok(total.powf(s.recip()))
}

/// `‖cos‖_{L_s[0,2π]}`.
pub fn cos_norm<T: Real>(s: Index<T>) -> Result<T> {
    match s.validated()? {
        Index::Inf => Ok(T::one()),
        Index::Finite(s) => {
            let rel = T::lit(1e-13).max(T::epsilon() * T::lit(16.0));
            let quarter =
                adaptive_simpson(|t: T| t.cos().max(T::zero()).powf(s), T::zero(), T::FRAC_PI_2(), T::zero(), rel)?;
            Ok((T::lit(4.0) * quarter).powf(s.recip()))
        }
    }
}
