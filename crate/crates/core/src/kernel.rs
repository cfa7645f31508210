//! Generalized Poisson kernels `P_{α,r,β}(t) = Σ_{k≥1} e^{−αk^r} cos(kt − βπ/2)`
//! and their tails `P^{(n)}` (the same series started at `k = n`).
//!
//! Everything is computed for the scaled tail `Q = e^{αn^r}·P^{(n)}`, whose
//! leading coefficient is exactly one; the factor `e^{−αn^r}` travels in the
//! `log_scale` of a [`ScaledValue`].

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ClassParams, Index};
use crate::scalar::{pairwise_sum, Real};
use crate::scaled::ScaledValue;
use crate::specfun::{cos_norm, i_s};
use crate::trig::{lp_norm, sup_norm_certified_on, SupNorm, TrigPoly};

/// A scaled, truncated kernel tail: frequencies `n..=trunc_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct KernelSpec<T: Real> {
    pub params: ClassParams<T>,
    pub n: u64,
    pub trunc_k: u64,
    /// Certified bound on `Σ_{k>trunc_k} e^{−α(k^r − n^r)}`.
    pub tail_bound: T,
}

impl<T: Real> KernelSpec<T> {
    /// Truncates where the certified tail drops below `eps`.
    pub fn new(params: ClassParams<T>, n: u64, eps: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("kernel start index n must be >= 1"));
        }
        let (trunc_k, tail_bound) = truncation_index(&params, n, eps)?;
        Ok(Self {
            params,
            n,
            trunc_k,
            tail_bound,
        })
    }

    pub fn with_truncation(params: ClassParams<T>, n: u64, trunc_k: u64) -> Result<Self> {
        if n == 0 || trunc_k < n {
            return Err(Error::contract(format!("need 1 <= n <= trunc_k, got n={n}, trunc_k={trunc_k}")));
        }
        Ok(Self {
            params,
            n,
            trunc_k,
            tail_bound: tail_bound_at(&params, n, trunc_k),
        })
    }

    /// `−α n^r`.
    pub fn log_scale(&self) -> T {
        -self.params.alpha * T::from_count(self.n).powf(self.params.r)
    }
}

/// `e^{−α(k^r − n^r)}`, with the exponent difference formed without cancellation.
pub fn scaled_decay<T: Real>(params: &ClassParams<T>, n: u64, k: u64) -> T {
    let nf = T::from_count(n);
    let rel = (T::from_count(k) - nf) / nf;
    let diff = nf.powf(params.r) * (params.r * rel.ln_1p()).exp_m1();
    (-params.alpha * diff).exp()
}

/// Bound on the dropped scaled mass after index `k_cut`.
///
/// With `u = α(x^r − K^r)` and `m = (1−r)/r`, `x^{1−r} ≤ K^{1−r} e^{mu/(αK^r)}`, so
/// `∫_K^∞ e^{−αx^r}dx ≤ e^{−αK^r} K^{1−r} / (αr(1 − m/(αK^r)))`. The sum over
/// `k > K` is below the integral; one extra leading term is added on top.
/// Returns `+∞` until `αK^r > 2m`.
pub fn tail_bound_at<T: Real>(params: &ClassParams<T>, n: u64, k_cut: u64) -> T {
    let r = params.r;
    let m = (T::one() - r) / r;
    let kf = T::from_count(k_cut);
    let z = params.alpha * kf.powf(r);
    if z <= T::lit(2.0) * m {
        return T::infinity();
    }
    let lead = scaled_decay(params, n, k_cut);
    lead * (T::one() + kf.powf(T::one() - r) / (params.alpha_r() * (T::one() - m / z)))
}

/// Smallest `K ≥ n` whose certified tail bound is at most `eps`.
pub fn truncation_index<T: Real>(params: &ClassParams<T>, n: u64, eps: T) -> Result<(u64, T)> {
    if !(eps > T::zero()) {
        return Err(Error::domain(format!("truncation tolerance must be positive, got {eps}")));
    }
    let ok = |k: u64| tail_bound_at(params, n, k) <= eps;
    let mut lo = n;
    if ok(lo) {
        return Ok((lo, tail_bound_at(params, n, lo)));
    }
    let mut hi = n.max(1);
    while !ok(hi) {
        lo = hi;
        hi = hi
            .checked_mul(2)
            .filter(|&h| h < (1u64 << 50))
            .ok_or_else(|| Error::domain("kernel truncation index out of range"))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, tail_bound_at(params, n, hi)))
}

/// `c_j = e^{−α((n+j)^r − n^r)}`, `j = 0..=trunc_k − n`.
pub fn scaled_coefficients<T: Real>(spec: &KernelSpec<T>) -> Vec<T> {
    (spec.n..=spec.trunc_k)
        .map(|k| scaled_decay(&spec.params, spec.n, k))
        .collect()
}

/// `Q` as a trigonometric polynomial of degree `trunc_k`.
pub fn scaled_kernel_poly<T: Real>(spec: &KernelSpec<T>) -> TrigPoly<T> {
    let (c, s) = spec.params.phase();
    let mut q = TrigPoly::zero(spec.trunc_k as usize);
    for (j, cj) in scaled_coefficients(spec).into_iter().enumerate() {
        let k = spec.n as usize + j;
        q.cos[k - 1] = cj * c;
        q.sin[k - 1] = cj * s;
    }
    q
}

/// `Q(2πi/N)` for `i = 0..N`.
pub fn eval_scaled_kernel_grid<T: Real>(spec: &KernelSpec<T>, grid_size: usize) -> Result<Vec<T>> {
    let k = spec.trunc_k as usize;
    if grid_size < 2 * k + 1 {
        return Err(Error::Aliasing {
            grid: grid_size,
            degree: k,
        });
    }
    Ok(scaled_kernel_poly(spec).samples(grid_size))
}

/// Certified `‖Q‖_∞` enclosure (unscaled units of `Q`), widened by the tail bound.
pub fn scaled_kernel_sup<T: Real>(spec: &KernelSpec<T>) -> SupNorm<T> {
    let q = scaled_kernel_poly(spec);
    let mut s = sup_norm_certified_on(&q, 16 * spec.trunc_k as usize);
    s.radius += spec.tail_bound;
    s
}

/// `(1/π)‖P^{(n)}‖_s` as a scaled value with `log_scale = −αn^r` before
/// normalization.
pub fn kernel_norm<T: Real>(spec: &KernelSpec<T>, s: Index<T>, tol: T) -> Result<ScaledValue<T>> {
    let q = scaled_kernel_poly(spec);
    let norm = match s.validated()? {
        Index::Inf => sup_norm_certified_on(&q, 16 * spec.trunc_k as usize).value,
        finite => lp_norm(&q, finite, tol)?,
    };
    Ok(ScaledValue::new(norm / T::PI(), spec.log_scale()))
}

/// Leading term and remainder bracket of the kernel-norm asymptotics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormAsymptotics<T: Real> {
    pub main: ScaledValue<T>,
    pub bracket: ScaledValue<T>,
}

/// `main = e^{−αn^r} n^{(1−r)/s′} ‖cos‖_s I_s(v) / (π^{1+1/s} (αr)^{1/s′})` and
/// `bracket = e^{−αn^r} n^{(1−r)/s′} (I_s(v) n^{−r}/(αr)^{1+1/s′} + n^{−(1−r)/s′})`,
/// `v = π n^{1−r}/(αr)`.
pub fn kernel_norm_asymptotic<T: Real>(spec: &KernelSpec<T>, s: Index<T>) -> Result<NormAsymptotics<T>> {
    let s = s.validated()?;
    let p = &spec.params;
    let (r, ar) = (p.r, p.alpha_r());
    let nf = T::from_count(spec.n);
    let inv_sp = s.conjugate()?.reciprocal();
    let inv_s = s.reciprocal();
    let v = T::PI() * nf.powf(T::one() - r) / ar;
    let is = i_s(s, v)?;
    let pre = nf.powf((T::one() - r) * inv_sp);
    let main = pre * cos_norm(s)? * is / (T::PI().powf(T::one() + inv_s) * ar.powf(inv_sp));
    let bracket = pre * (is * nf.powf(-r) / ar.powf(T::one() + inv_sp) + nf.powf(-(T::one() - r) * inv_sp));
    let ls = spec.log_scale();
    Ok(NormAsymptotics {
        main: ScaledValue::new(main, ls),
        bracket: ScaledValue::new(bracket, ls),
    })
}

/// Experimental envelope approximation of `(1/π)‖P^{(n)}‖_s` for large `n`.
///
/// Writes `Q(t) = Re(e^{i(nt − βπ/2)} A(t))` with `A(t) = Σ_j c_j e^{ijt}` and
/// replaces `|cos|^s` over each fast period by its mean, so that
/// `∫|Q|^s ≈ (‖cos‖_s^s / 2π) ∫|A|^s`. Exact for `s = 2`; the cost depends on
/// the envelope bandwidth `trunc_k − n`, not on `n`.
pub fn kernel_norm_envelope<T: Real>(spec: &KernelSpec<T>, s: Index<T>, tol: T) -> Result<ScaledValue<T>> {
    let coeffs = scaled_coefficients(spec);
    let envelope_abs = |m: usize| -> Vec<T> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
        for (j, &c) in coeffs.iter().enumerate() {
            buf[j % m].re += c;
        }
        T::fft_inverse(&mut buf);
        buf.into_iter().map(|z| z.norm()).collect()
    };
    let mut m = (4 * coeffs.len()).next_power_of_two().max(64);
    let value = match s.validated()? {
        Index::Inf => envelope_abs(m).into_iter().fold(T::zero(), T::max),
        Index::Finite(sv) => {
            let integral = |m: usize| {
                let pw: Vec<T> = envelope_abs(m).into_iter().map(|a| a.powf(sv)).collect();
                T::TAU() / T::from_count(m as u64) * pairwise_sum(&pw)
            };
            let mut prev = integral(m);
            let settled = loop {
                m *= 2;
                let cur = integral(m);
                if (cur - prev).abs() <= tol * cur {
                    break cur;
                }
                if m >= 1 << 24 {
                    return Err(Error::Accuracy {
                        context: "envelope quadrature did not settle".into(),
                        estimate: cur.as_f64(),
                    });
                }
                prev = cur;
            };
            let cn = cos_norm(s)?;
            (cn.powf(sv) / T::TAU() * settled).powf(sv.recip())
        }
    };
    Ok(ScaledValue::new(value / T::PI(), spec.log_scale()))
}
