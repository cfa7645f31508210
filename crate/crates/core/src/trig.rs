//! Finite trigonometric polynomials on `[0, 2π)`: evaluation, grid synthesis,
//! Fourier partial sums, convolution, `L_p` norms and certified sup-norms.
//!
//! A polynomial is `a0/2 + Σ_{k=1}^{d} (a_k cos kt + b_k sin kt)`.

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{scaled_decay, KernelSpec};
use crate::params::Index;
use crate::scalar::{pairwise_sum, Real};

/// Resynchronise the angle-addition recurrence every this many steps.
const RESYNC: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrigPoly<T: Real> {
    /// Constant term; the polynomial's mean is `a0/2`.
    pub a0: T,
    /// `a_k` stored at index `k - 1`.
    #[serde(rename = "cos")]
    pub cos: Vec<T>,
    /// `b_k` stored at index `k - 1`.
    #[serde(rename = "sin")]
    pub sin: Vec<T>,
}

impl<T: Real> TrigPoly<T> {
    pub fn new(a0: T, cos: Vec<T>, sin: Vec<T>) -> Result<Self> {
        if cos.len() != sin.len() {
            return Err(Error::contract(format!(
                "cosine and sine coefficient counts differ ({} vs {})",
                cos.len(),
                sin.len()
            )));
        }
        Ok(Self { a0, cos, sin })
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            a0: T::zero(),
            cos: vec![T::zero(); degree],
            sin: vec![T::zero(); degree],
        }
    }

    /// `amp · cos(kt)`.
    pub fn cosine(k: usize, amp: T) -> Self {
        let mut p = Self::zero(k);
        if k == 0 {
            p.a0 = amp * T::lit(2.0);
        } else {
            p.cos[k - 1] = amp;
        }
        p
    }

    /// `amp · sin(kt)`.
    pub fn sine(k: usize, amp: T) -> Self {
        let mut p = Self::zero(k);
        if k > 0 {
            p.sin[k - 1] = amp;
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    /// Highest frequency with a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        (1..=self.degree())
            .rev()
            .find(|&k| self.cos[k - 1] != T::zero() || self.sin[k - 1] != T::zero())
            .unwrap_or(0)
    }

    /// Lowest nonzero frequency ≥ 1, if any.
    pub fn lowest_frequency(&self) -> Option<usize> {
        (1..=self.degree()).find(|&k| self.cos[k - 1] != T::zero() || self.sin[k - 1] != T::zero())
    }

    pub fn is_zero_mean(&self) -> bool {
        self.a0 == T::zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a0 == T::zero() && self.effective_degree() == 0
    }

    /// `(a_k, b_k)`; for `k = 0` returns `(a0, 0)`.
    pub fn coefficient(&self, k: usize) -> (T, T) {
        match k {
            0 => (self.a0, T::zero()),
            k if k <= self.degree() => (self.cos[k - 1], self.sin[k - 1]),
            _ => (T::zero(), T::zero()),
        }
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.cos.resize(degree, T::zero());
        self.sin.resize(degree, T::zero());
        self
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            a0: self.a0 * c,
            cos: self.cos.iter().map(|&v| v * c).collect(),
            sin: self.sin.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.degree().max(other.degree());
        let mut out = self.clone().with_degree(d);
        out.a0 += other.a0;
        for k in 0..other.degree() {
            out.cos[k] += other.cos[k];
            out.sin[k] += other.sin[k];
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-T::one()))
    }

    /// `f(· + h)`.
    pub fn shifted(&self, h: T) -> Self {
        let mut out = self.clone();
        for k in 1..=self.degree() {
            let (s, c) = (T::from_count(k as u64) * h).sin_cos();
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            out.cos[k - 1] = a * c + b * s;
            out.sin[k - 1] = b * c - a * s;
        }
        out
    }

    /// Calls `visit(k, cos kx, sin kx)` for `k = 1..=degree`.
    fn for_each_harmonic(&self, x: T, mut visit: impl FnMut(usize, T, T)) {
        let (s1, c1) = x.sin_cos();
        let (mut c, mut s) = (T::one(), T::zero());
        for k in 1..=self.degree() {
            if k % RESYNC == 0 {
                let (sk, ck) = (T::from_count(k as u64) * x).sin_cos();
                s = sk;
                c = ck;
            } else {
                let nc = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = nc;
            }
            visit(k, c, s);
        }
    }

    pub fn eval(&self, x: T) -> T {
        let mut acc = self.a0 / T::lit(2.0);
        self.for_each_harmonic(x, |k, c, s| acc += self.cos[k - 1] * c + self.sin[k - 1] * s);
        acc
    }

    /// `(f(x), f′(x))`.
    pub fn eval_with_derivative(&self, x: T) -> (T, T) {
        let mut f = self.a0 / T::lit(2.0);
        let mut df = T::zero();
        self.for_each_harmonic(x, |k, c, s| {
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            f += a * c + b * s;
            df += T::from_count(k as u64) * (b * c - a * s);
        });
        (f, df)
    }

    /// Antiderivative `a0·x/2 + Σ (a_k sin kx − b_k cos kx)/k`.
    pub fn antiderivative(&self, x: T) -> T {
        let mut acc = self.a0 * x / T::lit(2.0);
        self.for_each_harmonic(x, |k, c, s| {
            acc += (self.cos[k - 1] * s - self.sin[k - 1] * c) / T::from_count(k as u64);
        });
        acc
    }

    /// `Σ k^order (|a_k| + |b_k|)`, a bound on `‖f^{(order)}‖_∞`.
    pub fn derivative_bound(&self, order: i32) -> T {
        (1..=self.degree())
            .map(|k| T::from_count(k as u64).powi(order) * (self.cos[k - 1].abs() + self.sin[k - 1].abs()))
            .sum()
    }

    /// `∫_0^{2π} f·g` from coefficients.
    pub fn inner(&self, other: &Self) -> T {
        let d = self.degree().min(other.degree());
        let mut acc = self.a0 * other.a0 / T::lit(2.0);
        for k in 0..d {
            acc += self.cos[k] * other.cos[k] + self.sin[k] * other.sin[k];
        }
        acc * T::PI()
    }

    /// Samples `f(2πj/n)`, `j = 0..n`. Exact for any degree: frequencies are
    /// folded modulo `n`, which leaves point values unchanged.
    pub fn samples(&self, n: usize) -> Vec<T> {
        assert!(n > 0, "sample count must be positive");
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        buf[0].re = self.a0 / T::lit(2.0);
        for k in 1..=self.degree() {
            buf[k % n] += Complex::new(self.cos[k - 1], -self.sin[k - 1]);
        }
        T::fft_inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Values on the uniform grid of `n` points (power of two, `n ≥ 2·degree + 2`).
    pub fn eval_grid(&self, n: usize) -> Result<GridFunction<T>> {
        if n < 2 * self.degree() + 2 {
            return Err(Error::Aliasing {
                grid: n,
                degree: self.degree(),
            });
        }
        GridFunction::new(self.samples(n))
    }
}

/// Samples on the uniform grid `t_i = 2πi/N`, `N` a power of two.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Real> {
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::contract(format!(
                "grid size {} is not a power of two",
                values.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, i: usize) -> T {
        T::TAU() * T::from_count(i as u64) / T::from_count(self.len() as u64)
    }

    /// Trigonometric interpolant truncated to `degree < N/2`.
    pub fn analyze(&self, degree: usize) -> Result<TrigPoly<T>> {
        Ok(analyze_samples(&self.values, degree)?)
    }

    /// Trapezoid-rule `L_p` norm of the samples.
    pub fn lp_norm(&self, p: Index<T>) -> T {
        lp_norm_samples(&self.values, p)
    }
}

pub(crate) fn analyze_samples<T: Real>(values: &[T], degree: usize) -> Result<TrigPoly<T>> {
    let n = values.len();
    if 2 * degree >= n {
        return Err(Error::Aliasing { grid: n, degree });
    }
    let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
    T::fft_forward(&mut buf);
    let scale = T::lit(2.0) / T::from_count(n as u64);
    Ok(TrigPoly {
        a0: buf[0].re * scale,
        cos: (1..=degree).map(|k| buf[k].re * scale).collect(),
        sin: (1..=degree).map(|k| -buf[k].im * scale).collect(),
    })
}

pub(crate) fn lp_norm_samples<T: Real>(values: &[T], p: Index<T>) -> T {
    match p {
        Index::Inf => values.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        Index::Finite(p) => {
            let h = T::TAU() / T::from_count(values.len() as u64);
            let powered: Vec<T> = if p == T::one() {
                values.iter().map(|v| v.abs()).collect()
            } else if p == T::lit(2.0) {
                values.iter().map(|&v| v * v).collect()
            } else {
                values.iter().map(|v| v.abs().powf(p)).collect()
            };
            (h * pairwise_sum(&powered)).powf(p.recip())
        }
    }
}

/// `S_{n−1}(f)`: frequencies `0..n` kept.
pub fn partial_sum<T: Real>(f: &TrigPoly<T>, n: usize) -> TrigPoly<T> {
    let keep = n.saturating_sub(1).min(f.degree());
    TrigPoly {
        a0: if n >= 1 { f.a0 } else { T::zero() },
        cos: f.cos[..keep].to_vec(),
        sin: f.sin[..keep].to_vec(),
    }
}

/// `ρ_n(f) = f − S_{n−1}(f)`: frequencies `≥ n` kept.
pub fn deviation<T: Real>(f: &TrigPoly<T>, n: usize) -> TrigPoly<T> {
    let mut out = f.clone();
    if n >= 1 {
        out.a0 = T::zero();
    }
    let cut = n.saturating_sub(1).min(f.degree());
    for k in 0..cut {
        out.cos[k] = T::zero();
        out.sin[k] = T::zero();
    }
    out
}

/// `∫_0^{2π} K(x − u) φ(u) du` as a trigonometric polynomial in `x`.
pub fn convolve<T: Real>(kernel: &TrigPoly<T>, phi: &TrigPoly<T>) -> TrigPoly<T> {
    let d = kernel.degree().min(phi.degree());
    let pi = T::PI();
    let mut out = TrigPoly::zero(d);
    out.a0 = pi * kernel.a0 * phi.a0;
    for k in 0..d {
        let (ka, kb) = (kernel.cos[k], kernel.sin[k]);
        let (a, b) = (phi.cos[k], phi.sin[k]);
        out.cos[k] = pi * (ka * a - kb * b);
        out.sin[k] = pi * (ka * b + kb * a);
    }
    out
}

/// A trigonometric polynomial whose true coefficients are `poly · e^{log_scale}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScaledTrigPoly<T: Real> {
    pub poly: TrigPoly<T>,
    pub log_scale: T,
}

impl<T: Real> ScaledTrigPoly<T> {
    pub fn deviation(&self, n: usize) -> Self {
        Self {
            poly: deviation(&self.poly, n),
            log_scale: self.log_scale,
        }
    }

    /// Same function, coefficients re-expressed relative to `e^{log_scale}`.
    pub fn rescaled(&self, log_scale: T) -> Self {
        let factor = (self.log_scale - log_scale).exp();
        Self {
            poly: self.poly.scaled(factor),
            log_scale,
        }
    }
}

/// `(1/π)∫ P^{(n)}(x − t) φ(t) dt` computed coefficient-wise, with
/// `n = spec.n` (`n = 1` is the full kernel). The result carries
/// `log_scale = −α n^r`.
pub fn convolve_kernel<T: Real>(phi: &TrigPoly<T>, spec: &KernelSpec<T>) -> Result<ScaledTrigPoly<T>> {
    if !phi.is_zero_mean() {
        return Err(Error::contract("convolution requires a zero-mean density (a0 = 0)"));
    }
    let params = &spec.params;
    let n = spec.n as usize;
    let (c, s) = params.phase();
    let mut out = TrigPoly::zero(phi.degree());
    for k in n.max(1)..=phi.degree() {
        let lambda = scaled_decay(params, spec.n, k as u64);
        let (a, b) = (phi.cos[k - 1], phi.sin[k - 1]);
        out.cos[k - 1] = lambda * (a * c - b * s);
        out.sin[k - 1] = lambda * (a * s + b * c);
    }
    Ok(ScaledTrigPoly {
        poly: out,
        log_scale: spec.log_scale(),
    })
}

/// `‖f‖_p`: exact for `p = 1` (piecewise integration between roots), trapezoid
/// with grid doubling to relative tolerance `tol` for other finite `p`, and the
/// grid maximum of [`sup_norm_certified`] for `Inf`.
pub fn lp_norm<T: Real>(f: &TrigPoly<T>, p: Index<T>, tol: T) -> Result<T> {
    match p.validated()? {
        Index::Inf => Ok(sup_norm_certified(f).value),
        Index::Finite(pv) if pv == T::one() => Ok(l1_norm_exact(f)),
        Index::Finite(_) => {
            let deg = f.degree().max(1);
            let mut n = (4 * (deg + 1)).next_power_of_two().max(16);
            let mut prev = lp_norm_samples(&f.samples(n), p);
            const MAX_GRID: usize = 1 << 24;
            loop {
                n *= 2;
                let cur = lp_norm_samples(&f.samples(n), p);
                if (cur - prev).abs() <= tol * cur.abs() || cur == T::zero() {
                    return Ok(cur);
                }
                if n >= MAX_GRID {
                    return Err(Error::Accuracy {
                        context: format!("L_{p} norm quadrature did not settle"),
                        estimate: cur.as_f64(),
                    });
                }
                prev = cur;
            }
        }
    }
}

/// Certified sup-norm enclosure: `‖f‖_∞ ∈ [value, value + radius]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SupNorm<T: Real> {
    pub value: T,
    pub radius: T,
}

impl<T: Real> SupNorm<T> {
    pub fn upper(&self) -> T {
        self.value + self.radius
    }
}

pub fn sup_norm_certified<T: Real>(f: &TrigPoly<T>) -> SupNorm<T> {
    sup_norm_certified_on(f, 0)
}

/// As [`sup_norm_certified`] with at least `min_points` grid points.
///
/// The grid maximum is within `‖f′‖_∞·π/N` of the sup, and also within
/// `‖f″‖_∞·(π/N)²/2` because the sup of `|f|` sits at a critical point of `f`;
/// the smaller of the two derivative-bound radii is reported.
pub fn sup_norm_certified_on<T: Real>(f: &TrigPoly<T>, min_points: usize) -> SupNorm<T> {
    let n = (16 * f.degree()).max(16).max(min_points).next_power_of_two();
    let value = lp_norm_samples(&f.samples(n), Index::Inf);
    let h = T::PI() / T::from_count(n as u64);
    let first = f.derivative_bound(1) * h;
    let second = f.derivative_bound(2) * h * h / T::lit(2.0);
    SupNorm {
        value,
        radius: first.min(second),
    }
}

/// Sign changes of `f` on `[0, 2π)`, sorted ascending.
///
/// Roots are bracketed on a grid of at least `32·degree` points and polished
/// by safeguarded Newton iteration. Tangential double roots are not reported.
pub fn roots<T: Real>(f: &TrigPoly<T>) -> Vec<T> {
    let deg = f.effective_degree();
    if deg == 0 {
        return Vec::new();
    }
    let m = (32 * deg).max(64).next_power_of_two();
    let vals = f.samples(m);
    let h = T::TAU() / T::from_count(m as u64);
    let positive = |v: T| v >= T::zero();
    let mut out = Vec::new();
    for i in 0..m {
        let j = (i + 1) % m;
        if positive(vals[i]) == positive(vals[j]) {
            continue;
        }
        let lo = h * T::from_count(i as u64);
        let root = polish_root(f, lo, lo + h, vals[i], vals[j]);
        // A root at the origin may be polished to just below 2π.
        let wrap = T::TAU() * (T::one() - T::lit(8.0) * T::epsilon());
        out.push(if root >= wrap { (root - T::TAU()).max(T::zero()) } else { root });
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    out
}

fn polish_root<T: Real>(f: &TrigPoly<T>, mut lo: T, mut hi: T, mut flo: T, fhi: T) -> T {
    let two = T::lit(2.0);
    let mut x = if fhi != flo { lo - flo * (hi - lo) / (fhi - flo) } else { (lo + hi) / two };
    if !(x > lo && x < hi) {
        x = (lo + hi) / two;
    }
    for _ in 0..60 {
        let (fx, dfx) = f.eval_with_derivative(x);
        if fx == T::zero() {
            return x;
        }
        if (fx >= T::zero()) == (flo >= T::zero()) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / two
        };
        let step = (next - x).abs();
        x = next;
        if step <= T::lit(4.0) * T::epsilon() * (T::one() + x.abs()) || hi - lo <= T::epsilon() * x.abs() {
            break;
        }
    }
    x
}

/// `∫_0^{2π} |f|` by integrating the antiderivative between consecutive roots.
pub fn l1_norm_exact<T: Real>(f: &TrigPoly<T>) -> T {
    let zs = roots(f);
    if zs.is_empty() {
        return (T::PI() * f.a0).abs();
    }
    let period_gain = T::PI() * f.a0;
    let vals: Vec<T> = zs.iter().map(|&z| f.antiderivative(z)).collect();
    let mut pieces = Vec::with_capacity(zs.len());
    for i in 0..zs.len() {
        let end = if i + 1 < zs.len() { vals[i + 1] } else { vals[0] + period_gain };
        pieces.push((end - vals[i]).abs());
    }
    pairwise_sum(&pieces)
}
