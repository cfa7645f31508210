//! Best `L_p` approximation `E_n(f)_p = inf ‖f − t_{n−1}‖_p` by trigonometric
//! polynomials of degree `n − 1`, with two-sided bounds.
//!
//! The upper bound is the norm of an explicit residual. The lower bound is a
//! duality certificate: for any `g` orthogonal to all `t_{n−1}`,
//! `E_n(f)_p ≥ ∫ f g / ‖g‖_{p′}`; `g` is the residual's dual element with its
//! low frequencies removed.
//!
//! Solvers work on the coefficient vector `x = [c0, a_1..a_{n−1}, b_1..b_{n−1}]`
//! of `t(x) = c0 + Σ a_j cos jx + b_j sin jx`, with the `L_p` objective
//! discretized on a uniform grid. Weighted normal matrices have
//! Toeplitz-plus-Hankel structure, so they are assembled from one FFT of the
//! weights.

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, conjugate_gradient};
use crate::params::Index;
use crate::scalar::{pairwise_sum, Real};
use crate::trig::{
    analyze_samples, deviation, l1_norm_exact, lp_norm, lp_norm_samples, partial_sum, roots, sup_norm_certified,
    TrigPoly,
};

/// Largest unknown count solved with a dense factorization; beyond it the
/// weighted systems go through matrix-free conjugate gradients.
const DENSE_LIMIT: usize = 1200;

const POLISH_STEPS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ApproxResult<T: Real> {
    /// `‖f − argmin‖_p`.
    pub upper: T,
    /// Duality lower bound on `E_n(f)_p`.
    pub lower: T,
    pub argmin: TrigPoly<T>,
    pub iterations: usize,
}

impl<T: Real> ApproxResult<T> {
    /// `(upper − lower)/upper`, zero when both vanish.
    pub fn gap(&self) -> T {
        if self.upper == T::zero() {
            T::zero()
        } else {
            (self.upper - self.lower) / self.upper
        }
    }
}

/// Exact `L_2` best approximation: the Fourier partial sum.
pub fn best_approx_l2<T: Real>(f: &TrigPoly<T>, n: usize) -> Result<ApproxResult<T>> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let tail = deviation(f, n);
    let e = tail.inner(&tail).sqrt();
    Ok(ApproxResult {
        upper: e,
        lower: e,
        argmin: partial_sum(f, n).with_degree(n - 1),
        iterations: 0,
    })
}

/// Best approximation with the gap contract `(upper − lower)/upper ≤ 10·tol`.
pub fn best_approx_lp<T: Real>(f: &TrigPoly<T>, n: usize, p: Index<T>, tol: T) -> Result<ApproxResult<T>> {
    let res = solve_lp(f, n, p, tol, None)?;
    if res.gap() > T::lit(10.0) * tol {
        return Err(Error::Unconverged {
            context: format!("E_{n} in L_{p}: gap {:e}", res.gap().as_f64()),
            lower: res.lower.as_f64(),
            upper: res.upper.as_f64(),
        });
    }
    Ok(res)
}

/// Runs the solver and returns whatever bounds it reached; both are valid
/// even when the gap target is missed.
pub fn solve_lp<T: Real>(
    f: &TrigPoly<T>,
    n: usize,
    p: Index<T>,
    tol: T,
    warm_start: Option<&TrigPoly<T>>,
) -> Result<ApproxResult<T>> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let pv = match p.validated()? {
        Index::Finite(v) => v,
        Index::Inf => return Err(Error::domain("best approximation in L_inf is not supported")),
    };
    if !(tol > T::zero()) {
        return Err(Error::domain("tolerance must be positive"));
    }
    if deviation(f, n).is_zero() {
        return Ok(ApproxResult {
            upper: T::zero(),
            lower: T::zero(),
            argmin: partial_sum(f, n).with_degree(n - 1),
            iterations: 0,
        });
    }
    let space = LowSpace::new(n, f.degree());
    let start = warm_start.cloned().unwrap_or_else(|| partial_sum(f, n));
    let x0 = space.from_poly(&start);
    let (mut result, measure): (ApproxResult<T>, Box<dyn Fn(&TrigPoly<T>) -> Result<T>>) = if pv == T::one() {
        let fs = f.samples(space.grid);
        (solve_l1(f, &space, &fs, x0, tol)?, Box::new(|r: &TrigPoly<T>| Ok(l1_norm_exact(r))))
    } else {
        let (mut res, _) = solve_refined(f, space, x0, pv, tol)?;
        let quad_tol = T::lit(1e-12).max(T::epsilon() * T::lit(1e3));
        let measure = move |r: &TrigPoly<T>| lp_norm(r, Index::Finite(pv), quad_tol);
        res.upper = measure(&f.sub(&res.argmin))?;
        res.lower = res.lower.min(res.upper);
        let measure: Box<dyn Fn(&TrigPoly<T>) -> Result<T>> = Box::new(measure);
        (res, measure)
    };
    // The result never does worse than the warm start.
    if let Some(w) = warm_start {
        let w = partial_sum(w, n).with_degree(n - 1);
        let warm_upper = measure(&f.sub(&w))?;
        if warm_upper < result.upper {
            result.upper = warm_upper;
            result.lower = result.lower.min(warm_upper);
            result.argmin = w;
        }
    }
    Ok(result)
}

struct LowSpace {
    /// Frequencies `0..n` are spanned.
    n: usize,
    grid: usize,
}

impl LowSpace {
    fn new(n: usize, degree: usize) -> Self {
        Self {
            n,
            grid: (8 * degree).max(1024).next_power_of_two(),
        }
    }

    fn dim(&self) -> usize {
        2 * self.n - 1
    }

    fn to_poly<T: Real>(&self, x: &[T]) -> TrigPoly<T> {
        let n = self.n;
        TrigPoly {
            a0: x[0] * T::lit(2.0),
            cos: x[1..n].to_vec(),
            sin: x[n..2 * n - 1].to_vec(),
        }
    }

    fn from_poly<T: Real>(&self, t: &TrigPoly<T>) -> Vec<T> {
        let t = partial_sum(t, self.n).with_degree(self.n - 1);
        let mut x = Vec::with_capacity(self.dim());
        x.push(t.a0 / T::lit(2.0));
        x.extend_from_slice(&t.cos);
        x.extend_from_slice(&t.sin);
        x
    }

    fn synth<T: Real>(&self, x: &[T]) -> Vec<T> {
        self.to_poly(x).samples(self.grid)
    }

    /// `Σ_i v_i φ_j(t_i)` for every basis function `φ_j`.
    fn adjoint<T: Real>(&self, v: &[T]) -> Vec<T> {
        let mut buf: Vec<Complex<T>> = v.iter().map(|&x| Complex::new(x, T::zero())).collect();
        T::fft_forward(&mut buf);
        let n = self.n;
        let mut out = Vec::with_capacity(self.dim());
        out.push(buf[0].re);
        out.extend((1..n).map(|k| buf[k].re));
        out.extend((1..n).map(|k| -buf[k].im));
        out
    }

    /// `(Σ w cos(m t_i), Σ w sin(m t_i))` for `m = 0..2n−1`.
    fn grid_moments<T: Real>(&self, w: &[T]) -> (Vec<T>, Vec<T>) {
        let mut buf: Vec<Complex<T>> = w.iter().map(|&x| Complex::new(x, T::zero())).collect();
        T::fft_forward(&mut buf);
        let len = 2 * self.n - 1;
        (
            (0..len).map(|m| buf[m].re).collect(),
            (0..len).map(|m| -buf[m].im).collect(),
        )
    }

    fn diagonal<T: Real>(&self, wc: &[T]) -> Vec<T> {
        let half = T::lit(0.5);
        let n = self.n;
        let mut d = Vec::with_capacity(self.dim());
        d.push(wc[0]);
        d.extend((1..n).map(|j| half * (wc[0] + wc[2 * j])));
        d.extend((1..n).map(|j| half * (wc[0] - wc[2 * j])));
        d
    }

    /// Solves `(Aᵀ W A) x = Aᵀ W target`.
    fn solve_weighted<T: Real>(&self, w: &[T], target: &[T], x0: &[T]) -> Result<Vec<T>> {
        let wt: Vec<T> = w.iter().zip(target).map(|(&a, &b)| a * b).collect();
        let rhs = self.adjoint(&wt);
        let (wc, ws) = self.grid_moments(w);
        let m = self.dim();
        if m <= DENSE_LIMIT {
            let g = gram_from_moments(&wc, &ws, self.n);
            return cholesky_solve(&g, m, &rhs);
        }
        let diag = self.diagonal(&wc);
        let apply = |x: &[T]| {
            let v: Vec<T> = self.synth(x).into_iter().zip(w).map(|(a, &b)| a * b).collect();
            self.adjoint(&v)
        };
        Ok(conjugate_gradient(apply, &diag, &rhs, x0, T::lit(1e-9), 400))
    }
}

/// Dense `G_{jk} = Σ w φ_j φ_k` from weight moments
/// `wc[m] = Σ w cos(m·)`, `ws[m] = Σ w sin(m·)`.
fn gram_from_moments<T: Real>(wc: &[T], ws: &[T], n: usize) -> Vec<T> {
    let m = 2 * n - 1;
    let half = T::lit(0.5);
    let ws_signed = |k: isize| -> T {
        if k >= 0 {
            ws[k as usize]
        } else {
            -ws[(-k) as usize]
        }
    };
    let (ia, ib) = (|j: usize| j, |j: usize| n - 1 + j);
    let mut g = vec![T::zero(); m * m];
    let mut set = |i: usize, j: usize, v: T| {
        g[i * m + j] = v;
        g[j * m + i] = v;
    };
    set(0, 0, wc[0]);
    for k in 1..n {
        set(0, ia(k), wc[k]);
        set(0, ib(k), ws[k]);
    }
    for j in 1..n {
        for k in 1..n {
            let diff = j.abs_diff(k);
            if k >= j {
                set(ia(j), ia(k), half * (wc[diff] + wc[j + k]));
                set(ib(j), ib(k), half * (wc[diff] - wc[j + k]));
            }
            // Σ w cos(j·) sin(k·) = ½(ws[k+j] + ws[k−j]).
            set(ia(j), ib(k), half * (ws[j + k] + ws_signed(k as isize - j as isize)));
        }
    }
    g
}

fn residual<T: Real>(fs: &[T], ts: &[T]) -> Vec<T> {
    fs.iter().zip(ts).map(|(&a, &b)| a - b).collect()
}

fn power_sum<T: Real>(r: &[T], p: T) -> T {
    let v: Vec<T> = r.iter().map(|x| x.abs().powf(p)).collect();
    pairwise_sum(&v)
}

fn smoothed_abs_sum<T: Real>(r: &[T], eps: T) -> T {
    let v: Vec<T> = r.iter().map(|&x| (x * x + eps * eps).sqrt()).collect();
    pairwise_sum(&v)
}

// ---------------------------------------------------------------------------
// p > 1
// ---------------------------------------------------------------------------

/// Runs [`solve_smooth`] on successively doubled grids, warm-started, until
/// the certified gap reaches `tol` or the grid is 16 times the initial one.
fn solve_refined<T: Real>(
    f: &TrigPoly<T>,
    mut space: LowSpace,
    mut x: Vec<T>,
    p: T,
    tol: T,
) -> Result<(ApproxResult<T>, usize)> {
    let max_grid = 16 * space.grid;
    let mut iterations = 0;
    loop {
        let fs = f.samples(space.grid);
        let (xn, it) = solve_smooth(&space, &fs, x, p, tol)?;
        x = xn;
        iterations += it;
        let t = space.to_poly(&x);
        let (upper, lower) = smooth_certificate(f, &t, &space, p);
        let done = upper == T::zero() || (upper - lower) / upper <= tol;
        if done || space.grid >= max_grid {
            let result = ApproxResult {
                upper,
                lower,
                argmin: t,
                iterations,
            };
            return Ok((result, space.grid));
        }
        space.grid *= 2;
    }
}

/// Newton iteration on the discretized `Σ|r|^p`: the IRLS minimizer with
/// weights `|r|^{p−2}` scaled by `1/(p−1)` is the Newton step, damped by a
/// backtracking line search. Weights are smoothed at `|r| ≈ 10⁻⁹·max|r|` for
/// `p < 2`.
fn solve_smooth<T: Real>(space: &LowSpace, fs: &[T], mut x: Vec<T>, p: T, tol: T) -> Result<(Vec<T>, usize)> {
    const MAX_ITER: usize = 150;
    let mut r = residual(fs, &space.synth(&x));
    let mut obj = power_sum(&r, p);
    let rmax = r.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let eps2 = (rmax * T::lit(1e-9)).powi(2);
    let expo = (p - T::lit(2.0)) / T::lit(2.0);
    let stall = (tol * tol * T::lit(1e-4)).max(T::epsilon() * T::lit(16.0));
    let mut iterations = 0;
    for _ in 0..MAX_ITER {
        iterations += 1;
        let w: Vec<T> = r.iter().map(|&v| (v * v + eps2).powf(expo)).collect();
        let xi = space.solve_weighted(&w, fs, &x)?;
        let d: Vec<T> = xi.iter().zip(&x).map(|(&a, &b)| (a - b) / (p - T::one())).collect();
        let ad = space.synth(&d);
        let mut theta = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<T> = r.iter().zip(&ad).map(|(&ri, &ai)| ri - theta * ai).collect();
            let o = power_sum(&trial, p);
            if o < obj {
                accepted = Some((trial, o));
                break;
            }
            theta = theta / T::lit(2.0);
        }
        let Some((trial, o)) = accepted else { break };
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += theta * *di;
        }
        let decrease = (obj - o) / obj;
        r = trial;
        obj = o;
        if decrease < stall {
            break;
        }
    }
    Ok((x, iterations))
}

/// Bounds for `1 < p < ∞` on a grid four times finer than the solver's:
/// `g = |res|^{p−1} sign(res)` minus its frequencies `< n`.
fn smooth_certificate<T: Real>(f: &TrigPoly<T>, t: &TrigPoly<T>, space: &LowSpace, p: T) -> (T, T) {
    let res = f.sub(t);
    let m = 4 * space.grid;
    let rv = res.samples(m);
    let upper = lp_norm_samples(&rv, Index::Finite(p));
    let g: Vec<T> = rv.iter().map(|&v| v.abs().powf(p - T::one()) * v.signum()).collect();
    let low = analyze_samples(&g, space.n - 1).expect("fine grid resolves low band");
    let gl = low.samples(m);
    let gp: Vec<T> = g.iter().zip(&gl).map(|(&a, &b)| a - b).collect();
    let h = T::TAU() / T::from_count(m as u64);
    let prod: Vec<T> = rv.iter().zip(&gp).map(|(&a, &b)| a * b).collect();
    let num = h * pairwise_sum(&prod);
    let pc = p / (p - T::one());
    let den = lp_norm_samples(&gp, Index::Finite(pc));
    let lower = if den > T::zero() { (num / den).max(T::zero()).min(upper) } else { T::zero() };
    (upper, lower)
}

// ---------------------------------------------------------------------------
// p = 1
// ---------------------------------------------------------------------------

/// Piecewise-constant `sign(res)` described by the residual's roots.
struct SignPattern<T: Real> {
    zeros: Vec<T>,
    /// Sign on `(zeros[i], zeros[i+1])`, the last interval wrapping through 2π.
    signs: Vec<T>,
}

impl<T: Real> SignPattern<T> {
    fn of(res: &TrigPoly<T>) -> Option<Self> {
        let zeros = roots(res);
        if zeros.is_empty() {
            return None;
        }
        let len = zeros.len();
        let signs = (0..len)
            .map(|i| {
                let end = if i + 1 < len { zeros[i + 1] } else { zeros[0] + T::TAU() };
                let v = res.eval((zeros[i] + end) / T::lit(2.0));
                if v >= T::zero() {
                    T::one()
                } else {
                    -T::one()
                }
            })
            .collect();
        Some(Self { zeros, signs })
    }

    fn interval(&self, i: usize) -> (T, T) {
        let end = if i + 1 < self.zeros.len() { self.zeros[i + 1] } else { self.zeros[0] + T::TAU() };
        (self.zeros[i], end)
    }

    /// `(∫|res|, ∫ res·g)` from the antiderivative at the breakpoints.
    fn integrals(&self, res: &TrigPoly<T>) -> (T, T) {
        let period_gain = T::PI() * res.a0;
        let vals: Vec<T> = self.zeros.iter().map(|&z| res.antiderivative(z)).collect();
        let len = self.zeros.len();
        let (mut abs, mut signed) = (Vec::with_capacity(len), Vec::with_capacity(len));
        for i in 0..len {
            let end = if i + 1 < len { vals[i + 1] } else { vals[0] + period_gain };
            let piece = end - vals[i];
            abs.push(piece.abs());
            signed.push(self.signs[i] * piece);
        }
        (pairwise_sum(&abs), pairwise_sum(&signed))
    }

    /// `(∫ g, ∫ g cos kx, ∫ g sin kx)` for `k = 1..n`.
    fn low_moments(&self, n: usize) -> (T, Vec<T>, Vec<T>) {
        let len = self.zeros.len();
        let mean: T = (0..len)
            .map(|i| {
                let (u, v) = self.interval(i);
                self.signs[i] * (v - u)
            })
            .sum();
        let mut ic = vec![T::zero(); n.saturating_sub(1)];
        let mut is = vec![T::zero(); n.saturating_sub(1)];
        for (i, &z) in self.zeros.iter().enumerate() {
            let before = self.signs[(i + len - 1) % len];
            let jump = before - self.signs[i];
            if jump == T::zero() {
                continue;
            }
            harmonics(z, n, |k, c, s| {
                let kf = T::from_count(k as u64);
                ic[k - 1] += jump * s / kf;
                is[k - 1] -= jump * c / kf;
            });
        }
        (mean, ic, is)
    }
}

/// Calls `visit(k, cos kz, sin kz)` for `k = 1..n`.
fn harmonics<T: Real>(z: T, n: usize, mut visit: impl FnMut(usize, T, T)) {
    let (s1, c1) = z.sin_cos();
    let (mut c, mut s) = (T::one(), T::zero());
    for k in 1..n {
        if k % 32 == 0 {
            let (sk, ck) = (T::from_count(k as u64) * z).sin_cos();
            c = ck;
            s = sk;
        } else {
            let nc = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = nc;
        }
        visit(k, c, s);
    }
}

/// Everything the `L_1` certificate and the Newton refinement need at one iterate.
struct L1State<T: Real> {
    upper: T,
    lower: T,
    /// `∫ sign(res) φ_j` in solver coordinates.
    gradient: Vec<T>,
    pattern: Option<SignPattern<T>>,
}

fn l1_state<T: Real>(f: &TrigPoly<T>, t: &TrigPoly<T>, n: usize) -> L1State<T> {
    let res = f.sub(t);
    let Some(pattern) = SignPattern::of(&res) else {
        // No sign change: the residual is one-signed and gives no certificate.
        return L1State {
            upper: l1_norm_exact(&res),
            lower: T::zero(),
            gradient: vec![T::zero(); 2 * n - 1],
            pattern: None,
        };
    };
    let upper = pattern.integrals(&res).0;
    let (lower, gradient) = step_certificate(&res, &pattern, n);
    L1State {
        upper,
        lower: lower.min(upper),
        gradient,
        pattern: Some(pattern),
    }
}

/// Lower bound from the `±1` step function `g` described by `pattern`, whose
/// breakpoints need not be roots of `res`: with `h` the low-frequency part of
/// `g`, `(g − h)/(1 + ‖h‖_∞)` is admissible. Also returns `∫ g φ_j`.
fn step_certificate<T: Real>(res: &TrigPoly<T>, pattern: &SignPattern<T>, n: usize) -> (T, Vec<T>) {
    let signed = pattern.integrals(res).1;
    let (mean, ic, is) = pattern.low_moments(n);
    let pi = T::PI();
    let h = TrigPoly {
        a0: mean / pi,
        cos: ic.iter().map(|&v| v / pi).collect(),
        sin: is.iter().map(|&v| v / pi).collect(),
    };
    let h_sup = sup_norm_certified(&h).upper();
    let lower = ((signed - res.inner(&h)) / (T::one() + h_sup)).max(T::zero());
    let mut moments = Vec::with_capacity(2 * n - 1);
    moments.push(mean);
    moments.extend(ic);
    moments.extend(is);
    (lower, moments)
}

/// Moves the breakpoints of the sign pattern, at least weighted cost
/// `Σ |res′(z)| δz²`, until the step function is orthogonal to frequencies
/// below `n`; returns the best certificate seen.
fn polish_dual<T: Real>(res: &TrigPoly<T>, pattern: &SignPattern<T>, space: &LowSpace, best: T) -> T {
    let n = space.n;
    let len = space.dim();
    let slopes: Vec<T> = pattern.zeros.iter().map(|&z| res.eval_with_derivative(z).1.abs()).collect();
    let floor = slopes.iter().fold(T::zero(), |m, &v| m.max(v)) * T::lit(1e-6);
    let mut current = SignPattern {
        zeros: pattern.zeros.clone(),
        signs: pattern.signs.clone(),
    };
    let count = current.zeros.len();
    let jumps: Vec<T> = (0..count).map(|i| current.signs[(i + count - 1) % count] - current.signs[i]).collect();
    let weights: Vec<T> = (0..count).map(|i| jumps[i] * jumps[i] / slopes[i].max(floor)).collect();
    let (mut lower, mut moments) = step_certificate(res, &current, n);
    for _ in 0..POLISH_STEPS {
        let rhs: Vec<T> = moments.iter().map(|&v| -v).collect();
        let y = if len <= DENSE_LIMIT {
            let mut wc = vec![T::zero(); len];
            let mut ws = vec![T::zero(); len];
            for (&z, &weight) in current.zeros.iter().zip(&weights) {
                wc[0] += weight;
                harmonics(z, len, |k, c, s| {
                    wc[k] += weight * c;
                    ws[k] += weight * s;
                });
            }
            match cholesky_solve(&gram_from_moments(&wc, &ws, n), len, &rhs) {
                Ok(y) => y,
                Err(_) => break,
            }
        } else {
            // Approximate system: weights moved to the nearest grid node, plus a
            // small ridge so that every frequency is seen.
            let m = space.grid;
            let total: T = weights.iter().copied().sum();
            let mut w = vec![total * T::lit(1e-6) / T::from_count(m as u64); m];
            let per_node = T::from_count(m as u64) / T::TAU();
            for (&z, &weight) in current.zeros.iter().zip(&weights) {
                let node = (z * per_node).round().to_usize().unwrap_or(0) % m;
                w[node] += weight;
            }
            let (wc, _) = space.grid_moments(&w);
            let diag = space.diagonal(&wc);
            let apply = |x: &[T]| {
                let v: Vec<T> = space.synth(x).into_iter().zip(&w).map(|(a, &b)| a * b).collect();
                space.adjoint(&v)
            };
            conjugate_gradient(apply, &diag, &rhs, &vec![T::zero(); len], T::lit(1e-6), 300)
        };
        let delta: Vec<T> = current
            .zeros
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                if jumps[i] == T::zero() {
                    return T::zero();
                }
                let mut dot = y[0];
                harmonics(z, n, |k, c, s| dot += y[k] * c + y[n - 1 + k] * s);
                weights[i] / jumps[i] * dot
            })
            .collect();
        // Keep breakpoints ordered: no move beyond 40% of a neighbouring gap.
        let delta: Vec<T> = (0..count)
            .map(|i| {
                let (prev, next) = (current.interval((i + count - 1) % count), current.interval(i));
                let room = (prev.1 - prev.0).min(next.1 - next.0) * T::lit(0.4);
                delta[i].max(-room).min(room)
            })
            .collect();
        let mut theta = T::one();
        let mut accepted = false;
        for _ in 0..4 {
            let zeros: Vec<T> = current.zeros.iter().zip(&delta).map(|(&z, &d)| z + theta * d).collect();
            if zeros[0] >= T::zero() && zeros[count - 1] < T::TAU() {
                let trial = SignPattern {
                    zeros,
                    signs: current.signs.clone(),
                };
                let (l, m) = step_certificate(res, &trial, n);
                if l > lower {
                    current = trial;
                    lower = l;
                    moments = m;
                    accepted = true;
                    break;
                }
            }
            theta = theta / T::lit(2.0);
        }
        if !accepted {
            break;
        }
    }
    best.max(lower)
}

/// Smoothed IRLS (`|x| ≈ √(x² + ε²)`, ε annealed by decades) followed, for
/// moderate sizes, by Newton iteration on the optimality condition
/// `∫ sign(f − t) φ_j = 0`, whose Jacobian is `−2 Σ_z φ(z)φ(z)ᵀ/|res′(z)|`
/// over the residual's roots `z`.
fn solve_l1<T: Real>(
    f: &TrigPoly<T>,
    space: &LowSpace,
    fs: &[T],
    mut x: Vec<T>,
    tol: T,
) -> Result<ApproxResult<T>> {
    const STAGE_ITERS: usize = 12;
    let mut r = residual(fs, &space.synth(&x));
    let scale = (r.iter().map(|&v| v * v).sum::<T>() / T::from_count(r.len() as u64)).sqrt();
    let eps_min = scale * (tol * T::lit(1e-2)).max(T::lit(1e-10));
    let mut eps = (scale * T::lit(1e-2)).max(eps_min);
    let mut iterations = 0;
    loop {
        let mut obj = smoothed_abs_sum(&r, eps);
        for _ in 0..STAGE_ITERS {
            iterations += 1;
            let w: Vec<T> = r.iter().map(|&v| (v * v + eps * eps).sqrt().recip()).collect();
            let xn = space.solve_weighted(&w, fs, &x)?;
            let rn = residual(fs, &space.synth(&xn));
            let o = smoothed_abs_sum(&rn, eps);
            if o > obj {
                break;
            }
            let decrease = (obj - o) / obj;
            x = xn;
            r = rn;
            obj = o;
            if decrease < T::lit(1e-4) {
                break;
            }
        }
        if eps <= eps_min {
            break;
        }
        eps = (eps / T::lit(10.0)).max(eps_min);
    }

    let mut t = space.to_poly(&x);
    let mut state = l1_state(f, &t, space.n);
    if space.dim() <= DENSE_LIMIT {
        for _ in 0..40 {
            if gap_of(&state) <= tol * T::lit(0.1) {
                break;
            }
            let Some(pattern) = state.pattern.as_ref() else { break };
            let Some(step) = l1_newton_step(f, &t, pattern, &state.gradient, space.n) else { break };
            iterations += 1;
            let mut theta = T::one();
            let mut improved = false;
            for _ in 0..20 {
                let xt: Vec<T> = x.iter().zip(&step).map(|(&a, &d)| a + theta * d).collect();
                let tt = space.to_poly(&xt);
                let st = l1_state(f, &tt, space.n);
                let slack = T::lit(64.0) * T::epsilon() * state.upper;
                if st.upper < state.upper - slack || (st.upper <= state.upper + slack && gap_of(&st) < gap_of(&state)) {
                    x = xt;
                    t = tt;
                    state = st;
                    improved = true;
                    break;
                }
                theta = theta / T::lit(2.0);
            }
            if !improved {
                break;
            }
        }
    }
    if gap_of(&state) > tol * T::lit(0.1) {
        if let Some(pattern) = state.pattern.as_ref() {
            state.lower = polish_dual(&f.sub(&t), pattern, space, state.lower).min(state.upper);
        }
    }
    Ok(ApproxResult {
        upper: state.upper,
        lower: state.lower,
        argmin: t,
        iterations,
    })
}

fn gap_of<T: Real>(s: &L1State<T>) -> T {
    if s.upper == T::zero() {
        T::zero()
    } else {
        (s.upper - s.lower) / s.upper
    }
}

fn l1_newton_step<T: Real>(
    f: &TrigPoly<T>,
    t: &TrigPoly<T>,
    pattern: &SignPattern<T>,
    gradient: &[T],
    n: usize,
) -> Option<Vec<T>> {
    let res = f.sub(t);
    let len = 2 * n - 1;
    let mut wc = vec![T::zero(); len];
    let mut ws = vec![T::zero(); len];
    for &z in &pattern.zeros {
        let (_, d) = res.eval_with_derivative(z);
        if d == T::zero() {
            continue;
        }
        let weight = d.abs().recip();
        wc[0] += weight;
        harmonics(z, len, |k, c, s| {
            wc[k] += weight * c;
            ws[k] += weight * s;
        });
    }
    let g = gram_from_moments(&wc, &ws, n);
    let mut step = cholesky_solve(&g, len, gradient).ok()?;
    for v in &mut step {
        *v = *v / T::lit(2.0);
    }
    Some(step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn poly(cos: &[f64], sin: &[f64]) -> TrigPoly<f64> {
        TrigPoly::new(0.0, cos.to_vec(), sin.to_vec()).unwrap()
    }

    #[test]
    fn l2_examples() {
        let n = 5;
        let c = TrigPoly::cosine(n, 1.0f64);
        assert!((best_approx_l2(&c, n).unwrap().upper - PI.sqrt()).abs() < 1e-14);
        let low = poly(&[1.0, 2.0], &[0.0, 1.0]);
        assert_eq!(best_approx_l2(&low, 3).unwrap().upper, 0.0);
        let two = TrigPoly::cosine(n, 1.0).add(&TrigPoly::cosine(n + 1, 1.0));
        assert!((best_approx_l2(&two, n).unwrap().upper - (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gram_matches_direct_sums() {
        let space = LowSpace::new(4, 8);
        let w: Vec<f64> = (0..space.grid).map(|i| 1.0 + 0.5 * (i as f64 * 0.37).sin().abs()).collect();
        let (wc, ws) = space.grid_moments(&w);
        let g = gram_from_moments(&wc, &ws, 4);
        let m = space.dim();
        let basis = |j: usize, x: f64| -> f64 {
            if j == 0 {
                1.0
            } else if j < 4 {
                (j as f64 * x).cos()
            } else {
                ((j - 3) as f64 * x).sin()
            }
        };
        for a in 0..m {
            for b in 0..m {
                let direct: f64 = (0..space.grid)
                    .map(|i| {
                        let x = 2.0 * PI * i as f64 / space.grid as f64;
                        w[i] * basis(a, x) * basis(b, x)
                    })
                    .sum();
                assert!((g[a * m + b] - direct).abs() < 1e-9, "({a},{b})");
            }
        }
    }

    #[test]
    fn lp_solver_reproduces_l2() {
        let f = poly(&[0.3, -0.2, 0.5, 0.1, 0.7, -0.4], &[0.1, 0.9, -0.3, 0.2, 0.0, 0.25]);
        let exact = best_approx_l2(&f, 3).unwrap();
        let got = best_approx_lp(&f, 3, Index::Finite(2.0), 1e-10).unwrap();
        assert!((got.upper - exact.upper).abs() < 1e-8 * exact.upper);
        assert!(got.gap() < 1e-10);
    }

    #[test]
    fn trivial_and_homogeneous() {
        let low = poly(&[1.0, 0.5], &[0.2, 0.0]);
        let r = best_approx_lp(&low, 3, Index::Finite(1.5), 1e-6).unwrap();
        assert_eq!((r.upper, r.lower), (0.0, 0.0));
        let f = poly(&[0.3, -0.2, 0.5, 0.1, 0.7], &[0.1, 0.9, -0.3, 0.2, 0.0]);
        for &p in &[1.0, 1.5, 3.0] {
            let a = best_approx_lp(&f, 3, Index::Finite(p), 1e-6).unwrap();
            let b = best_approx_lp(&f.scaled(-2.5), 3, Index::Finite(p), 1e-6).unwrap();
            assert!((b.upper - 2.5 * a.upper).abs() < 1e-6 * b.upper, "p={p}");
            assert!(a.lower <= a.upper && a.gap() < 1e-5, "p={p} gap={}", a.gap());
        }
    }

    #[test]
    fn l1_of_single_harmonic() {
        // E_n(cos nt)_1 = 4: sign(cos nt) is orthogonal to every polynomial of degree below n.
        let f = TrigPoly::cosine(4, 1.0f64);
        let r = best_approx_lp(&f, 4, Index::Finite(1.0), 1e-8).unwrap();
        assert!((r.upper - 4.0).abs() < 1e-9 && (r.lower - 4.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = TrigPoly::cosine(4, 1.0f64);
        assert!(best_approx_lp(&f, 0, Index::Finite(2.0), 1e-6).is_err());
        assert!(best_approx_lp(&f, 2, Index::Inf, 1e-6).is_err());
        assert!(best_approx_lp(&f, 2, Index::Finite(0.5), 1e-6).is_err());
    }
}
