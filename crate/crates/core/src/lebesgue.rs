//! Lebesgue-type inequalities for Fourier sums on generalized Poisson
//! integrals: right-hand sides, verification of the inequality on concrete
//! densities, a sharpness probe, and consistency checks for the remainder
//! constants in the kernel-norm and `I_s` asymptotics.

use serde::{Deserialize, Serialize};

use crate::bestapprox::{solve_lp, ApproxResult};
use crate::error::{Error, Result};
use crate::kernel::{kernel_norm, kernel_norm_asymptotic, scaled_kernel_poly, KernelSpec};
use crate::params::{n0, ClassParams, Index};
use crate::scalar::Real;
use crate::scaled::ScaledValue;
use crate::specfun::{cos_norm, i_s, theorem_main_f};
use crate::trig::{analyze_samples, convolve_kernel, lp_norm, sup_norm_certified_on, TrigPoly};

/// Bound on the remainder constants, `(14π)²`.
pub fn gamma_bound<T: Real>() -> T {
    (T::lit(14.0) * T::PI()).powi(2)
}

/// Truncation accuracy for kernels built here, relative to the leading term.
const KERNEL_EPS: f64 = 1e-17;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoundReport<T: Real> {
    pub params: ClassParams<T>,
    pub n: u64,
    /// Grid estimate of `‖f − S_{n−1}f‖_C`.
    pub lhs: ScaledValue<T>,
    /// Certified `lhs` error radius: the true sup lies in `[lhs, lhs + lhs_radius]`.
    pub lhs_radius: ScaledValue<T>,
    pub en: ApproxResult<T>,
    /// `false` when the best-approximation gap exceeded `10·tol`; the
    /// bounds in `en` stay valid.
    pub en_converged: bool,
    pub rhs_full: ScaledValue<T>,
    pub rhs_main: ScaledValue<T>,
    /// `None` when `en.lower = 0`.
    pub implied_gamma: Option<T>,
    /// `lhs + lhs_radius ≤ rhs_full` with the right side built from `en.lower`.
    pub pass: bool,
    /// The density has no frequencies `≥ n`, so both sides vanish.
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ISReport<T: Real> {
    pub s: Index<T>,
    pub n: u64,
    pub i_s_computed: T,
    pub f_term: T,
    pub implied_theta: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AsymptoticsReport<T: Real> {
    pub s: Index<T>,
    pub n: u64,
    pub kernel_norm: ScaledValue<T>,
    pub main: ScaledValue<T>,
    pub bracket: ScaledValue<T>,
    pub implied_delta: T,
    /// `n ≥ n0` for the dual index, where `|δ| ≤ (14π)²` is asserted.
    pub in_regime: bool,
}

fn check_en<T: Real>(en: T) -> Result<()> {
    if en >= T::zero() && en.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("E_n must be finite and >= 0, got {en}")))
    }
}

/// Right-hand side for `1 < p < ∞`, as a multiple of `e^{−αn^r}`.
pub fn rhs_theorem1_general<T: Real>(params: &ClassParams<T>, n: u64, en: T, gamma: T) -> Result<ScaledValue<T>> {
    let params = params.validated()?;
    let p = match params.p {
        Index::Finite(p) if p > T::one() => p,
        other => return Err(Error::domain(format!("general right-hand side needs 1 < p < inf, got {other}"))),
    };
    check_en(en)?;
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let one = T::one();
    let pc = p / (p - one);
    let (r, ar) = (params.r, params.alpha_r());
    let nf = T::from_count(n);
    let main = cos_norm(Index::Finite(pc))? / (T::PI().powf(one + pc.recip()) * ar.powf(p.recip()))
        * theorem_main_f(pc)?;
    let corr = (one + ar.powf((pc - one) / p) / (pc - one)) * nf.powf(-(one - r) / p)
        + p.powf(pc.recip()) / ar.powf(one + p.recip()) * nf.powf(-r);
    let value = nf.powf((one - r) / p) * (main + gamma * corr) * en;
    Ok(ScaledValue::new(value, -params.alpha * nf.powf(r)))
}

/// Right-hand side for `p = 1`, as a multiple of `e^{−αn^r}`.
pub fn rhs_theorem1_p1<T: Real>(params: &ClassParams<T>, n: u64, en: T, gamma: T) -> Result<ScaledValue<T>> {
    let params = params.validated()?;
    if params.p != Index::Finite(T::one()) {
        return Err(Error::domain(format!("p = 1 right-hand side called with p = {}", params.p)));
    }
    check_en(en)?;
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let one = T::one();
    let (r, ar) = (params.r, params.alpha_r());
    let nf = T::from_count(n);
    let bracket = (T::PI() * ar).recip() + gamma * (nf.powf(-r) / (ar * ar) + nf.powf(-(one - r)));
    let value = nf.powf(one - r) * bracket * en;
    Ok(ScaledValue::new(value, -params.alpha * nf.powf(r)))
}

/// Dispatches on `params.p`.
pub fn rhs_theorem1<T: Real>(params: &ClassParams<T>, n: u64, en: T, gamma: T) -> Result<ScaledValue<T>> {
    match params.p {
        Index::Finite(p) if p == T::one() => rhs_theorem1_p1(params, n, en, gamma),
        _ => rhs_theorem1_general(params, n, en, gamma),
    }
}

/// Class-wide bound on `sup ‖f − S_{n−1}f‖_C`: the right-hand side at
/// `E_n = 1` and `γ = (14π)²`.
pub fn class_bound<T: Real>(params: &ClassParams<T>, n: u64) -> Result<ScaledValue<T>> {
    rhs_theorem1(params, n, T::one(), gamma_bound())
}

/// Checks the inequality on `f = P * φ`.
pub fn verify_inequality<T: Real>(
    phi: &TrigPoly<T>,
    params: &ClassParams<T>,
    n: u64,
    tol: T,
) -> Result<BoundReport<T>> {
    check_density(phi, params)?;
    let en = solve_lp(phi, n as usize, params.p, tol, None)?;
    verify_with_approx(phi, params, n, en, tol, 0)
}

/// As [`verify_inequality`] with `E_n(φ)` supplied; `E_n` does not depend on
/// `β`, so one solve can serve several phases. `sup_points` is a lower bound on
/// the sup-norm grid size.
pub fn verify_with_approx<T: Real>(
    phi: &TrigPoly<T>,
    params: &ClassParams<T>,
    n: u64,
    en: ApproxResult<T>,
    tol: T,
    sup_points: usize,
) -> Result<BoundReport<T>> {
    check_density(phi, params)?;
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let target_scale = -params.alpha * T::from_count(n).powf(params.r);
    let deviation = deviation_of_integral(phi, params, n)?;
    let sup = sup_norm_certified_on(&deviation, sup_points);
    let lhs = ScaledValue::new(sup.value, target_scale);
    let lhs_radius = ScaledValue::new(sup.radius, target_scale);
    let gamma = gamma_bound::<T>();
    let rhs_full = rhs_theorem1(params, n, en.lower, gamma)?;
    let rhs_main = rhs_theorem1(params, n, en.lower, T::zero())?;
    let pass = lhs.add(lhs_radius).compare(&rhs_full) != Some(std::cmp::Ordering::Greater);
    let implied_gamma = if en.lower > T::zero() {
        let unit = rhs_theorem1(params, n, en.lower, T::one())?.sub(rhs_main);
        Some(lhs.sub(rhs_main).ratio(&unit))
    } else {
        None
    };
    let en_converged = en.gap() <= T::lit(10.0) * tol;
    Ok(BoundReport {
        params: *params,
        n,
        lhs,
        lhs_radius,
        en,
        en_converged,
        rhs_full,
        rhs_main,
        implied_gamma,
        pass,
        degenerate: phi.effective_degree() < n as usize,
    })
}

fn check_density<T: Real>(phi: &TrigPoly<T>, params: &ClassParams<T>) -> Result<()> {
    if !phi.is_zero_mean() {
        return Err(Error::contract("density must have zero mean (a0 = 0)"));
    }
    if params.p.is_inf() {
        return Err(Error::domain("the inequality is verified for 1 <= p < inf"));
    }
    let norm = lp_norm(phi, params.p, T::lit(1e-12))?;
    if norm > T::one() + T::lit(1e-9) {
        return Err(Error::contract(format!("density lies outside the unit ball: norm {norm}")));
    }
    Ok(())
}

/// `(f − S_{n−1}f)·e^{αn^r}` for `f = P * φ`, by convolving with the full
/// kernel and taking the deviation. When `e^{α(n^r−1)}` is not representable
/// the tail kernel is applied directly, which gives the same coefficients.
fn deviation_of_integral<T: Real>(phi: &TrigPoly<T>, params: &ClassParams<T>, n: u64) -> Result<TrigPoly<T>> {
    let target_scale = -params.alpha * T::from_count(n).powf(params.r);
    let trunc = (phi.degree() as u64).max(n);
    let spread = -params.alpha - target_scale;
    if spread < T::max_value().ln() - T::lit(8.0) {
        let full = KernelSpec::with_truncation(*params, 1, trunc)?;
        let f = convolve_kernel(phi, &full)?;
        Ok(f.deviation(n as usize).rescaled(target_scale).poly)
    } else {
        let tail = KernelSpec::with_truncation(*params, n, trunc)?;
        Ok(convolve_kernel(phi, &tail)?.poly)
    }
}

/// Achieved `|ρ_n(f*; x0)|` over the Hölder bound `(1/π)‖P^{(n)}‖_{p′}` for the
/// dual extremal density `φ* ∝ |Q(x0 − ·)|^{p′−1} sign Q(x0 − ·)`.
pub fn sharpness_probe<T: Real>(params: &ClassParams<T>, n: u64, x0: T) -> Result<T> {
    let params = params.validated()?;
    let p = match params.p {
        Index::Finite(p) if p > T::one() => p,
        other => return Err(Error::domain(format!("sharpness probe needs 1 < p < inf, got {other}"))),
    };
    let pc = p / (p - T::one());
    let spec = KernelSpec::new(params, n, T::lit(KERNEL_EPS))?;
    let q = scaled_kernel_poly(&spec);
    let reflected = reflect(&q, x0);
    let mut phi = if pc == T::lit(2.0) {
        reflected
    } else {
        let degree = 4 * spec.trunc_k as usize;
        let m = (8 * degree).next_power_of_two();
        let g: Vec<T> = reflected
            .samples(m)
            .into_iter()
            .map(|v| v.abs().powf(pc - T::one()) * v.signum())
            .collect();
        analyze_samples(&g, degree)?
    };
    phi.a0 = T::zero();
    let norm = lp_norm(&phi, params.p, T::lit(1e-12))?;
    phi = phi.scaled(norm.recip());
    let f = convolve_kernel(&phi, &spec)?;
    let achieved = ScaledValue::new(f.poly.eval(x0).abs(), f.log_scale);
    let bound = kernel_norm(&spec, Index::Finite(pc), T::lit(1e-12))?;
    Ok(achieved.ratio(&bound))
}

/// `t ↦ q(x0 − t)`.
fn reflect<T: Real>(q: &TrigPoly<T>, x0: T) -> TrigPoly<T> {
    let mut out = TrigPoly::zero(q.degree());
    out.a0 = q.a0;
    for k in 1..=q.degree() {
        let (s, c) = (T::from_count(k as u64) * x0).sin_cos();
        let (a, b) = (q.cos[k - 1], q.sin[k - 1]);
        out.cos[k - 1] = a * c + b * s;
        out.sin[k - 1] = a * s - b * c;
    }
    out
}

/// Remainder constant `δ = (‖P^{(n)}‖_s/π − main)/bracket` in the kernel-norm
/// asymptotics.
pub fn check_norm_asymptotics<T: Real>(params: &ClassParams<T>, n: u64, s: Index<T>) -> Result<AsymptoticsReport<T>> {
    let params = params.validated()?;
    let s = s.validated()?;
    let spec = KernelSpec::new(params, n, T::lit(KERNEL_EPS))?;
    let norm = kernel_norm(&spec, s, T::lit(1e-12))?;
    let asym = kernel_norm_asymptotic(&spec, s)?;
    let implied_delta = norm.sub(asym.main).ratio(&asym.bracket);
    let in_regime = n0(&params.with_p(s.conjugate()?)).is_ok_and(|m| n >= m);
    Ok(AsymptoticsReport {
        s,
        n,
        kernel_norm: norm,
        main: asym.main,
        bracket: asym.bracket,
        implied_delta,
        in_regime,
    })
}

/// Remainder `Θ = (I_s(v) − F^{1/s})(s − 1) v^{s−1}` at `v = πn^{1−r}/(αr)`.
pub fn check_is_estimate<T: Real>(params: &ClassParams<T>, n: u64, s: T) -> Result<ISReport<T>> {
    let params = params.validated()?;
    if !(s > T::one() && s.is_finite()) {
        return Err(Error::domain(format!("I_s estimate needs 1 < s < inf, got {s}")));
    }
    let v = T::PI() * T::from_count(n).powf(T::one() - params.r) / params.alpha_r();
    let computed = i_s(Index::Finite(s), v)?;
    let f_term = theorem_main_f(s)?;
    Ok(ISReport {
        s: Index::Finite(s),
        n,
        i_s_computed: computed,
        f_term,
        implied_theta: (computed - f_term) * (s - T::one()) * v.powf(s - T::one()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(p: f64) -> ClassParams<f64> {
        ClassParams::new(1.0, 0.5, 0.0, Index::Finite(p)).unwrap()
    }

    #[test]
    fn rhs_p2_main_coefficient() {
        let n = 100;
        let v = rhs_theorem1_general(&params(2.0), n, 1.0, 0.0).unwrap();
        let unit = v.at_scale(-10.0) / (n as f64).powf(0.25);
        assert!((unit - 1.0 / (2.0 * PI * 0.5).sqrt()).abs() < 1e-10);
        assert!(rhs_theorem1_general(&params(2.0), n, 0.0, 1.0).unwrap().is_zero());
        let full = rhs_theorem1_general(&params(2.0), n, 1.0, gamma_bound()).unwrap();
        assert!(full.compare(&v) == Some(std::cmp::Ordering::Greater));
        assert!(rhs_theorem1_general(&params(1.0), n, 1.0, 0.0).is_err());
    }

    #[test]
    fn rhs_p1_example() {
        let v = rhs_theorem1_p1(&params(1.0), 1225, 1.0, 0.0).unwrap();
        assert!((v.at_scale(-35.0) - 35.0 * 2.0 / PI).abs() < 1e-12);
        assert!(rhs_theorem1_p1(&params(1.0), 1225, 0.0, 5.0).unwrap().is_zero());
        let a = rhs_theorem1_p1(&params(1.0), 1225, 1.0, 1.0).unwrap();
        let b = rhs_theorem1_p1(&params(1.0), 1225, 1.0, 2.0).unwrap();
        assert!(b.compare(&a) == Some(std::cmp::Ordering::Greater));
        assert!(rhs_theorem1_p1(&params(2.0), 1225, 1.0, 0.0).is_err());
        let cb = class_bound(&params(1.0), 1225).unwrap();
        let full = rhs_theorem1_p1(&params(1.0), 1225, 1.0, gamma_bound()).unwrap();
        assert_eq!(cb, full);
    }

    #[test]
    fn verify_low_degree_is_trivial() {
        let phi = TrigPoly::cosine(3, 1.0 / PI.sqrt());
        let rep = verify_inequality(&phi, &params(2.0), 8, 1e-8).unwrap();
        assert!(rep.lhs.is_zero() && rep.pass && rep.degenerate);
    }

    #[test]
    fn verify_single_harmonic() {
        let n = 16;
        let phi = TrigPoly::cosine(n, 1.0 / PI.sqrt());
        let rep = verify_inequality(&phi, &params(2.0), n as u64, 1e-8).unwrap();
        let scale = -(n as f64).sqrt();
        assert!((rep.lhs.at_scale(scale) - 1.0 / PI.sqrt()).abs() < 1e-12);
        assert!((rep.en.upper - 1.0).abs() < 1e-12);
        assert!(rep.pass && rep.en_converged);
    }

    #[test]
    fn verify_rejects_outside_ball() {
        let phi = TrigPoly::cosine(5, 2.0);
        assert!(matches!(verify_inequality(&phi, &params(2.0), 4, 1e-6), Err(Error::Contract(_))));
        let mut shifted = TrigPoly::cosine(5, 0.1);
        shifted.a0 = 0.1;
        assert!(matches!(verify_inequality(&shifted, &params(2.0), 4, 1e-6), Err(Error::Contract(_))));
    }

    #[test]
    fn is_estimate_closed_form_s2() {
        let rep = check_is_estimate(&params(2.0), 1225, 2.0).unwrap();
        let v = PI * 35.0 / 0.5;
        let expected = (v.atan().sqrt() - (PI / 2.0).sqrt()) * v;
        assert!((rep.implied_theta - expected).abs() < 1e-6);
        assert!(rep.implied_theta.abs() < 2.0);
        let s3 = check_is_estimate(&params(2.0), 1225, 3.0).unwrap();
        assert!((s3.f_term - 1.0).abs() < 1e-12);
        assert!(check_is_estimate(&params(2.0), 10, 1.0).is_err());
    }

    #[test]
    fn sharpness_rejects_p1() {
        assert!(sharpness_probe(&params(1.0), 64, 0.0).is_err());
    }

    #[test]
    fn sharpness_p2_small() {
        let ratio = sharpness_probe(&params(2.0), 64, 0.3).unwrap();
        assert!(ratio > 0.999 && ratio <= 1.0 + 1e-6, "{ratio}");
    }
}
