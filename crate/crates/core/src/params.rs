//! Class parameters `(α, r, β, p)`, conjugate exponents and the threshold
//! index `n₀` from which the Lebesgue-type estimates apply.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Integrability index: a finite `p ≥ 1` or the distinguished value `Inf`.
///
/// `Inf` never enters a formula as a floating-point infinity; every formula
/// branches on it explicitly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Index<T> {
    Finite(T),
    Inf,
}

impl<T: Real> Index<T> {
    /// Validated finite index.
    pub fn finite(p: T) -> Result<Self> {
        Index::Finite(p).validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Index::Inf => Ok(self),
            Index::Finite(p) if p >= T::one() && p.is_finite() => Ok(self),
            Index::Finite(p) => Err(Error::domain(format!("index must be >= 1, got {p}"))),
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Index::Inf)
    }

    pub fn finite_value(self) -> Option<T> {
        match self {
            Index::Finite(p) => Some(p),
            Index::Inf => None,
        }
    }

    /// `1/p`, with `1/Inf = 0`.
    pub fn reciprocal(self) -> T {
        match self {
            Index::Finite(p) => p.recip(),
            Index::Inf => T::zero(),
        }
    }

    /// `p′` with `1/p + 1/p′ = 1`.
    pub fn conjugate(self) -> Result<Self> {
        match self.validated()? {
            Index::Inf => Ok(Index::Finite(T::one())),
            Index::Finite(p) if p == T::one() => Ok(Index::Inf),
            Index::Finite(p) => Ok(Index::Finite(p / (p - T::one()))),
        }
    }

    /// `χ(p) = p` for finite `p`, `χ(Inf) = 1`.
    pub fn chi(self) -> T {
        match self {
            Index::Finite(p) => p,
            Index::Inf => T::one(),
        }
    }
}

impl<T: Real> fmt::Display for Index<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(p) => write!(f, "{p}"),
            Index::Inf => f.write_str("inf"),
        }
    }
}

impl<T: Real> FromStr for Index<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Index::Inf),
            _ => {
                let v: f64 = t
                    .parse()
                    .map_err(|_| Error::domain(format!("cannot parse index {s:?}")))?;
                if v.is_infinite() && v > 0.0 {
                    return Ok(Index::Inf);
                }
                Index::finite(T::lit(v))
            }
        }
    }
}

impl<T: Real> Serialize for Index<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Index::Finite(p) => p.serialize(s),
            Index::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Real> Deserialize<'de> for Index<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => Index::finite(T::lit(v)),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Parameters of the class `C^{α,r}_β L_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClassParams<T: Real> {
    pub alpha: T,
    pub r: T,
    pub beta: T,
    pub p: Index<T>,
}

impl<T: Real> ClassParams<T> {
    pub fn new(alpha: T, r: T, beta: T, p: Index<T>) -> Result<Self> {
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(r > T::zero() && r < T::one()) {
            return Err(Error::domain(format!("r must lie in (0, 1), got {r}")));
        }
        if !beta.is_finite() {
            return Err(Error::domain("beta must be finite"));
        }
        Ok(Self {
            alpha,
            r,
            beta,
            p: p.validated()?,
        })
    }

    pub fn validated(self) -> Result<Self> {
        Self::new(self.alpha, self.r, self.beta, self.p)
    }

    pub fn with_beta(self, beta: T) -> Self {
        Self { beta, ..self }
    }

    pub fn with_p(self, p: Index<T>) -> Self {
        Self { p, ..self }
    }

    /// `α·r`, the combination every asymptotic formula is written in.
    pub fn alpha_r(&self) -> T {
        self.alpha * self.r
    }

    pub fn p_conjugate(&self) -> Index<T> {
        self.p.conjugate().expect("validated index")
    }

    pub fn chi(&self) -> T {
        self.p.chi()
    }

    /// `(cos(βπ/2), sin(βπ/2))`, exact for integer `β`.
    pub fn phase(&self) -> (T, T) {
        phase(self.beta)
    }
}

pub(crate) fn phase<T: Real>(beta: T) -> (T, T) {
    if beta.fract() == T::zero() {
        let four = T::lit(4.0);
        let q = (beta - (beta / four).floor() * four).to_u8().unwrap_or(0) % 4;
        return match q {
            0 => (T::one(), T::zero()),
            1 => (T::zero(), T::one()),
            2 => (-T::one(), T::zero()),
            _ => (T::zero(), -T::one()),
        };
    }
    let theta = beta * T::FRAC_PI_2();
    (theta.cos(), theta.sin())
}

pub fn conjugate<T: Real>(p: Index<T>) -> Result<Index<T>> {
    p.conjugate()
}

/// Right-hand side of the threshold condition defining `n₀`.
pub fn threshold<T: Real>(p: Index<T>) -> Result<T> {
    let base = (T::lit(3.0) * T::PI()).powi(3).recip();
    match p.validated()? {
        Index::Finite(v) if v == T::one() => Ok(T::lit(14.0).recip()),
        Index::Finite(v) => Ok(base * (v - T::one()) / v),
        Index::Inf => Ok(base),
    }
}

/// Left-hand side of the threshold condition,
/// `(αr)^{-1} n^{-r} + αr·χ(p)·n^{-(1-r)}`.
pub fn condition_value<T: Real>(params: &ClassParams<T>, n: u64) -> T {
    let n = T::from_count(n);
    let ar = params.alpha_r();
    n.powf(-params.r) / ar + ar * params.chi() * n.powf(params.r - T::one())
}

/// Relative slack applied when comparing the condition against the threshold,
/// so that exact equality (e.g. `n = 1225` for `α = 1, r = 1/2, p = 1`)
/// survives rounding in `powf`.
fn comparison_slack<T: Real>() -> T {
    T::lit(64.0) * T::epsilon()
}

pub fn condition_holds<T: Real>(params: &ClassParams<T>, n: u64, thr: T) -> bool {
    condition_value(params, n) <= thr * (T::one() + comparison_slack::<T>())
}

/// Smallest `n ≥ 1` satisfying the threshold condition.
///
/// The condition's left side is strictly decreasing in `n`, so exponential
/// bracketing followed by integer bisection finds the first admissible `n`.
pub fn n0<T: Real>(params: &ClassParams<T>) -> Result<u64> {
    let thr = threshold(params.p)?;
    if condition_holds(params, 1, thr) {
        return Ok(1);
    }
    let mut lo = 1u64; // fails
    let mut hi = 2u64;
    while !condition_holds(params, hi, thr) {
        lo = hi;
        hi = hi
            .checked_mul(2)
            .filter(|&h| h < (1u64 << 62))
            .ok_or_else(|| Error::domain("n0 exceeds the representable index range"))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if condition_holds(params, mid, thr) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
