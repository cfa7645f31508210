//! Numbers stored as `mantissa · e^{log_scale}`.
//!
//! Kernel quantities carry the factor `e^{-αn^r}`, which underflows double
//! precision long before the interesting range of `n`; keeping it in the
//! exponent lets all mantissa arithmetic stay O(1).

use std::cmp::Ordering;
use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScaledValue<T: Real> {
    pub mantissa: T,
    pub log_scale: T,
}

impl<T: Real> ScaledValue<T> {
    /// Normalized so that `|mantissa| ∈ [1, e)`, or `mantissa = 0`.
    pub fn new(mantissa: T, log_scale: T) -> Self {
        if mantissa == T::zero() || !mantissa.is_finite() {
            return Self { mantissa, log_scale };
        }
        let shift = mantissa.abs().ln().floor();
        let mut m = mantissa * (-shift).exp();
        let mut l = log_scale + shift;
        // Rounding in exp/ln can leave |m| a hair outside [1, e).
        if m.abs() >= T::E() {
            m = m / T::E();
            l += T::one();
        } else if m.abs() < T::one() {
            m = m * T::E();
            l -= T::one();
        }
        Self {
            mantissa: m,
            log_scale: l,
        }
    }

    pub fn zero() -> Self {
        Self {
            mantissa: T::zero(),
            log_scale: T::zero(),
        }
    }

    pub fn from_value(v: T) -> Self {
        Self::new(v, T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == T::zero()
    }

    /// Plain value; may underflow to zero.
    pub fn value(&self) -> T {
        if self.is_zero() {
            return T::zero();
        }
        self.mantissa * self.log_scale.exp()
    }

    /// `ln |value|`.
    pub fn ln_abs(&self) -> T {
        self.mantissa.abs().ln() + self.log_scale
    }

    /// The number expressed as a multiple of `e^{log_scale}`.
    pub fn at_scale(&self, log_scale: T) -> T {
        if self.is_zero() {
            return T::zero();
        }
        self.mantissa * (self.log_scale - log_scale).exp()
    }

    pub fn scale_by(self, factor: T) -> Self {
        Self::new(self.mantissa * factor, self.log_scale)
    }

    pub fn add(self, other: Self) -> Self {
        let l = if self.is_zero() {
            other.log_scale
        } else if other.is_zero() {
            self.log_scale
        } else {
            self.log_scale.max(other.log_scale)
        };
        Self::new(self.at_scale(l) + other.at_scale(l), l)
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.scale_by(-T::one()))
    }

    /// `self / other` as a plain ratio.
    pub fn ratio(&self, other: &Self) -> T {
        (self.mantissa / other.mantissa) * (self.log_scale - other.log_scale).exp()
    }

    pub fn compare(&self, other: &Self) -> Option<Ordering> {
        let l = self.log_scale.max(other.log_scale);
        self.at_scale(l).partial_cmp(&other.at_scale(l))
    }
}

impl<T: Real> Mul for ScaledValue<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.mantissa * rhs.mantissa, self.log_scale + rhs.log_scale)
    }
}

impl<T: Real> Div for ScaledValue<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::new(self.mantissa / rhs.mantissa, self.log_scale - rhs.log_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_mantissa() {
        let v = ScaledValue::new(1234.5f64, -35.0);
        assert!(v.mantissa >= 1.0 && v.mantissa < std::f64::consts::E);
        assert!((v.at_scale(-35.0) - 1234.5).abs() < 1e-10);
        let neg = ScaledValue::new(-0.01f64, 0.0);
        assert!(neg.mantissa <= -1.0);
        assert!((neg.value() + 0.01).abs() < 1e-16);
    }

    #[test]
    fn survives_underflow() {
        let tiny = ScaledValue::new(2.0f64, -2000.0);
        assert_eq!(tiny.value(), 0.0);
        let other = ScaledValue::new(3.0f64, -2000.0);
        assert!((other.ratio(&tiny) - 1.5).abs() < 1e-14);
        let sum = tiny.add(other);
        assert!((sum.at_scale(-2000.0) - 5.0).abs() < 1e-12);
        assert_eq!(tiny.compare(&other), Some(Ordering::Less));
        assert!((tiny.ln_abs() - (2f64.ln() - 2000.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_is_preserved() {
        let z = ScaledValue::new(0.0f64, -10.0);
        assert!(z.is_zero());
        assert_eq!(z.value(), 0.0);
        let s = z.add(ScaledValue::new(1.0, -10.0));
        assert!((s.at_scale(-10.0) - 1.0).abs() < 1e-15);
    }
}
