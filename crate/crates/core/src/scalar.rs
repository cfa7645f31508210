//! Scalar abstraction shared by every numerical routine in the crate.

use std::cell::RefCell;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::num_complex::Complex;
use rustfft::{FftNum, FftPlanner};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar: `f32` or `f64`.
///
/// FFT access is routed through the trait so generic code never has to name
/// `rustfft::FftNum` (whose `Signed` supertrait would make `abs`/`signum`
/// ambiguous next to `Float`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Unnormalized forward transform, `X_k = Σ_j x_j e^{-2πijk/N}`.
    fn fft_forward(buf: &mut [Complex<Self>]);

    /// Unnormalized inverse transform, `x_j = Σ_k X_k e^{+2πijk/N}`.
    fn fft_inverse(buf: &mut [Complex<Self>]);

    /// Converts an `f64` constant into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

thread_local! {
    static PLANNER_F64: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static PLANNER_F32: RefCell<FftPlanner<f32>> = RefCell::new(FftPlanner::new());
}

fn run<T: FftNum>(planner: &RefCell<FftPlanner<T>>, buf: &mut [Complex<T>], inverse: bool) {
    if buf.len() <= 1 {
        return;
    }
    let fft = {
        let mut p = planner.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    };
    fft.process(buf);
}

impl Real for f64 {
    fn fft_forward(buf: &mut [Complex<f64>]) {
        PLANNER_F64.with(|p| run(p, buf, false));
    }
    fn fft_inverse(buf: &mut [Complex<f64>]) {
        PLANNER_F64.with(|p| run(p, buf, true));
    }
}

impl Real for f32 {
    fn fft_forward(buf: &mut [Complex<f32>]) {
        PLANNER_F32.with(|p| run(p, buf, false));
    }
    fn fft_inverse(buf: &mut [Complex<f32>]) {
        PLANNER_F32.with(|p| run(p, buf, true));
    }
}

/// Pairwise (cascade) summation; keeps rounding at O(log n · ε).
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= 32 {
        return xs.iter().copied().fold(T::zero(), |a, b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
