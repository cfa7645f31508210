//! Lebesgue-type inequalities for Fourier sums on classes of generalized
//! Poisson integrals: kernel asymptotics, best approximation with certified
//! bounds, and randomized verification of the resulting inequalities.
//!
//! The numerics are generic over [`Real`] (`f64` or `f32`); the aliases at the
//! crate root fix the scalar to `f64`.

pub mod bestapprox;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod lebesgue;
mod linalg;
pub mod params;
mod quad;
pub mod scalar;
pub mod scaled;
pub mod specfun;
pub mod trig;

pub use bestapprox::{best_approx_l2, best_approx_lp, solve_lp, ApproxResult};
pub use error::{Error, Result};
pub use harness::{run_experiment, sample_unit_ball, ExperimentConfig, OutputFormat, Summary};
pub use kernel::{kernel_norm, kernel_norm_asymptotic, KernelSpec};
pub use lebesgue::{
    check_is_estimate, check_norm_asymptotics, class_bound, gamma_bound, rhs_theorem1, sharpness_probe,
    verify_inequality, BoundReport, ISReport,
};
pub use params::{n0, ClassParams, Index};
pub use scalar::Real;
pub use scaled::ScaledValue;
pub use trig::{convolve_kernel, deviation, partial_sum, TrigPoly};

pub type IndexF64 = Index<f64>;
pub type ClassParamsF64 = ClassParams<f64>;
pub type TrigPolyF64 = TrigPoly<f64>;
pub type ScaledValueF64 = ScaledValue<f64>;
pub type KernelSpecF64 = KernelSpec<f64>;
pub type ApproxResultF64 = ApproxResult<f64>;
pub type BoundReportF64 = BoundReport<f64>;
pub type TrigPolyF32 = TrigPoly<f32>;
pub type ClassParamsF32 = ClassParams<f32>;
