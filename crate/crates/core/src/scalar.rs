//! Floating-point scalar abstraction.
//!
//! All information quantities and probabilities in this crate are generic
//! over a [`Real`] scalar so the same kernels run at `f32` or `f64`. The
//! crate root exports concrete aliases ([`crate::Scalar`], [`crate::Nats`])
//! used by the simulation harness and CLI, which are fixed to `f64`.

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar: `f32` or `f64`.
///
/// Extends `num_traits::Float` with the special functions the bound
/// evaluators need (log-gamma, error function) and with seeded sampling
/// of the standard distributions used by the Monte-Carlo estimators.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + serde::Serialize
    + 'static
{
    /// Natural log of the gamma function, `ln Γ(x)` for `x > 0`.
    fn ln_gamma(self) -> Self;

    /// Gauss error function.
    fn erf(self) -> Self;

    /// Complementary error function, accurate in the upper tail.
    fn erfc(self) -> Self;

    /// `ln 2`, the nats-per-bit conversion factor.
    fn ln_2() -> Self;

    /// One draw from the standard normal distribution.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from `Uniform[0, 1)`.
    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f64 {
    fn ln_gamma(self) -> Self {
        libm::lgamma(self)
    }

    fn erf(self) -> Self {
        libm::erf(self)
    }

    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    fn ln_2() -> Self {
        std::f64::consts::LN_2
    }

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f64>()
    }
}

impl Real for f32 {
    fn ln_gamma(self) -> Self {
        libm::lgammaf(self)
    }

    fn erf(self) -> Self {
        libm::erff(self)
    }

    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    fn ln_2() -> Self {
        std::f32::consts::LN_2
    }

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f32>()
    }
}

/// Convert an `f64` constant into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    <T as NumCast>::from(x).expect("f64 constant representable in scalar type")
}

/// Standard normal CDF, `Φ(x) = P(Z ≤ x)`.
///
/// Computed through `erfc` so the lower tail keeps full relative accuracy.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    let half = real::<T>(0.5);
    let sqrt2 = real::<T>(std::f64::consts::SQRT_2);
    half * (-x / sqrt2).erfc()
}

/// Log of the standard normal CDF.
///
/// Direct evaluation through `erfc` while the CDF is representable;
/// deeper in the tail an asymptotic expansion takes over:
/// `ln Φ(x) ≈ -x²/2 - ln(-x) - ln√(2π) + ln(1 - 1/x² + 3/x⁴)`.
pub fn log_std_normal_cdf<T: Real>(x: T) -> T {
    // Stay a safety margin above the scalar type's underflow threshold.
    let switch = -real::<T>(0.85)
        * (-real::<T>(2.0) * T::min_positive_value().ln()).sqrt();
    if x > switch {
        std_normal_cdf(x).ln()
    } else {
        let x2 = x * x;
        let half = real::<T>(0.5);
        let ln_sqrt_2pi = real::<T>(0.5 * (2.0 * std::f64::consts::PI).ln());
        let correction = (T::one() / x2) * (real::<T>(3.0) / x2 - T::one());
        -half * x2 - (-x).ln() - ln_sqrt_2pi + correction.ln_1p()
    }
}

/// Arithmetic mean that returns the common value exactly when all inputs
/// are equal.
///
/// Computes `v₀ + mean(vᵢ - v₀)`, so a constant slice averages to its
/// value with no rounding. Used wherever a downstream identity requires
/// that the mean of an all-equal profile reproduce the per-step value
/// bit for bit.
pub fn stable_mean<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let v0 = values[0];
    let sum_dev: T = values.iter().map(|&v| v - v0).sum();
    v0 + sum_dev / real::<T>(values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_cdf_reference_values() {
        assert_relative_eq!(std_normal_cdf(0.0_f64), 0.5, max_relative = 1e-15);
        assert_relative_eq!(
            std_normal_cdf(1.0_f64),
            0.8413447460685429,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            std_normal_cdf(-1.0_f64),
            0.15865525393145705,
            max_relative = 1e-14
        );
    }

    #[test]
    fn normal_cdf_f32_matches_f64() {
        for &x in &[-3.0f32, -0.5, 0.0, 0.5, 3.0] {
            let wide = std_normal_cdf(x as f64) as f32;
            assert!((std_normal_cdf(x) - wide).abs() < 1e-6);
        }
    }

    #[test]
    fn log_cdf_continuous_across_switch() {
        // The direct and asymptotic branches must agree near the split.
        for &x in &[-32.0_f64, -33.9, -34.1, -36.0] {
            let asym = {
                let x2 = x * x;
                -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
                    + (-1.0 / x2 + 3.0 / (x2 * x2)).ln_1p()
            };
            assert_relative_eq!(log_std_normal_cdf(x), asym, max_relative = 1e-6);
        }
        // Deep tail stays finite.
        assert!(log_std_normal_cdf(-300.0_f64).is_finite());
        assert_relative_eq!(log_std_normal_cdf(0.0_f64), 0.5f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn stable_mean_exact_on_constant_input() {
        let v = 0.1_f64;
        let xs = vec![v; 7];
        assert_eq!(stable_mean(&xs), v);
        let mixed = [1.0, 2.0, 4.0];
        assert_relative_eq!(stable_mean(&mixed), 7.0 / 3.0, max_relative = 1e-15);
    }
}
