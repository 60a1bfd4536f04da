//! Observation channels `P(Y | X_S, β_S)`.
//!
//! Three models share one interface: Boolean-OR group testing (optionally
//! with a symmetric output flip), 1-bit compressive sensing (sign of a
//! noisy inner product), and linear compressive sensing (noisy inner
//! product observed directly). Each model's likelihood depends on the
//! design vector only through its on-support values, which is the
//! conditional-independence property everything downstream relies on.

use crate::error::{Error, Result};
use crate::scalar::{log_std_normal_cdf, real, std_normal_cdf, Real};
use crate::types::{LatentCoefficients, Observation};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Output alphabet of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputAlphabet {
    Binary,
    Real,
}

// ---------------------------------------------------------------------------
// Group testing
// ---------------------------------------------------------------------------

/// Boolean-OR channel: a test is positive iff it includes a defective
/// item; the outcome is flipped with probability `crossover`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupTestingModel<T> {
    crossover: T,
}

impl<T: Real> GroupTestingModel<T> {
    /// `crossover` must lie in `[0, 0.5)`; 0 is the noiseless channel.
    pub fn new(crossover: T) -> Result<Self> {
        if !(crossover >= T::zero() && crossover < real(0.5)) {
            return Err(Error::domain(format!(
                "crossover must be in [0, 0.5), got {crossover}"
            )));
        }
        Ok(GroupTestingModel { crossover })
    }

    pub fn noiseless() -> Self {
        GroupTestingModel {
            crossover: T::zero(),
        }
    }

    pub fn crossover(&self) -> T {
        self.crossover
    }

    fn or(x_s: &[T]) -> bool {
        x_s.iter().any(|&v| v != T::zero())
    }

    pub fn positive_probability(&self, x_s: &[T]) -> T {
        if Self::or(x_s) {
            T::one() - self.crossover
        } else {
            self.crossover
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, x_s: &[T], rng: &mut R) -> Observation<T> {
        let clean = Self::or(x_s);
        let flip = self.crossover > T::zero() && T::uniform_01(rng) < self.crossover;
        Observation::Bit(clean ^ flip)
    }

    pub fn log_likelihood(&self, y: bool, x_s: &[T]) -> T {
        let p1 = self.positive_probability(x_s);
        if y {
            p1.ln()
        } else {
            (T::one() - p1).ln()
        }
    }
}

// ---------------------------------------------------------------------------
// 1-bit compressive sensing
// ---------------------------------------------------------------------------

/// Sign channel: `Y = 1` iff `<x_S, β_S> + W >= 0` with
/// `W ~ Normal(0, 1/SNR)`, so `P(Y=1) = Φ(√SNR · <x_S, β_S>)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneBitCsModel<T> {
    snr: T,
}

impl<T: Real> OneBitCsModel<T> {
    pub fn new(snr: T) -> Result<Self> {
        if !(snr > T::zero() && snr.is_finite()) {
            return Err(Error::domain(format!("SNR must be positive, got {snr}")));
        }
        Ok(OneBitCsModel { snr })
    }

    pub fn snr(&self) -> T {
        self.snr
    }

    pub fn positive_probability(&self, x_s: &[T], beta: &LatentCoefficients<T>) -> T {
        std_normal_cdf(self.snr.sqrt() * dot(x_s, beta.values()))
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        x_s: &[T],
        beta: &LatentCoefficients<T>,
        rng: &mut R,
    ) -> Observation<T> {
        let noise = T::std_normal(rng) / self.snr.sqrt();
        Observation::Bit(dot(x_s, beta.values()) + noise >= T::zero())
    }

    pub fn log_likelihood(&self, y: bool, x_s: &[T], beta: &LatentCoefficients<T>) -> T {
        let arg = self.snr.sqrt() * dot(x_s, beta.values());
        // log Φ(arg) for y=1, log Φ(-arg) for y=0; tail-safe.
        if y {
            log_std_normal_cdf(arg)
        } else {
            log_std_normal_cdf(-arg)
        }
    }
}

// ---------------------------------------------------------------------------
// Linear compressive sensing
// ---------------------------------------------------------------------------

/// Linear channel: `Y = <x_S, β_S> + W` with `W ~ Normal(0, 1/SNR)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCsModel<T> {
    snr: T,
}

impl<T: Real> LinearCsModel<T> {
    pub fn new(snr: T) -> Result<Self> {
        if !(snr > T::zero() && snr.is_finite()) {
            return Err(Error::domain(format!("SNR must be positive, got {snr}")));
        }
        Ok(LinearCsModel { snr })
    }

    pub fn snr(&self) -> T {
        self.snr
    }

    pub fn noise_variance(&self) -> T {
        T::one() / self.snr
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        x_s: &[T],
        beta: &LatentCoefficients<T>,
        rng: &mut R,
    ) -> Observation<T> {
        let noise = T::std_normal(rng) * self.noise_variance().sqrt();
        Observation::Real(dot(x_s, beta.values()) + noise)
    }

    /// Log density of `y` under `Normal(<x_S, β_S>, 1/SNR)`.
    pub fn log_likelihood(&self, y: T, x_s: &[T], beta: &LatentCoefficients<T>) -> T {
        let var = self.noise_variance();
        let resid = y - dot(x_s, beta.values());
        let two = real::<T>(2.0);
        let two_pi = real::<T>(2.0 * std::f64::consts::PI);
        -(two_pi * var).ln() / two - resid * resid / (two * var)
    }
}

// ---------------------------------------------------------------------------
// Model enum
// ---------------------------------------------------------------------------

/// Any of the three observation models, behind one interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObservationModel<T> {
    GroupTesting(GroupTestingModel<T>),
    OneBitCs(OneBitCsModel<T>),
    LinearCs(LinearCsModel<T>),
}

impl<T: Real> ObservationModel<T> {
    pub fn group_testing(crossover: T) -> Result<Self> {
        Ok(ObservationModel::GroupTesting(GroupTestingModel::new(
            crossover,
        )?))
    }

    pub fn one_bit_cs(snr: T) -> Result<Self> {
        Ok(ObservationModel::OneBitCs(OneBitCsModel::new(snr)?))
    }

    pub fn linear_cs(snr: T) -> Result<Self> {
        Ok(ObservationModel::LinearCs(LinearCsModel::new(snr)?))
    }

    pub fn output_alphabet(&self) -> OutputAlphabet {
        match self {
            ObservationModel::GroupTesting(_) | ObservationModel::OneBitCs(_) => {
                OutputAlphabet::Binary
            }
            ObservationModel::LinearCs(_) => OutputAlphabet::Real,
        }
    }

    /// Whether the latent coefficients carry information (Rademacher
    /// prior) or are a unit placeholder.
    pub fn has_latent_prior(&self) -> bool {
        !matches!(self, ObservationModel::GroupTesting(_))
    }

    fn check_shapes(&self, x_s: &[T], beta: &LatentCoefficients<T>) -> Result<()> {
        if x_s.len() != beta.len() {
            return Err(Error::domain(format!(
                "on-support design has {} entries but β has {}",
                x_s.len(),
                beta.len()
            )));
        }
        Ok(())
    }

    /// One draw from `P(Y | x_S, β_S)`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        x_s: &[T],
        beta: &LatentCoefficients<T>,
        rng: &mut R,
    ) -> Result<Observation<T>> {
        self.check_shapes(x_s, beta)?;
        Ok(match self {
            ObservationModel::GroupTesting(m) => m.sample(x_s, rng),
            ObservationModel::OneBitCs(m) => m.sample(x_s, beta, rng),
            ObservationModel::LinearCs(m) => m.sample(x_s, beta, rng),
        })
    }

    /// `log P(y | x_S, β_S)` (log density for the linear model).
    pub fn log_likelihood(
        &self,
        y: &Observation<T>,
        x_s: &[T],
        beta: &LatentCoefficients<T>,
    ) -> Result<T> {
        self.check_shapes(x_s, beta)?;
        match (self, y) {
            (ObservationModel::GroupTesting(m), Observation::Bit(b)) => {
                Ok(m.log_likelihood(*b, x_s))
            }
            (ObservationModel::OneBitCs(m), Observation::Bit(b)) => {
                Ok(m.log_likelihood(*b, x_s, beta))
            }
            (ObservationModel::LinearCs(m), Observation::Real(v)) => {
                Ok(m.log_likelihood(*v, x_s, beta))
            }
            _ => Err(Error::domain(
                "observation kind does not match the model's output alphabet",
            )),
        }
    }

    /// Closed-form `P(Y = 1 | x_S, β_S)` for binary-output models.
    pub fn positive_probability(&self, x_s: &[T], beta: &LatentCoefficients<T>) -> Result<T> {
        self.check_shapes(x_s, beta)?;
        match self {
            ObservationModel::GroupTesting(m) => Ok(m.positive_probability(x_s)),
            ObservationModel::OneBitCs(m) => Ok(m.positive_probability(x_s, beta)),
            ObservationModel::LinearCs(_) => Err(Error::unsupported(
                "positive_probability is undefined for a real-output model",
            )),
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}
