//! Scalar abstraction over the floating-point type used by the model code.
//!
//! All core math is generic over [`Scalar`]; `f64` is the working type and
//! `f32` is supported for callers that want it. Normal-distribution special
//! functions are evaluated in `f64` internally so both widths see the same
//! (full) accuracy.

use std::fmt::{Debug, Display};
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::normal;

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + AddAssign + Debug + Display + Send + Sync + 'static
{
    /// One standard-normal draw from `rng`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn cast(x: f64) -> Self {
        Self::from_f64(x).expect("f64 -> Scalar conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar -> f64 conversion")
    }

    /// Standard normal cdf.
    fn norm_cdf(self) -> Self {
        Self::cast(normal::cdf(self.as_f64()))
    }

    /// Standard normal density.
    fn norm_pdf(self) -> Self {
        Self::cast(normal::pdf(self.as_f64()))
    }

    /// Standard normal quantile; caller guarantees the argument is in (0, 1).
    fn norm_quantile(self) -> Self {
        Self::cast(normal::quantile(self.as_f64()))
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}
