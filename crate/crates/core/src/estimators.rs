//! The three estimators of rho and their first-order conditional biases,
//! plus the inverse expected information (sigma2 known).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ar1_model::{Ar1Params, TimeSeries};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// sum y_t y_{t-1} / sum_{t=1..n-1} y_t^2; conditional MLE given Y_1.
    LeastSquares,
    /// sum y_t y_{t-1} / sum_{t=1..n} y_t^2.
    YuleWalker,
    /// sum y_t y_{t-1} / sum_{t=2..n} y_t^2; conditional MLE given Y_n,
    /// obtained from the backward representation.
    BackwardConditional,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::LeastSquares,
        EstimatorKind::YuleWalker,
        EstimatorKind::BackwardConditional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::LeastSquares => "least_squares",
            EstimatorKind::YuleWalker => "yule_walker",
            EstimatorKind::BackwardConditional => "backward_conditional",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "least_squares" | "ls" => Ok(EstimatorKind::LeastSquares),
            "yule_walker" | "yw" => Ok(EstimatorKind::YuleWalker),
            "backward_conditional" | "bc" => Ok(EstimatorKind::BackwardConditional),
            other => Err(Error::Config(format!(
                "unknown estimator {other:?}; expected least_squares, yule_walker or backward_conditional"
            ))),
        }
    }
}

/// Coefficient of n^-1 in the conditional bias of rho_hat given Y_n = y_n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalBias<T> {
    pub b: T,
    pub kind: EstimatorKind,
}

/// Estimate rho from a series.
pub fn estimate<T: Scalar>(kind: EstimatorKind, series: &TimeSeries<T>) -> Result<T> {
    estimate_slice(kind, series.values())
}

pub(crate) fn estimate_slice<T: Scalar>(kind: EstimatorKind, y: &[T]) -> Result<T> {
    let n = y.len();
    if n < 3 {
        return Err(Error::SeriesTooShort(n));
    }
    let mut num = T::zero();
    for t in 1..n {
        num += y[t] * y[t - 1];
    }
    let range = match kind {
        EstimatorKind::LeastSquares => 0..n - 1,
        EstimatorKind::YuleWalker => 0..n,
        EstimatorKind::BackwardConditional => 1..n,
    };
    let mut den = T::zero();
    for t in range {
        den += y[t] * y[t];
    }
    if den <= T::zero() {
        return Err(Error::DegenerateSeries(kind.name()));
    }
    Ok(num / den)
}

/// First-order conditional bias b(theta, y_n) of rho_hat given Y_n = y_n:
/// least-squares: y_n^2 (1 - rho^2) rho / sigma2 - 3 rho;
/// backward-conditional: -2 rho. No formula is available for Yule-Walker.
pub fn conditional_bias<T: Scalar>(
    kind: EstimatorKind,
    params: &Ar1Params<T>,
    y_n: T,
) -> Result<ConditionalBias<T>> {
    let rho = params.rho();
    let b = match kind {
        EstimatorKind::LeastSquares => {
            y_n * y_n * (T::one() - rho * rho) * rho / params.sigma2() - T::cast(3.0) * rho
        }
        EstimatorKind::BackwardConditional => -T::cast(2.0) * rho,
        EstimatorKind::YuleWalker => {
            return Err(Error::UnsupportedBias("yule_walker"));
        }
    };
    Ok(ConditionalBias { b, kind })
}

/// Inverse expected information for rho with sigma2 known:
/// i^{rho rho} = (1 - rho^2) / n.
pub fn inverse_information<T: Scalar>(params: &Ar1Params<T>, n: usize) -> Result<T> {
    if n < 3 {
        return Err(Error::SeriesTooShort(n));
    }
    let rho = params.rho();
    Ok((T::one() - rho * rho) / T::cast(n as f64))
}
