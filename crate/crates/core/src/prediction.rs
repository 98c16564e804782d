//! Estimative and improved upper prediction limits and equal-density
//! prediction intervals.

use serde::{Deserialize, Serialize};

use crate::ar1_model::{conditional_predictive, Ar1Params, PredictiveDist};
use crate::correction::{check_alpha, d_from_c, delta_from_c, Correction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Estimative,
    Improved,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Estimative => "estimative",
            Flavor::Improved => "improved",
        }
    }
}

/// Upper 1-alpha prediction limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperLimit<T> {
    pub value: T,
    pub alpha: T,
    pub flavor: Flavor,
}

/// Equal-density 1-alpha prediction interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralInterval<T> {
    pub lower: T,
    pub upper: T,
    pub alpha: T,
    pub flavor: Flavor,
}

impl<T: Scalar> CentralInterval<T> {
    pub fn length(&self) -> T {
        self.upper - self.lower
    }
}

/// Estimative limit z_alpha(theta_hat, y_n): the 1-alpha quantile of the
/// plug-in predictive distribution.
pub fn estimative_upper_limit<T: Scalar>(
    theta_hat: &Ar1Params<T>,
    y_n: T,
    k: u32,
    alpha: T,
) -> Result<UpperLimit<T>> {
    check_alpha(alpha)?;
    let dist = conditional_predictive(theta_hat, y_n, k)?;
    Ok(UpperLimit {
        value: dist.quantile(T::one() - alpha)?,
        alpha,
        flavor: Flavor::Estimative,
    })
}

/// Equal-density interval for a Gaussian predictive, in closed form:
/// mean -/+ sd * Phi^{-1}(1 - alpha/2).
pub fn equal_density_interval<T: Scalar>(
    dist: &PredictiveDist<T>,
    alpha: T,
) -> Result<CentralInterval<T>> {
    check_alpha(alpha)?;
    let half = T::cast(0.5);
    let hw = dist.sd() * (T::one() - alpha * half).norm_quantile();
    Ok(CentralInterval {
        lower: dist.mean() - hw,
        upper: dist.mean() + hw,
        alpha,
        flavor: Flavor::Estimative,
    })
}

/// Generic equal-density interval for any continuous unimodal density given
/// by `pdf`/`cdf` with known mode: bisection on the density level until the
/// enclosed mass matches 1 - alpha to within 1e-10. The Gaussian closed
/// form above is the fast path; this solver backs it up and any future
/// non-Gaussian predictive.
pub fn equal_density_interval_unimodal<P, C>(
    pdf: P,
    cdf: C,
    mode: f64,
    alpha: f64,
) -> Result<(f64, f64)>
where
    P: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
{
    const MASS_TOL: f64 = 1e-10;
    const MAX_ITER: usize = 200;

    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ProbabilityDomain(alpha));
    }
    let f_mode = pdf(mode);
    if !(f_mode > 0.0) || !f_mode.is_finite() {
        return Err(Error::SolverFailure(format!(
            "density at the mode is not positive: {f_mode}"
        )));
    }

    // endpoints at density level `lambda`, found by doubling + bisection
    let endpoints = |lambda: f64| -> Result<(f64, f64)> {
        let side = |dir: f64| -> Result<f64> {
            let mut step = 1.0;
            let mut outer = mode + dir * step;
            let mut guard = 0;
            while pdf(outer) > lambda {
                step *= 2.0;
                outer = mode + dir * step;
                guard += 1;
                if guard > 200 {
                    return Err(Error::SolverFailure(
                        "could not bracket an equal-density endpoint".into(),
                    ));
                }
            }
            let mut inner = mode;
            for _ in 0..200 {
                let mid = 0.5 * (inner + outer);
                if pdf(mid) > lambda {
                    inner = mid;
                } else {
                    outer = mid;
                }
            }
            Ok(0.5 * (inner + outer))
        };
        Ok((side(-1.0)?, side(1.0)?))
    };

    let target = 1.0 - alpha;
    let mut lo = 0.0; // mass(lambda -> 0) -> 1
    let mut hi = f_mode; // mass(f_mode) = 0
    let mut result = None;
    for _ in 0..MAX_ITER {
        let lambda = 0.5 * (lo + hi);
        let (l, u) = endpoints(lambda)?;
        let mass = cdf(u) - cdf(l);
        if (mass - target).abs() <= MASS_TOL {
            result = Some((l, u));
            break;
        }
        if mass > target {
            lo = lambda;
        } else {
            hi = lambda;
        }
    }
    result.ok_or_else(|| {
        Error::SolverFailure(format!(
            "mass did not converge to {target} within {MAX_ITER} level bisections"
        ))
    })
}

/// Improved limit z+ = z_alpha(theta_hat, y_n) + d, with
/// d = -c n^-1 / f(z_alpha; theta_hat, y_n).
pub fn improved_upper_limit<T: Scalar>(
    theta_hat: &Ar1Params<T>,
    y_n: T,
    k: u32,
    alpha: T,
    corr: &Correction<T>,
) -> Result<UpperLimit<T>> {
    check_alpha(alpha)?;
    let dist = conditional_predictive(theta_hat, y_n, k)?;
    let z = dist.quantile(T::one() - alpha)?;
    let d = d_from_c(corr, dist.pdf(z))?;
    Ok(UpperLimit {
        value: z + d,
        alpha,
        flavor: Flavor::Improved,
    })
}

/// Improved interval [l - delta, u + delta] with the equal split
/// delta = -c n^-1 / (2 f(u_alpha; theta_hat, y_n)).
pub fn improved_interval<T: Scalar>(
    theta_hat: &Ar1Params<T>,
    y_n: T,
    k: u32,
    alpha: T,
    corr: &Correction<T>,
) -> Result<CentralInterval<T>> {
    check_alpha(alpha)?;
    let dist = conditional_predictive(theta_hat, y_n, k)?;
    let est = equal_density_interval(&dist, alpha)?;
    let delta = delta_from_c(corr, dist.pdf(est.upper))?;
    Ok(CentralInterval {
        lower: est.lower - delta,
        upper: est.upper + delta,
        alpha,
        flavor: Flavor::Improved,
    })
}
