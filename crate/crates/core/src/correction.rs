//! The coverage-defect coefficient c_alpha n^-1 for estimative prediction
//! limits and equal-density intervals, in closed form (Gaussian AR(1),
//! sigma2 known, k = 1) and by conditional Monte-Carlo simulation, plus the
//! conversions to the limit shift d and the interval shift delta.

use serde::{Deserialize, Serialize};

use crate::ar1_model::{
    conditional_predictive, Ar1Params, SeedSpec, simulate_backward_into,
};
use crate::error::{Error, Result};
use crate::estimators::{conditional_bias, estimate_slice, inverse_information, EstimatorKind};
use crate::mc::replicate_means;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Limit,
    Interval,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Limit => "limit",
            Target::Interval => "interval",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    ClosedForm,
    Simulated,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::ClosedForm => "closed_form",
            Source::Simulated => "simulated",
        }
    }
}

/// A value of c_alpha(theta, y_n) n^-1 together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction<T> {
    pub c_over_n: T,
    /// Monte-Carlo standard error; 0 for the closed form.
    pub std_error: T,
    pub target: Target,
    pub source: Source,
    pub n: usize,
    pub alpha: T,
}

/// Closed-form c_alpha n^-1 for the upper limit (k = 1, sigma2 known).
///
/// With z* = Phi^{-1}(1 - alpha) and G(rho_hat) =
/// Phi(((rho_hat - rho) y_n + sigma z*) / sigma):
/// dG/drho_hat = phi(z*) y_n / sigma, d2G/drho_hat2 = -z* phi(z*) y_n^2 / sigma2,
/// so c n^-1 = phi(z*) (y_n/sigma) b n^-1 - (1/2) z* phi(z*) (y_n^2/sigma2) i^{rr}.
pub fn closed_form_c_limit<T: Scalar>(
    params: &Ar1Params<T>,
    y_n: T,
    alpha: T,
    n: usize,
    kind: EstimatorKind,
) -> Result<Correction<T>> {
    check_alpha(alpha)?;
    let bias = conditional_bias(kind, params, y_n)?;
    let irr = inverse_information(params, n)?;
    let z = (T::one() - alpha).norm_quantile();
    let phi_z = z.norm_pdf();
    let sigma = params.sigma();
    let half = T::cast(0.5);
    let nf = T::cast(n as f64);
    let c_over_n = phi_z * (y_n / sigma) * bias.b / nf
        - half * z * phi_z * (y_n * y_n / params.sigma2()) * irr;
    Ok(Correction {
        c_over_n,
        std_error: T::zero(),
        target: Target::Limit,
        source: Source::ClosedForm,
        n,
        alpha,
    })
}

/// Closed-form c_alpha n^-1 for the equal-density interval (k = 1, sigma2
/// known). The predictive density is symmetric, so the first-derivative
/// term vanishes and the bias does not appear:
/// c n^-1 = -z* phi(z*) (y_n^2/sigma2) i^{rr} with z* = Phi^{-1}(1 - alpha/2).
pub fn closed_form_c_interval<T: Scalar>(
    params: &Ar1Params<T>,
    y_n: T,
    alpha: T,
    n: usize,
    _kind: EstimatorKind,
) -> Result<Correction<T>> {
    check_alpha(alpha)?;
    let irr = inverse_information(params, n)?;
    let half = T::cast(0.5);
    let z = (T::one() - alpha * half).norm_quantile();
    let phi_z = z.norm_pdf();
    let c_over_n = -z * phi_z * (y_n * y_n / params.sigma2()) * irr;
    Ok(Correction {
        c_over_n,
        std_error: T::zero(),
        target: Target::Interval,
        source: Source::ClosedForm,
        n,
        alpha,
    })
}

/// Limit shift d = -c n^-1 / f(z_alpha).
pub fn d_from_c<T: Scalar>(corr: &Correction<T>, f_at_limit: T) -> Result<T> {
    if corr.target != Target::Limit {
        return Err(Error::TargetMismatch {
            expected: "limit",
            got: corr.target.name(),
        });
    }
    shift(corr.c_over_n, f_at_limit, T::one())
}

/// Equal-split interval shift delta = -c n^-1 / (2 f(u_alpha)).
/// f(l_alpha) = f(u_alpha), so either endpoint density is valid here.
pub fn delta_from_c<T: Scalar>(corr: &Correction<T>, f_at_u: T) -> Result<T> {
    if corr.target != Target::Interval {
        return Err(Error::TargetMismatch {
            expected: "interval",
            got: corr.target.name(),
        });
    }
    shift(corr.c_over_n, f_at_u, T::cast(2.0))
}

fn shift<T: Scalar>(c_over_n: T, f: T, denom_factor: T) -> Result<T> {
    if !(f > T::cast(1e-300)) {
        return Err(Error::VanishingDensity);
    }
    Ok(-c_over_n / (denom_factor * f))
}

/// Simulation-based c_alpha n^-1: draws `m` backward-conditional series of
/// length `n` pinned at y_n under `params_plug`, estimates rho for each,
/// and averages the exact conditional mass G assigned by the resulting
/// estimative limit (or interval), minus (1 - alpha). Works for any
/// estimator; no bias formula is needed. Deterministic given `seed`.
pub fn simulated_c<T: Scalar>(
    params_plug: &Ar1Params<T>,
    y_n: T,
    alpha: T,
    n: usize,
    m: usize,
    kind: EstimatorKind,
    target: Target,
    seed: SeedSpec,
) -> Result<Correction<T>> {
    check_alpha(alpha)?;
    if m < 1000 {
        return Err(Error::Config(format!(
            "simulated correction needs at least 1000 replicates, got {m}"
        )));
    }
    let dist = conditional_predictive(params_plug, y_n, 1)?;
    let sigma = params_plug.sigma();
    let half = T::cast(0.5);
    let z_limit = (T::one() - alpha).norm_quantile();
    let z_interval = (T::one() - alpha * half).norm_quantile();

    let est = replicate_means(m, 1, seed, |s, out| {
        let mut buf = vec![T::zero(); n];
        let mut rng = s.rng();
        simulate_backward_into(params_plug, y_n, &mut rng, &mut buf)?;
        let rho_hat = estimate_slice(kind, &buf)?;
        let center = rho_hat * y_n;
        out[0] = match target {
            Target::Limit => dist.cdf(center + sigma * z_limit),
            Target::Interval => {
                let hw = sigma * z_interval;
                dist.cdf(center + hw) - dist.cdf(center - hw)
            }
        };
        Ok(())
    })?;

    Ok(Correction {
        c_over_n: est.means[0] - (T::one() - alpha),
        std_error: est.std_errors[0],
        target,
        source: Source::Simulated,
        n,
        alpha,
    })
}

pub(crate) fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::ProbabilityDomain(alpha.as_f64()));
    }
    Ok(())
}
