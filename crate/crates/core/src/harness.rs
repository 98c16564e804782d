//! Monte-Carlo verification harness: conditional coverage of estimative and
//! improved limits/intervals, coverage-error scaling in n, and conditional
//! expected limits and lengths across estimators.

use serde::{Deserialize, Serialize};

use crate::ar1_model::{conditional_predictive, Ar1Params, SeedSpec, simulate_backward_into};
use crate::correction::{
    check_alpha, closed_form_c_interval, closed_form_c_limit, simulated_c, Correction, Target,
};
use crate::error::{Error, Result};
use crate::estimators::{estimate_slice, EstimatorKind};
use crate::mc::replicate_means;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    EstimativeLimit,
    ImprovedLimit,
    EstimativeInterval,
    ImprovedInterval,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::EstimativeLimit,
        Method::ImprovedLimit,
        Method::EstimativeInterval,
        Method::ImprovedInterval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::EstimativeLimit => "estimative_limit",
            Method::ImprovedLimit => "improved_limit",
            Method::EstimativeInterval => "estimative_interval",
            Method::ImprovedInterval => "improved_interval",
        }
    }

    pub fn is_improved(self) -> bool {
        matches!(self, Method::ImprovedLimit | Method::ImprovedInterval)
    }

    pub fn target(self) -> Target {
        match self {
            Method::EstimativeLimit | Method::ImprovedLimit => Target::Limit,
            Method::EstimativeInterval | Method::ImprovedInterval => Target::Interval,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "estimative_limit" => Ok(Method::EstimativeLimit),
            "improved_limit" => Ok(Method::ImprovedLimit),
            "estimative_interval" => Ok(Method::EstimativeInterval),
            "improved_interval" => Ok(Method::ImprovedInterval),
            other => Err(Error::Config(format!(
                "unknown method {other:?}; expected estimative_limit, improved_limit, estimative_interval or improved_interval"
            ))),
        }
    }
}

/// How improved methods obtain their per-replicate correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionMode {
    /// Fast path: closed-form c at the replicate's plug-in parameters.
    ClosedForm,
    /// Spot-check path: nested Monte-Carlo c at the plug-in parameters.
    /// Expensive; meant for small outer replicate counts.
    NestedSimulation { replicates: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct CoverageOptions {
    /// Freeze theta_hat at the true parameters (sanity mode: coverage is
    /// then exactly 1 - alpha by construction).
    pub oracle: bool,
    pub correction: CorrectionMode,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        Self {
            oracle: false,
            correction: CorrectionMode::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CoverageReport<T> {
    pub method: Method,
    pub kind: EstimatorKind,
    pub rho: T,
    pub sigma2: T,
    pub y_n: T,
    pub alpha: T,
    pub n: usize,
    pub m: usize,
    pub coverage: T,
    pub std_error: T,
}

impl<T: Scalar> CoverageReport<T> {
    pub fn error(&self) -> T {
        self.coverage - (T::one() - self.alpha)
    }
}

/// Conditional coverage H_alpha of the constructed limit/interval: the mean
/// over `m` backward-conditional replicates of the exact conditional-CDF
/// mass it assigns under the true parameters.
#[allow(clippy::too_many_arguments)]
pub fn conditional_coverage<T: Scalar>(
    method: Method,
    kind: EstimatorKind,
    params_true: &Ar1Params<T>,
    y_n: T,
    alpha: T,
    n: usize,
    m: usize,
    seed: SeedSpec,
    opts: &CoverageOptions,
) -> Result<CoverageReport<T>> {
    check_alpha(alpha)?;
    if m < 1000 {
        return Err(Error::Config(format!(
            "coverage study needs at least 1000 replicates, got {m}"
        )));
    }
    let report = |coverage: T, std_error: T| CoverageReport {
        method,
        kind,
        rho: params_true.rho(),
        sigma2: params_true.sigma2(),
        y_n,
        alpha,
        n,
        m,
        coverage,
        std_error,
    };

    if opts.oracle {
        // theta_hat frozen at truth: the mass is deterministic and equals
        // 1 - alpha up to inverse-CDF accuracy.
        let dist = conditional_predictive(params_true, y_n, 1)?;
        let g = mass(method, &dist, params_true, y_n, alpha, n, kind, opts, None)?;
        return Ok(report(g, T::zero()));
    }

    let est = replicate_means(m, 1, seed, |s, out| {
        let mut buf = vec![T::zero(); n];
        let mut rng = s.rng();
        simulate_backward_into(params_true, y_n, &mut rng, &mut buf)?;
        let rho_hat = estimate_slice(kind, &buf)?;
        let dist_true = conditional_predictive(params_true, y_n, 1)?;
        out[0] = mass(
            method,
            &dist_true,
            params_true,
            y_n,
            alpha,
            n,
            kind,
            opts,
            Some((rho_hat, s)),
        )?;
        Ok(())
    })?;
    Ok(report(est.means[0], est.std_errors[0]))
}

/// Conditional mass assigned by the method's construction at the plug-in
/// estimate (or at the truth in oracle mode), evaluated under `dist_true`.
#[allow(clippy::too_many_arguments)]
fn mass<T: Scalar>(
    method: Method,
    dist_true: &crate::ar1_model::PredictiveDist<T>,
    params_true: &Ar1Params<T>,
    y_n: T,
    alpha: T,
    n: usize,
    kind: EstimatorKind,
    opts: &CoverageOptions,
    plug: Option<(T, SeedSpec)>,
) -> Result<T> {
    let sigma2 = params_true.sigma2();
    let sigma = params_true.sigma();
    let (rho_hat, rep_seed) = match plug {
        Some((r, s)) => (r, Some(s)),
        None => (params_true.rho(), None),
    };
    let center = rho_hat * y_n;
    let half = T::cast(0.5);
    // with theta known there is no plug-in defect to cancel, so the oracle
    // evaluates the uncorrected construction for every method
    let shift = method.is_improved() && plug.is_some();

    match method.target() {
        Target::Limit => {
            let z = (T::one() - alpha).norm_quantile();
            let mut limit = center + sigma * z;
            if shift {
                let corr = replicate_correction(
                    rho_hat, sigma2, y_n, alpha, n, kind, Target::Limit, opts, rep_seed,
                )?;
                // f(z_alpha; theta_hat) = phi(z*) / sigma, independent of rho_hat
                let f = z.norm_pdf() / sigma;
                limit = limit - corr.c_over_n / f;
            }
            Ok(dist_true.cdf(limit))
        }
        Target::Interval => {
            let z = (T::one() - alpha * half).norm_quantile();
            let mut hw = sigma * z;
            if shift {
                let corr = replicate_correction(
                    rho_hat, sigma2, y_n, alpha, n, kind, Target::Interval, opts, rep_seed,
                )?;
                let f = z.norm_pdf() / sigma;
                hw = hw - corr.c_over_n / (T::cast(2.0) * f);
            }
            Ok(dist_true.cdf(center + hw) - dist_true.cdf(center - hw))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn replicate_correction<T: Scalar>(
    rho_hat: T,
    sigma2: T,
    y_n: T,
    alpha: T,
    n: usize,
    kind: EstimatorKind,
    target: Target,
    opts: &CoverageOptions,
    rep_seed: Option<SeedSpec>,
) -> Result<Correction<T>> {
    // |rho_hat| >= 1 happens with small probability at small n; clamp into
    // the stationarity region for the correction evaluation.
    let theta_hat = Ar1Params::plug_in(rho_hat, sigma2)?;
    match opts.correction {
        CorrectionMode::ClosedForm => match target {
            Target::Limit => closed_form_c_limit(&theta_hat, y_n, alpha, n, kind),
            Target::Interval => closed_form_c_interval(&theta_hat, y_n, alpha, n, kind),
        },
        CorrectionMode::NestedSimulation { replicates } => {
            let seed = rep_seed
                .unwrap_or(SeedSpec::new(0))
                .derive_master(rep_seed.map_or(0, |s| s.stream_index));
            simulated_c(&theta_hat, y_n, alpha, n, replicates, kind, target, seed)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingCell<T> {
    pub n: usize,
    pub coverage: T,
    pub error: T,
    pub std_error: T,
    /// |error| within 2 SE of zero; excluded from the slope fit.
    pub noise_dominated: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SlopeFit<T> {
    pub slope: T,
    pub std_error: T,
    pub points_used: usize,
}

#[derive(Debug, Clone)]
pub struct ScalingReport<T> {
    pub method: Method,
    pub kind: EstimatorKind,
    pub cells: Vec<ScalingCell<T>>,
    pub slope: Option<SlopeFit<T>>,
}

/// Coverage error |H_alpha - (1 - alpha)| across an n-grid, with a weighted
/// least-squares slope of log|error| against log n.
#[allow(clippy::too_many_arguments)]
pub fn scaling_study<T: Scalar>(
    method: Method,
    kind: EstimatorKind,
    params_true: &Ar1Params<T>,
    y_n: T,
    alpha: T,
    n_grid: &[usize],
    m: usize,
    seed: SeedSpec,
    opts: &CoverageOptions,
) -> Result<ScalingReport<T>> {
    if n_grid.len() < 3 {
        return Err(Error::Config(format!(
            "n_grid needs at least 3 points, got {}",
            n_grid.len()
        )));
    }
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config("n_grid must be strictly increasing".into()));
    }
    if n_grid[n_grid.len() - 1] < 8 * n_grid[0] {
        return Err(Error::Config(
            "n_grid must span at least a factor of 8".into(),
        ));
    }

    let mut cells = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let rep = conditional_coverage(
            method,
            kind,
            params_true,
            y_n,
            alpha,
            n,
            m,
            seed.stream((i as u64) << 32),
            opts,
        )?;
        let error = rep.error();
        let noise_dominated = error.abs() <= T::cast(2.0) * rep.std_error;
        cells.push(ScalingCell {
            n,
            coverage: rep.coverage,
            error,
            std_error: rep.std_error,
            noise_dominated,
        });
    }

    let slope = if opts.oracle {
        None
    } else {
        fit_slope(&cells)
    };
    Ok(ScalingReport {
        method,
        kind,
        cells,
        slope,
    })
}

/// WLS fit of log|error| on log n with weights 1/SE_log^2,
/// SE_log = SE / |error| by the delta method.
fn fit_slope<T: Scalar>(cells: &[ScalingCell<T>]) -> Option<SlopeFit<T>> {
    let pts: Vec<(f64, f64, f64)> = cells
        .iter()
        .filter(|c| !c.noise_dominated && c.error.abs() > T::zero())
        .map(|c| {
            let e = c.error.abs().as_f64();
            let se_log = (c.std_error.as_f64() / e).max(1e-12);
            ((c.n as f64).ln(), e.ln(), 1.0 / (se_log * se_log))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let wsum: f64 = pts.iter().map(|p| p.2).sum();
    let xbar: f64 = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / wsum;
    let ybar: f64 = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / wsum;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xbar) * (p.0 - xbar)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts
        .iter()
        .map(|p| p.2 * (p.0 - xbar) * (p.1 - ybar))
        .sum();
    Some(SlopeFit {
        slope: T::cast(sxy / sxx),
        std_error: T::cast((1.0 / sxx).sqrt()),
        points_used: pts.len(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EfficiencyRow<T> {
    pub kind: EstimatorKind,
    /// Mean limit value (Limit target) or mean interval length (Interval).
    pub estimative_mean: T,
    pub estimative_se: T,
    pub improved_mean: T,
    pub improved_se: T,
}

/// Paired (common-random-number) differences between the first two kinds.
#[derive(Debug, Clone, Copy)]
pub struct PairDiff<T> {
    pub estimative_mean: T,
    pub estimative_se: T,
    pub improved_mean: T,
    pub improved_se: T,
}

#[derive(Debug, Clone)]
pub struct EfficiencyReport<T> {
    pub target: Target,
    pub n: usize,
    pub m: usize,
    pub alpha: T,
    pub rows: Vec<EfficiencyRow<T>>,
    pub pair_diff: Option<PairDiff<T>>,
    /// Second-order bias-free value: expected improved limit (or improved
    /// interval length) to O(n^-1).
    pub theoretical_improved: T,
}

/// Conditional expected limits (or interval lengths), estimative and
/// improved, per estimator kind, with common random numbers across kinds.
#[allow(clippy::too_many_arguments)]
pub fn efficiency_study<T: Scalar>(
    params_true: &Ar1Params<T>,
    y_n: T,
    alpha: T,
    n: usize,
    m: usize,
    kinds: &[EstimatorKind],
    target: Target,
    seed: SeedSpec,
) -> Result<EfficiencyReport<T>> {
    check_alpha(alpha)?;
    if kinds.len() < 2 {
        return Err(Error::Config(
            "efficiency study needs at least 2 estimator kinds".into(),
        ));
    }
    for k in kinds {
        if *k == EstimatorKind::YuleWalker {
            return Err(Error::UnsupportedBias("yule_walker"));
        }
    }
    if m < 1000 {
        return Err(Error::Config(format!(
            "efficiency study needs at least 1000 replicates, got {m}"
        )));
    }

    let sigma = params_true.sigma();
    let sigma2 = params_true.sigma2();
    let half = T::cast(0.5);
    let z_limit = (T::one() - alpha).norm_quantile();
    let z_interval = (T::one() - alpha * half).norm_quantile();
    let paired = kinds.len() == 2;
    let dim = 2 * kinds.len() + if paired { 2 } else { 0 };
    let opts = CoverageOptions::default();

    let est = replicate_means(m, dim, seed, |s, out| {
        let mut buf = vec![T::zero(); n];
        let mut rng = s.rng();
        simulate_backward_into(params_true, y_n, &mut rng, &mut buf)?;
        for (i, &kind) in kinds.iter().enumerate() {
            let rho_hat = estimate_slice(kind, &buf)?;
            let center = rho_hat * y_n;
            let (estimative, improved) = match target {
                Target::Limit => {
                    let z_hat = center + sigma * z_limit;
                    let corr = replicate_correction(
                        rho_hat, sigma2, y_n, alpha, n, kind, Target::Limit, &opts, Some(s),
                    )?;
                    let f = z_limit.norm_pdf() / sigma;
                    (z_hat, z_hat - corr.c_over_n / f)
                }
                Target::Interval => {
                    let len = T::cast(2.0) * sigma * z_interval;
                    let corr = replicate_correction(
                        rho_hat, sigma2, y_n, alpha, n, kind, Target::Interval, &opts, Some(s),
                    )?;
                    let f = z_interval.norm_pdf() / sigma;
                    // both endpoints move out by delta
                    (len, len - corr.c_over_n / f)
                }
            };
            out[2 * i] = estimative;
            out[2 * i + 1] = improved;
        }
        if paired {
            out[dim - 2] = out[0] - out[2];
            out[dim - 1] = out[1] - out[3];
        }
        Ok(())
    })?;

    let rows = kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| EfficiencyRow {
            kind,
            estimative_mean: est.means[2 * i],
            estimative_se: est.std_errors[2 * i],
            improved_mean: est.means[2 * i + 1],
            improved_se: est.std_errors[2 * i + 1],
        })
        .collect();
    let pair_diff = paired.then(|| PairDiff {
        estimative_mean: est.means[dim - 2],
        estimative_se: est.std_errors[dim - 2],
        improved_mean: est.means[dim - 1],
        improved_se: est.std_errors[dim - 1],
    });

    let rho = params_true.rho();
    let one_minus_rho2 = T::one() - rho * rho;
    let nf = T::cast(n as f64);
    let theoretical_improved = match target {
        // z_alpha(theta, y_n) + (z*/(2 sigma)) y_n^2 (1 - rho^2) / n
        Target::Limit => {
            rho * y_n
                + sigma * z_limit
                + z_limit / (T::cast(2.0) * sigma) * y_n * y_n * one_minus_rho2 / nf
        }
        // 2 sigma z* + (z*/sigma) y_n^2 (1 - rho^2) / n
        Target::Interval => {
            T::cast(2.0) * sigma * z_interval
                + z_interval / sigma * y_n * y_n * one_minus_rho2 / nf
        }
    };

    Ok(EfficiencyReport {
        target,
        n,
        m,
        alpha,
        rows,
        pair_diff,
        theoretical_improved,
    })
}
