//! Stationary zero-mean Gaussian AR(1) process: parameters, the exact
//! k-step conditional predictive distribution, and forward / backward
//! (conditional-on-the-last-observation) simulators.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Model parameter theta = (rho, sigma2) with |rho| < 1 and sigma2 > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Params<T> {
    rho: T,
    sigma2: T,
}

impl<T: Scalar> Ar1Params<T> {
    pub fn new(rho: T, sigma2: T) -> Result<Self> {
        if !rho.is_finite() || rho.abs() >= T::one() {
            return Err(Error::InvalidParams(format!(
                "rho must satisfy |rho| < 1, got {rho}"
            )));
        }
        if !sigma2.is_finite() || sigma2 <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "sigma2 must be > 0, got {sigma2}"
            )));
        }
        Ok(Self { rho, sigma2 })
    }

    /// Plug-in parameters built from an estimate. Sigma2 is still checked,
    /// but rho is only clamped into the open stationarity region so that
    /// occasional estimates with |rho_hat| >= 1 at small n stay usable.
    pub fn plug_in(rho_hat: T, sigma2: T) -> Result<Self> {
        if !sigma2.is_finite() || sigma2 <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "sigma2 must be > 0, got {sigma2}"
            )));
        }
        if !rho_hat.is_finite() {
            return Err(Error::InvalidParams(format!(
                "rho estimate is not finite: {rho_hat}"
            )));
        }
        let cap = T::cast(1.0 - 1e-6);
        let rho = rho_hat.max(-cap).min(cap);
        Ok(Self { rho, sigma2 })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn sigma(&self) -> T {
        self.sigma2.sqrt()
    }

    /// Stationary variance sigma2 / (1 - rho^2).
    pub fn stationary_variance(&self) -> T {
        self.sigma2 / (T::one() - self.rho * self.rho)
    }
}

/// Observed series y_1..y_n, n >= 3.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    values: Vec<T>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::SeriesTooShort(values.len()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The conditioning observation y_n.
    pub fn last(&self) -> T {
        *self.values.last().unwrap()
    }
}

/// Conditional law of Y_{n+k} given Y_n = y_n (Gaussian).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveDist<T> {
    mean: T,
    variance: T,
    horizon: u32,
}

impl<T: Scalar> PredictiveDist<T> {
    pub fn new(mean: T, variance: T, horizon: u32) -> Result<Self> {
        if !variance.is_finite() || variance <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "predictive variance must be > 0, got {variance}"
            )));
        }
        if horizon == 0 {
            return Err(Error::InvalidParams("horizon k must be >= 1".into()));
        }
        Ok(Self {
            mean,
            variance,
            horizon,
        })
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn variance(&self) -> T {
        self.variance
    }

    pub fn sd(&self) -> T {
        self.variance.sqrt()
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn cdf(&self, z: T) -> T {
        ((z - self.mean) / self.sd()).norm_cdf()
    }

    pub fn pdf(&self, z: T) -> T {
        let sd = self.sd();
        ((z - self.mean) / sd).norm_pdf() / sd
    }

    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::ProbabilityDomain(p.as_f64()));
        }
        Ok(self.mean + self.sd() * p.norm_quantile())
    }
}

/// Exact conditional law of Y_{n+k} given Y_n = y_n:
/// mean rho^k y_n, variance sigma2 (1 + rho^2 + ... + rho^{2(k-1)}).
pub fn conditional_predictive<T: Scalar>(
    params: &Ar1Params<T>,
    y_n: T,
    k: u32,
) -> Result<PredictiveDist<T>> {
    if k == 0 {
        return Err(Error::InvalidParams("horizon k must be >= 1".into()));
    }
    let rho = params.rho();
    let mut mean = y_n;
    let mut variance = T::zero();
    let mut pow = T::one();
    for _ in 0..k {
        mean = mean * rho;
        variance = variance + pow;
        pow = pow * rho * rho;
    }
    PredictiveDist::new(mean, variance * params.sigma2(), k)
}

/// Seed for one replicate stream: the stream is a pure function of
/// (master_seed, stream_index), so parallel and serial runs agree exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_index: 0,
        }
    }

    /// Substream `i` relative to this seed.
    pub fn stream(self, i: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_index: self.stream_index.wrapping_add(i),
        }
    }

    /// An unrelated master seed for nested simulations, derived with a
    /// splitmix64 step so replicate indices do not collide with substreams.
    pub fn derive_master(self, salt: u64) -> Self {
        let mut z = self
            .master_seed
            .wrapping_add(salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Self::new(z ^ (z >> 31))
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Forward simulation: Y_1 from the stationary law N(0, sigma2/(1-rho^2)),
/// then Y_t = rho Y_{t-1} + eps_t with eps_t iid N(0, sigma2).
pub fn simulate_forward<T: Scalar>(
    params: &Ar1Params<T>,
    n: usize,
    seed: SeedSpec,
) -> Result<TimeSeries<T>> {
    let mut buf = vec![T::zero(); n];
    let mut rng = seed.rng();
    simulate_forward_into(params, &mut rng, &mut buf)?;
    TimeSeries::new(buf)
}

pub(crate) fn simulate_forward_into<T: Scalar>(
    params: &Ar1Params<T>,
    rng: &mut ChaCha12Rng,
    buf: &mut [T],
) -> Result<()> {
    if buf.len() < 3 {
        return Err(Error::SeriesTooShort(buf.len()));
    }
    let rho = params.rho();
    let sigma = params.sigma();
    buf[0] = params.stationary_variance().sqrt() * T::standard_normal(rng);
    for t in 1..buf.len() {
        buf[t] = rho * buf[t - 1] + sigma * T::standard_normal(rng);
    }
    Ok(())
}

/// Backward-conditional simulation: the exact law of (Y_1,...,Y_n) given
/// Y_n = y_n, generated by the backward representation
/// Y_t = rho Y_{t+1} + eta_t from t = n-1 down to 1, eta_t iid N(0, sigma2).
pub fn simulate_backward<T: Scalar>(
    params: &Ar1Params<T>,
    n: usize,
    y_n: T,
    seed: SeedSpec,
) -> Result<TimeSeries<T>> {
    let mut buf = vec![T::zero(); n];
    let mut rng = seed.rng();
    simulate_backward_into(params, y_n, &mut rng, &mut buf)?;
    TimeSeries::new(buf)
}

pub(crate) fn simulate_backward_into<T: Scalar>(
    params: &Ar1Params<T>,
    y_n: T,
    rng: &mut ChaCha12Rng,
    buf: &mut [T],
) -> Result<()> {
    let n = buf.len();
    if n < 3 {
        return Err(Error::SeriesTooShort(n));
    }
    let rho = params.rho();
    let sigma = params.sigma();
    buf[n - 1] = y_n;
    for t in (0..n - 1).rev() {
        buf[t] = rho * buf[t + 1] + sigma * T::standard_normal(rng);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(rho: f64, sigma2: f64) -> Ar1Params<f64> {
        Ar1Params::new(rho, sigma2).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(Ar1Params::new(1.0, 1.0).is_err());
        assert!(Ar1Params::new(-1.0, 1.0).is_err());
        assert!(Ar1Params::new(0.5, 0.0).is_err());
        assert!(Ar1Params::new(0.5, -1.0).is_err());
        assert!(Ar1Params::new(f64::NAN, 1.0).is_err());
        assert!(Ar1Params::new(0.999, 1e-12).is_ok());
    }

    #[test]
    fn plug_in_clamps_rho() {
        let p = Ar1Params::plug_in(1.07, 1.0).unwrap();
        assert!(p.rho() < 1.0 && p.rho() > 0.999);
        assert!(Ar1Params::plug_in(0.3, -1.0).is_err());
    }

    #[test]
    fn predictive_one_step() {
        let d = conditional_predictive(&params(0.0, 1.0), 5.0, 1).unwrap();
        assert_eq!(d.mean(), 0.0);
        assert_eq!(d.variance(), 1.0);

        let d = conditional_predictive(&params(0.5, 1.0), 2.0, 1).unwrap();
        assert_eq!(d.mean(), 1.0);
        assert_eq!(d.variance(), 1.0);
    }

    #[test]
    fn predictive_two_step() {
        let d = conditional_predictive(&params(0.5, 1.0), 2.0, 2).unwrap();
        assert_abs_diff_eq!(d.mean(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.variance(), 1.25, epsilon = 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let d = PredictiveDist::new(0.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(d.quantile(0.5).unwrap(), 0.0, epsilon = 1e-12);
        let d = PredictiveDist::new(1.0, 1.0, 1).unwrap();
        // 1 + Phi^{-1}(0.95), reference inverse normal cdf
        assert_abs_diff_eq!(d.quantile(0.95).unwrap(), 2.6448536269514727, epsilon = 1e-9);
        assert_abs_diff_eq!(d.cdf(1.0), 0.5, epsilon = 1e-15);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
    }

    #[test]
    fn cdf_quantile_round_trip_grid() {
        let d: PredictiveDist<f64> = PredictiveDist::new(-1.3, 2.7, 1).unwrap();
        let mut p = 0.005;
        while p < 0.9951 {
            assert!((d.cdf(d.quantile(p).unwrap()) - p).abs() <= 1e-9, "p={p}");
            p += 0.005;
        }
    }

    #[test]
    fn forward_deterministic_given_seed() {
        let p = params(0.7, 2.0);
        let a = simulate_forward(&p, 50, SeedSpec::new(42)).unwrap();
        let b = simulate_forward(&p, 50, SeedSpec::new(42)).unwrap();
        assert_eq!(a, b);
        let c = simulate_forward(&p, 50, SeedSpec::new(43)).unwrap();
        assert_ne!(a, c);
        let d = simulate_forward(&p, 50, SeedSpec::new(42).stream(1)).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn backward_pins_final_observation() {
        let p = params(0.5, 1.0);
        let s = simulate_backward(&p, 40, 2.0, SeedSpec::new(7)).unwrap();
        assert_eq!(s.last(), 2.0);
        assert_eq!(s.len(), 40);
    }

    #[test]
    fn backward_rho_zero_is_iid() {
        // rho = 0: Y_1..Y_{n-1} iid N(0, sigma2), independent of y_n.
        let p = params(0.0, 1.0);
        let a = simulate_backward(&p, 10, 2.0, SeedSpec::new(5)).unwrap();
        let b = simulate_backward(&p, 10, -3.0, SeedSpec::new(5)).unwrap();
        assert_eq!(&a.values()[..9], &b.values()[..9]);
    }

    #[test]
    fn forward_stationary_moments() {
        // rho = 0.9: long-run sample variance ~ 1 / (1 - 0.81) = 5.2632.
        let p = params(0.9, 1.0);
        let s = simulate_forward(&p, 400_000, SeedSpec::new(11)).unwrap();
        let n = s.len() as f64;
        let mean = s.values().iter().sum::<f64>() / n;
        let var = s.values().iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
        assert!((mean).abs() < 0.05, "mean = {mean}");
        assert!((var - 5.2632).abs() < 0.15, "var = {var}");
    }

    #[test]
    fn f32_simulation_works() {
        let p = Ar1Params::<f32>::new(0.5, 1.0).unwrap();
        let s = simulate_backward(&p, 20, 2.0f32, SeedSpec::new(3)).unwrap();
        assert_eq!(s.last(), 2.0f32);
    }
}
