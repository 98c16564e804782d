//! Replicate-parallel Monte-Carlo driver.
//!
//! Replicates are split into fixed-size chunks; chunks run in parallel and
//! are reduced serially in chunk order with compensated summation, so the
//! result is bit-identical for any worker count. Replicates that hit a
//! degenerate series are re-drawn from an attempt-shifted substream, with a
//! 0.1% cap on the degenerate fraction.

use rayon::prelude::*;

use crate::ar1_model::SeedSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const CHUNK: u64 = 4096;
const MAX_REDRAWS: u64 = 64;
const ATTEMPT_SHIFT: u32 = 40;

#[derive(Debug, Clone, Copy, Default)]
struct Kahan<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> Kahan<T> {
    fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    fn add(&mut self, x: T) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

struct ChunkSums<T> {
    sums: Vec<Kahan<T>>,
    sq_sums: Vec<Kahan<T>>,
    degenerate: usize,
}

/// Per-dimension means and standard errors over `m` replicates.
#[derive(Debug)]
pub(crate) struct McMeans<T> {
    pub means: Vec<T>,
    pub std_errors: Vec<T>,
}

/// Run `eval` once per replicate. `eval` receives the replicate's seed and
/// fills `out` (length `dim`); it may fail with `DegenerateSeries`, which
/// triggers a re-draw.
pub(crate) fn replicate_means<T, F>(
    m: usize,
    dim: usize,
    seed: SeedSpec,
    eval: F,
) -> Result<McMeans<T>>
where
    T: Scalar,
    F: Fn(SeedSpec, &mut [T]) -> Result<()> + Sync,
{
    assert!(m >= 1 && dim >= 1);
    let m64 = m as u64;
    let n_chunks = m64.div_ceil(CHUNK);

    let partials: Vec<Result<ChunkSums<T>>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sums = vec![Kahan::new(); dim];
            let mut sq_sums = vec![Kahan::new(); dim];
            let mut degenerate = 0usize;
            let mut out = vec![T::zero(); dim];
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(m64);
            for rep in lo..hi {
                let mut done = false;
                for attempt in 0..=MAX_REDRAWS {
                    let s = seed.stream(rep.wrapping_add(attempt << ATTEMPT_SHIFT));
                    match eval(s, &mut out) {
                        Ok(()) => {
                            done = true;
                            break;
                        }
                        Err(Error::DegenerateSeries(_)) => degenerate += 1,
                        Err(e) => return Err(e),
                    }
                }
                if !done {
                    return Err(Error::TooManyDegenerate {
                        degenerate,
                        total: m,
                    });
                }
                for d in 0..dim {
                    sums[d].add(out[d]);
                    sq_sums[d].add(out[d] * out[d]);
                }
            }
            Ok(ChunkSums {
                sums,
                sq_sums,
                degenerate,
            })
        })
        .collect();

    let mut sums = vec![Kahan::new(); dim];
    let mut sq_sums = vec![Kahan::new(); dim];
    let mut degenerate = 0usize;
    for partial in partials {
        let p = partial?;
        for d in 0..dim {
            sums[d].add(p.sums[d].sum);
            sq_sums[d].add(p.sq_sums[d].sum);
        }
        degenerate += p.degenerate;
    }
    if (degenerate as f64) > 0.001 * (m as f64) {
        return Err(Error::TooManyDegenerate {
            degenerate,
            total: m,
        });
    }

    let mf = T::cast(m as f64);
    let mut means = Vec::with_capacity(dim);
    let mut std_errors = Vec::with_capacity(dim);
    for d in 0..dim {
        let mean = sums[d].sum / mf;
        let ss = (sq_sums[d].sum - sums[d].sum * sums[d].sum / mf).max(T::zero());
        let se = if m > 1 {
            (ss / (mf - T::one()) / mf).sqrt()
        } else {
            T::zero()
        };
        means.push(mean);
        std_errors.push(se);
    }
    Ok(McMeans { means, std_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rayon::ThreadPoolBuilder;

    #[test]
    fn mean_of_normals() {
        let seed = SeedSpec::new(9);
        let r = replicate_means::<f64, _>(50_000, 1, seed, |s, out| {
            let mut rng = s.rng();
            out[0] = f64::standard_normal(&mut rng);
            Ok(())
        })
        .unwrap();
        assert!(r.means[0].abs() < 4.0 * r.std_errors[0] + 1e-12);
        assert!((r.std_errors[0] - 1.0 / (50_000f64).sqrt()).abs() < 0.001);
    }

    #[test]
    fn bit_identical_across_worker_counts() {
        let run = |workers: usize| {
            let pool = ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .unwrap();
            pool.install(|| {
                replicate_means::<f64, _>(20_000, 2, SeedSpec::new(77), |s, out| {
                    let mut rng = s.rng();
                    out[0] = f64::standard_normal(&mut rng);
                    out[1] = out[0] * out[0];
                    Ok(())
                })
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        let c = run(8);
        assert_eq!(a.means, b.means);
        assert_eq!(a.means, c.means);
        assert_eq!(a.std_errors, b.std_errors);
        assert_eq!(a.std_errors, c.std_errors);
    }

    #[test]
    fn degenerate_cap_enforced() {
        let r = replicate_means::<f64, _>(1000, 1, SeedSpec::new(1), |s, out| {
            // every 100th replicate-stream fails once, then succeeds on redraw
            if s.stream_index < 1000 && s.stream_index % 100 == 0 {
                return Err(Error::DegenerateSeries("least_squares"));
            }
            let mut rng = s.rng();
            out[0] = f64::standard_normal(&mut rng);
            Ok(())
        })
        .unwrap_err();
        assert!(matches!(r, Error::TooManyDegenerate { .. }));
    }
}
