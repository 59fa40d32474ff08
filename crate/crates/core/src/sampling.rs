//! Seeded stratified sampling of evaluation points and order-preserving
//! parallel evaluation.
//!
//! `[lo, hi]` is cut into equal strata with one uniform draw per stratum.
//! Strata are generated in batches; batch `b` draws from ChaCha stream `b`
//! of the seed, so the points do not depend on how the work is scheduled.
//! Points falling inside the guard band of an integer are redrawn.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::check_integer_guard;

const BATCH: usize = 1024;
const MAX_REDRAWS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StratifiedSampler {
    lo: f64,
    hi: f64,
    strata: usize,
    seed: u64,
}

impl StratifiedSampler {
    pub fn new(lo: f64, hi: f64, strata: usize, seed: u64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!(
                "sampling range [{lo}, {hi}] is empty"
            )));
        }
        if strata == 0 {
            return Err(Error::invalid("need at least one stratum"));
        }
        Ok(Self {
            lo,
            hi,
            strata,
            seed,
        })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// One guarded point per stratum, in stratum order.
    pub fn points(&self) -> Result<Vec<f64>> {
        let step = self.width() / self.strata as f64;
        let batches = self.strata.div_ceil(BATCH);
        let chunks: Vec<Result<Vec<f64>>> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(b as u64);
                let first = b * BATCH;
                let last = (first + BATCH).min(self.strata);
                (first..last)
                    .map(|i| {
                        let base = self.lo + i as f64 * step;
                        let mut redraws = 0;
                        loop {
                            let x = base + rng.random::<f64>() * step;
                            match check_integer_guard(x) {
                                Ok(()) => return Ok(x),
                                Err(e) if redraws >= MAX_REDRAWS => return Err(e),
                                Err(_) => redraws += 1,
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(self.strata);
        for chunk in chunks {
            out.extend(chunk?);
        }
        Ok(out)
    }
}

/// `f` at every point, in input order.
pub fn evaluate<F>(points: &[f64], f: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    points.par_iter().map(|&x| f(x)).collect()
}

/// Mean and unbiased variance, summed in index order.
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
