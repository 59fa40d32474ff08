//! The dimension parameter `l` of the manifold and the constants it fixes.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported `l`. Factorials and binomials stay far from overflow.
pub const MAX_L: u32 = 6;

/// The integer `l ≥ 1` fixing the (2l+1)-dimensional Heisenberg manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ManifoldParams {
    l: u32,
}

impl ManifoldParams {
    pub fn new(l: u32) -> Result<Self> {
        if l == 0 || l > MAX_L {
            return Err(Error::invalid(format!(
                "l must satisfy 1 <= l <= {MAX_L}, got {l}"
            )));
        }
        Ok(Self { l })
    }

    #[inline]
    pub fn l(&self) -> u32 {
        self.l
    }

    /// Dimension of the manifold, `2l + 1`.
    pub fn dimension(&self) -> u32 {
        2 * self.l + 1
    }

    /// Exact Weyl coefficient `2^{l+1} l! / (2l+1)!` of `x^{l+1/2}`.
    pub fn weyl_coefficient(&self) -> Ratio<u64> {
        let l = u64::from(self.l);
        Ratio::new((1u64 << (l + 1)) * factorial(l), factorial(2 * l + 1))
    }

    pub fn weyl_coefficient_f64(&self) -> f64 {
        let c = self.weyl_coefficient();
        *c.numer() as f64 / *c.denom() as f64
    }

    /// `θ_l = 2^{2-l} / ((l-1)! π)`, the amplitude of the cosine expansion.
    pub fn theta(&self) -> f64 {
        2f64.powi(2 - self.l as i32) / (factorial(u64::from(self.l) - 1) as f64 * PI)
    }

    /// Prefactor `-4 / (2^l (l-1)!)` of the sawtooth sum.
    pub fn psi_prefactor(&self) -> f64 {
        -4.0 / (2f64.powi(self.l as i32) * factorial(u64::from(self.l) - 1) as f64)
    }

    /// Exponent `l - 1/4` of the natural size of the error term.
    pub fn error_exponent(&self) -> f64 {
        self.l as f64 - 0.25
    }
}

impl TryFrom<u32> for ManifoldParams {
    type Error = Error;

    fn try_from(l: u32) -> Result<Self> {
        Self::new(l)
    }
}

impl From<ManifoldParams> for u32 {
    fn from(p: ManifoldParams) -> u32 {
        p.l
    }
}

pub(crate) fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// Binomial coefficient in floating point, exact for the small arguments used here.
pub(crate) fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
