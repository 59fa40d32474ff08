//! Finite Fourier approximation of the sawtooth and the truncated cosine
//! expansion of the error term,
//!
//! ```text
//! F₁(x) = θ_l x^{l-1/4} Σ_{n ≤ y} τ_l(n) n^{-3/4} cos(2π√(xn) - π/4),
//! ```
//!
//! together with a Monte-Carlo probe of the remainder `R_ψ - F₁`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ManifoldParams;
use crate::sampling::{evaluate, StratifiedSampler};
use crate::spectrum::r_psi;
use crate::tau::{tau_table, TauTable};

/// Truncated Fourier series of ψ and its error bound:
/// `approx = -Σ_{h ≤ H} sin(2πhu)/(πh)`, `bound = min(1, 1/(H‖u‖))`.
pub fn psi_fourier(u: f64, h_max: f64) -> Result<(f64, f64)> {
    if !(h_max >= 2.0) || !h_max.is_finite() {
        return Err(Error::invalid(format!(
            "H must be finite and >= 2, got {h_max}"
        )));
    }
    if !u.is_finite() {
        return Err(Error::invalid("u must be finite"));
    }
    let frac = u - u.floor();
    let terms = h_max.floor() as u64;
    let approx = -(1..=terms)
        .map(|h| {
            let h = h as f64;
            (2.0 * PI * (h * frac).fract()).sin() / (PI * h)
        })
        .sum::<f64>();
    let dist = frac.min(1.0 - frac);
    let bound = if dist == 0.0 {
        1.0
    } else {
        (1.0 / (h_max * dist)).min(1.0)
    };
    Ok((approx, bound))
}

/// Fractional part of `√(x n)` carried in double-double so the phase stays
/// accurate when `xn` is large.
#[inline]
pub(crate) fn sqrt_product_fraction(x: f64, n: f64) -> f64 {
    let hi = x * n;
    let lo = x.mul_add(n, -hi);
    let s = hi.sqrt();
    let residual = (-s).mul_add(s, hi) + lo;
    let correction = residual / (2.0 * s);
    let frac = (s - s.floor()) + correction;
    frac - frac.floor()
}

/// Cutoff and amplitude of the cosine expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    pub params: ManifoldParams,
    pub y: f64,
    pub theta: f64,
}

impl ExpansionParams {
    pub fn new(params: ManifoldParams, y: f64) -> Result<Self> {
        if !(y >= 1.0) || !y.is_finite() {
            return Err(Error::invalid(format!(
                "y must be finite and >= 1, got {y}"
            )));
        }
        Ok(Self {
            params,
            y,
            theta: params.theta(),
        })
    }

    pub fn cutoff(&self) -> u64 {
        self.y.floor() as u64
    }

    /// Non-zero coefficients `τ_l(n) n^{-3/4}` for `n ≤ y`, ready for repeated
    /// evaluation.
    pub fn series(&self, tau: &TauTable) -> Result<CosineSeries> {
        if tau.l() != self.params.l() {
            return Err(Error::invalid(format!(
                "tau table is for l = {}, expansion needs l = {}",
                tau.l(),
                self.params.l()
            )));
        }
        let cutoff = self.cutoff();
        if tau.limit() < cutoff {
            return Err(Error::invalid(format!(
                "tau table ends at {}, expansion needs n <= {cutoff}",
                tau.limit()
            )));
        }
        let terms = (1..=cutoff)
            .filter_map(|n| {
                let t = tau.value(n);
                (t != 0.0).then(|| (n as f64, t * (n as f64).powf(-0.75)))
            })
            .collect();
        Ok(CosineSeries {
            theta: self.theta,
            exponent: self.params.error_exponent(),
            terms,
        })
    }
}

/// Precomputed `F₁`.
#[derive(Clone, Debug)]
pub struct CosineSeries {
    theta: f64,
    exponent: f64,
    terms: Vec<(f64, f64)>,
}

impl CosineSeries {
    /// `Σ c_n cos(2π√(xn) - π/4)` without the `θ_l x^{l-1/4}` factor.
    pub fn oscillation(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(n, c)| c * (2.0 * PI * sqrt_product_fraction(x, n) - PI / 4.0).cos())
            .sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.theta * x.powf(self.exponent) * self.oscillation(x)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `F₁(x)` for a single `x`.
pub fn f1(p: &ExpansionParams, x: f64, tau: &TauTable) -> Result<f64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::invalid(format!(
            "x must be finite and >= 1, got {x}"
        )));
    }
    Ok(p.series(tau)?.eval(x))
}

/// Normalised mean square of `R_ψ - F₁` over `[T, 2T]` and the reference
/// size `y^{-1/2} log³ T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderMeanSquare {
    pub emp: f64,
    pub reference: f64,
}

impl RemainderMeanSquare {
    pub fn ratio(&self) -> f64 {
        self.emp / self.reference
    }
}

/// Average of `(R_ψ(x) - F₁(x))² x^{-(2l-1/2)}` over stratified `x ∈ [T, 2T]`.
pub fn remainder_mean_square(
    p: &ManifoldParams,
    t: f64,
    y: f64,
    samples: usize,
    seed: u64,
) -> Result<RemainderMeanSquare> {
    if !(t >= 1e3) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "T must be finite and >= 1000, got {t}"
        )));
    }
    let y_max = t / t.ln().powi(2);
    if !(y >= 1.0) || y > y_max {
        return Err(Error::invalid(format!(
            "y must satisfy 1 <= y <= T/log^2 T = {y_max:.3}, got {y}"
        )));
    }
    if samples < 1000 {
        return Err(Error::invalid(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let ep = ExpansionParams::new(*p, y)?;
    let tau = tau_table(p, ep.cutoff())?;
    let series = ep.series(&tau)?;
    let points = StratifiedSampler::new(t, 2.0 * t, samples, seed)?.points()?;
    let scale = 2.0 * p.l() as f64 - 0.5;
    let values = evaluate(&points, |x| {
        let d = r_psi(p, x) - series.eval(x);
        d * d * x.powf(-scale)
    });
    let emp = values.iter().sum::<f64>() / values.len() as f64;
    Ok(RemainderMeanSquare {
        emp,
        reference: y.powf(-0.5) * t.ln().powi(3),
    })
}
