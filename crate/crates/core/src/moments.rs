//! Monte-Carlo power moments and the empirical distribution of the
//! normalised error term, alongside the predicted main terms.
//!
//! Integrals run over `[T, 2T]` in the variable `x = t/(2π)` and are estimated
//! with one uniform draw per equal-width stratum, which avoids aliasing with
//! the integer lattice where `R_ψ` jumps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{factorial, ManifoldParams};
use crate::sampling::{evaluate, mean_variance, StratifiedSampler};
use crate::spectrum::{normalize_error, r_psi};
use crate::tau::TauTable;

pub const MAX_MOMENT_ORDER: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentMode {
    Signed,
    Absolute,
}

impl std::str::FromStr for MomentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" => Ok(Self::Signed),
            "absolute" => Ok(Self::Absolute),
            other => Err(Error::invalid(format!("unknown moment mode '{other}'"))),
        }
    }
}

/// Estimate of `∫_T^{2T} R_ψ^k(x) dx` (or of `|R_ψ|^k`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub l: u32,
    pub k: u32,
    pub t: f64,
    pub mode: MomentMode,
    pub estimate: f64,
    /// Standard error of `estimate`.
    pub std_error: f64,
    /// `estimate / ∫_T^{2T} x^{k(l-1/4)} dx`.
    pub normalized: f64,
    pub samples: usize,
    pub seed: u64,
}

/// `∫_T^{2T} x^a dx`.
pub fn power_integral(t: f64, a: f64) -> f64 {
    t.powf(a + 1.0) * (2f64.powf(a + 1.0) - 1.0) / (a + 1.0)
}

fn validate_window(t: f64, samples: usize) -> Result<()> {
    if !(t >= 1e3) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "T must be finite and >= 1000, got {t}"
        )));
    }
    if samples < 1000 {
        return Err(Error::invalid(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    Ok(())
}

/// `R_ψ` at stratified points of `[T, 2T]`.
pub fn sample_error_term(
    p: &ManifoldParams,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let points = StratifiedSampler::new(t, 2.0 * t, samples, seed)?.points()?;
    Ok(evaluate(&points, |x| r_psi(p, x)))
}

pub fn moment_estimate(
    p: &ManifoldParams,
    k: u32,
    t: f64,
    samples: usize,
    mode: MomentMode,
    seed: u64,
) -> Result<MomentEstimate> {
    if k == 0 || k > MAX_MOMENT_ORDER {
        return Err(Error::invalid(format!(
            "k must satisfy 1 <= k <= {MAX_MOMENT_ORDER}, got {k}"
        )));
    }
    validate_window(t, samples)?;
    let values = sample_error_term(p, t, samples, seed)?;
    Ok(moment_from_values(p, k, t, &values, mode, seed))
}

/// Moment estimate from precomputed `R_ψ` samples on `[T, 2T]`.
pub fn moment_from_values(
    p: &ManifoldParams,
    k: u32,
    t: f64,
    values: &[f64],
    mode: MomentMode,
    seed: u64,
) -> MomentEstimate {
    let powered: Vec<f64> = values
        .iter()
        .map(|&r| match mode {
            MomentMode::Signed => r.powi(k as i32),
            MomentMode::Absolute => r.abs().powi(k as i32),
        })
        .collect();
    let (mean, var) = mean_variance(&powered);
    let width = t;
    let estimate = width * mean;
    let std_error = width * (var / powered.len() as f64).sqrt();
    let scale = power_integral(t, k as f64 * p.error_exponent());
    MomentEstimate {
        l: p.l(),
        k,
        t,
        mode,
        estimate,
        std_error,
        normalized: estimate / scale,
        samples: values.len(),
        seed,
    }
}

/// Coefficient of `∫_T^{2T} x^{k(l-1/4)} dx` in `∫_T^{2T} R_ψ^k(x) dx`:
/// `2^{1+k-lk} l^k B_k / ((l!)^k π^k)`.
pub fn predicted_coefficient_x(p: &ManifoldParams, k: u32, b_k_value: f64) -> f64 {
    assert!(k >= 2, "prediction needs k >= 2");
    let l = p.l() as i32;
    let k = k as i32;
    let lf = factorial(u64::from(p.l())) as f64;
    2f64.powi(1 + k - l * k) * (l as f64).powi(k) * b_k_value / (lf.powi(k) * PI.powi(k))
}

/// Coefficient of `T^{1+k(l-1/4)}` in `∫_1^T R^k(t) dt`:
/// `2^{3+5k/4-2kl} l^k B_k / ((l!)^k π^{3k/4+kl} (4 + k(4l-1)))`.
pub fn predicted_coefficient_t(p: &ManifoldParams, k: u32, b_k_value: f64) -> f64 {
    assert!(k >= 2, "prediction needs k >= 2");
    let l = p.l() as f64;
    let k = k as f64;
    let lf = factorial(u64::from(p.l())) as f64;
    2f64.powf(3.0 + 1.25 * k - 2.0 * k * l) * l.powf(k) * b_k_value
        / (lf.powf(k) * PI.powf(0.75 * k + k * l) * (4.0 + k * (4.0 * l - 1.0)))
}

/// The mean-square constant `C_{2,l}` with its series cut at `y`.
pub fn c2l_constant(p: &ManifoldParams, y: f64, tau: &TauTable) -> Result<f64> {
    if !(y >= 1.0) || !y.is_finite() {
        return Err(Error::invalid(format!(
            "y must be finite and >= 1, got {y}"
        )));
    }
    if tau.l() != p.l() {
        return Err(Error::invalid("tau table built for a different l"));
    }
    let cutoff = y.floor() as u64;
    if tau.limit() < cutoff {
        return Err(Error::invalid(format!(
            "tau table ends at {}, need {cutoff}",
            tau.limit()
        )));
    }
    let series: f64 = (1..=cutoff)
        .map(|n| tau.value(n).powi(2) / (n as f64).powf(1.5))
        .sum();
    let l = p.l() as f64;
    let lf = factorial(u64::from(p.l())) as f64;
    Ok(2f64.powf(4.5 - 4.0 * l) * l * l * series
        / (lf * lf * PI.powf(2.0 * l + 1.5) * (4.0 * l + 1.0)))
}

/// An estimate next to the value it is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub estimate: f64,
    pub predicted: f64,
    pub relative_deviation: f64,
}

impl PredictionReport {
    pub fn new(estimate: f64, predicted: f64) -> Self {
        let relative_deviation = if predicted != 0.0 {
            (estimate - predicted).abs() / predicted.abs()
        } else {
            f64::NAN
        };
        Self {
            estimate,
            predicted,
            relative_deviation,
        }
    }
}

/// Histogram of `(2πx)^{-(l-1/4)} R_ψ(x)` over uniform `x ∈ [T_lo, T_hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionEstimate {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub range: (f64, f64),
    pub samples: usize,
    pub seed: u64,
    /// The normalised values, sorted.
    #[serde(skip)]
    pub sorted_values: Vec<f64>,
}

impl DistributionEstimate {
    /// Standard error of `sample_mean`.
    pub fn mean_std_error(&self) -> f64 {
        (self.sample_variance / self.samples as f64).sqrt()
    }

    /// Empirical CDF at `a`.
    pub fn cdf(&self, a: f64) -> f64 {
        self.sorted_values.partition_point(|&v| v <= a) as f64 / self.sorted_values.len() as f64
    }
}

pub fn distribution_estimate(
    p: &ManifoldParams,
    t_lo: f64,
    t_hi: f64,
    samples: usize,
    bins: usize,
    seed: u64,
) -> Result<DistributionEstimate> {
    if !(t_lo >= 500.0) || !(t_hi >= 2.0 * t_lo) || !t_hi.is_finite() {
        return Err(Error::invalid(format!(
            "need T_hi >= 2 T_lo >= 1000, got [{t_lo}, {t_hi}]"
        )));
    }
    if bins == 0 || samples < 2 {
        return Err(Error::invalid("need at least one bin and two samples"));
    }
    let points = StratifiedSampler::new(t_lo, t_hi, samples, seed)?.points()?;
    let values = evaluate(&points, |x| normalize_error(p, x, r_psi(p, x)));
    let (sample_mean, sample_variance) = mean_variance(&values);
    let mut sorted_values = values;
    sorted_values.sort_by(f64::total_cmp);

    let lo = sorted_values[0];
    let hi = sorted_values[sorted_values.len() - 1];
    let span = if hi > lo { hi - lo } else { 1.0 };
    let width = span / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &v in &sorted_values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let densities = counts
        .iter()
        .map(|&c| c as f64 / (samples as f64 * width))
        .collect();

    Ok(DistributionEstimate {
        bin_edges,
        densities,
        sample_mean,
        sample_variance,
        range: (t_lo, t_hi),
        samples,
        seed,
        sorted_values,
    })
}

/// Two-sample Kolmogorov distance `sup |F_a - F_b|` between sorted samples.
pub fn kolmogorov_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut worst: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    worst
}

/// For each `T`, `T^{-(1+A(l-1/4))} ∫_T^{2T} |R_ψ|^A dx`. Each report compares
/// with the entry of the preceding `T` (the first with itself), so
/// `relative_deviation` measures the drift between consecutive heights.
pub fn abs_moment_growth(
    p: &ManifoldParams,
    a: f64,
    t_list: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<PredictionReport>> {
    if !(0.0..=9.0).contains(&a) {
        return Err(Error::invalid(format!(
            "A must satisfy 0 <= A <= 9, got {a}"
        )));
    }
    if t_list.is_empty() || t_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "T list must be non-empty and strictly increasing",
        ));
    }
    let mut out = Vec::with_capacity(t_list.len());
    let mut previous: Option<f64> = None;
    for &t in t_list {
        validate_window(t, samples)?;
        let values = sample_error_term(p, t, samples, seed)?;
        let normalized = normalized_abs_moment(p, a, t, &values);
        out.push(PredictionReport::new(
            normalized,
            previous.unwrap_or(normalized),
        ));
        previous = Some(normalized);
    }
    Ok(out)
}

/// `T^{-(1+A(l-1/4))} · T · mean |R_ψ|^A` from samples on `[T, 2T]`.
pub fn normalized_abs_moment(p: &ManifoldParams, a: f64, t: f64, values: &[f64]) -> f64 {
    let mean = values.iter().map(|r| r.abs().powf(a)).sum::<f64>() / values.len() as f64;
    t * mean / t.powf(1.0 + a * p.error_exponent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tau::tau_table;

    fn params(l: u32) -> ManifoldParams {
        ManifoldParams::new(l).unwrap()
    }

    #[test]
    fn x_coefficient_examples() {
        let p = params(1);
        let b = 0.37;
        assert!((predicted_coefficient_x(&p, 2, b) - 2.0 * b / PI.powi(2)).abs() < 1e-16);
        assert!((predicted_coefficient_x(&p, 3, 1.0) - 2.0 / PI.powi(3)).abs() < 1e-16);
    }

    #[test]
    fn c2l_examples() {
        let p = params(1);
        let tau = tau_table(&p, 10).unwrap();
        let series: f64 = (1..=10u64)
            .map(|n| tau.value(n).powi(2) / (n as f64).powf(1.5))
            .sum();
        let expected = 2f64.sqrt() / (5.0 * PI.powf(3.5)) * series;
        assert!((c2l_constant(&p, 10.0, &tau).unwrap() - expected).abs() < 1e-16);
        assert!(c2l_constant(&p, 11.0, &tau).is_err());
    }

    #[test]
    fn c2l_tail_shrinks_when_doubling() {
        let p = params(1);
        let tau = tau_table(&p, 4096).unwrap();
        let values: Vec<f64> = (6..=12)
            .map(|j| c2l_constant(&p, 2f64.powi(j), &tau).unwrap())
            .collect();
        let steps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(steps.windows(2).all(|w| w[1] < w[0]), "{steps:?}");
    }

    #[test]
    fn c2l_matches_t_coefficient_at_k2() {
        for l in 1..=3 {
            let p = params(l);
            let tau = tau_table(&p, 500).unwrap();
            let b2: f64 = (1..=500u64)
                .map(|n| tau.value(n).powi(2) / (n as f64).powf(1.5))
                .sum();
            let c = c2l_constant(&p, 500.0, &tau).unwrap();
            let t = predicted_coefficient_t(&p, 2, b2);
            assert!((c / t - 1.0).abs() < 1e-13, "l={l}");
        }
    }

    #[test]
    fn prediction_report_deviation() {
        let r = PredictionReport::new(1.1, 1.0);
        assert!((r.relative_deviation - 0.1).abs() < 1e-12);
        assert!(PredictionReport::new(1.0, 0.0).relative_deviation.is_nan());
    }

    #[test]
    fn moment_validation() {
        let p = params(1);
        assert!(moment_estimate(&p, 0, 1e4, 1000, MomentMode::Signed, 1).is_err());
        assert!(moment_estimate(&p, 13, 1e4, 1000, MomentMode::Signed, 1).is_err());
        assert!(moment_estimate(&p, 2, 10.0, 1000, MomentMode::Signed, 1).is_err());
        assert!(moment_estimate(&p, 2, 1e4, 10, MomentMode::Signed, 1).is_err());
    }

    #[test]
    fn even_moment_modes_agree() {
        let p = params(1);
        let a = moment_estimate(&p, 2, 1e4, 2000, MomentMode::Signed, 9).unwrap();
        let b = moment_estimate(&p, 2, 1e4, 2000, MomentMode::Absolute, 9).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert!(a.estimate > 0.0);
    }

    #[test]
    fn moments_are_seed_deterministic() {
        let p = params(2);
        let a = moment_estimate(&p, 3, 5e3, 1500, MomentMode::Signed, 4).unwrap();
        let b = moment_estimate(&p, 3, 5e3, 1500, MomentMode::Signed, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn abs_moment_order_zero_is_one() {
        let reports = abs_moment_growth(&params(1), 0.0, &[1e3, 1e4], 1000, 2).unwrap();
        for r in reports {
            assert!((r.estimate - 1.0).abs() < 1e-12);
        }
        assert!(abs_moment_growth(&params(1), 9.5, &[1e3], 1000, 2).is_err());
        assert!(abs_moment_growth(&params(1), 2.0, &[1e4, 1e3], 1000, 2).is_err());
    }

    #[test]
    fn distribution_normalisation() {
        let d = distribution_estimate(&params(1), 1e3, 2e3, 4000, 40, 3).unwrap();
        let total: f64 = d
            .densities
            .iter()
            .zip(d.bin_edges.windows(2))
            .map(|(dens, e)| dens * (e[1] - e[0]))
            .sum();
        assert!((total - 1.0).abs() < 1e-6);
        assert!(d.bin_edges.windows(2).all(|w| w[1] > w[0]));
        assert!(d.densities.iter().all(|&x| x >= 0.0));
        assert!(distribution_estimate(&params(1), 1e3, 1.5e3, 100, 10, 3).is_err());
    }

    #[test]
    fn kolmogorov_distance_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kolmogorov_distance(&a, &a), 0.0);
        let b = [5.0, 6.0, 7.0, 8.0];
        assert_eq!(kolmogorov_distance(&a, &b), 1.0);
        let c = [1.5, 2.5, 3.5, 4.5];
        assert_eq!(kolmogorov_distance(&a, &c), 0.25);
    }

    #[test]
    fn mode_parses() {
        assert_eq!("signed".parse::<MomentMode>().unwrap(), MomentMode::Signed);
        assert!("other".parse::<MomentMode>().is_err());
    }
}
