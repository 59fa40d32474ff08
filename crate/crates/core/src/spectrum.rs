//! Exact spectral counting for `(H_l/Γ, g_l)` and the sawtooth expression of
//! the error term `R(2πx)`.
//!
//! The spectrum splits into a torus part and a Heisenberg part. In the
//! variable `x = t/(2π)` the Heisenberg eigenvalues sit at the integers
//! `m² + m(2n + l)` with multiplicity `2 m^l C(n+l-1, l-1)`, and the torus
//! eigenvalues `4π²|k|²`, `k ∈ Z^{2l}`, sit at `x = 2π|k|²`. Counts include
//! the eigenvalue at the threshold.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ManifoldParams;

/// Relative half-width of the band around a jump point inside which exact
/// and sawtooth evaluations are refused.
pub const JUMP_GUARD: f64 = 1e-9;

/// Largest `⌊x/(2π)⌋` accepted by [`n_i_exact`].
const MAX_TORUS_RADIUS_SQ: u64 = 50_000_000;

/// The sawtooth `ψ(u) = {u} - 1/2`.
#[inline]
pub fn sawtooth(u: f64) -> f64 {
    u - u.floor() - 0.5
}

/// Fractional part of `(x - m(m+l)) / (2m)`, reduced without losing the
/// low-order bits of `x`.
///
/// `x - m(m+l)` is exact for `x < 2^53`; the quotient by `2m` is then split
/// into an integer multiple of `2m` and a remainder, so the fractional part
/// carries one rounding error regardless of the size of `x`.
#[inline]
fn psi_argument_fraction(x: f64, m: f64, l: f64) -> f64 {
    let num = x - m * (m + l);
    let period = 2.0 * m;
    let q = (num / period).floor();
    let mut rem = num - q * period;
    // the floor above may be off by one after rounding
    if rem < 0.0 {
        rem += period;
    } else if rem >= period {
        rem -= period;
    }
    rem / period
}

/// The sawtooth sum approximating `R(2πx)`:
///
/// `-4/(2^l (l-1)!) · Σ_{1 ≤ m ≤ √x} m (x - m²)^{l-1} ψ(x/(2m) - m/2 - l/2)`.
///
/// Costs `O(√x)`; returns 0 when `x < 1`.
pub fn r_psi(p: &ManifoldParams, x: f64) -> f64 {
    if x < 1.0 {
        return 0.0;
    }
    let l = p.l();
    let lf = l as f64;
    let m_max = isqrt_floor(x);
    let mut acc = 0.0;
    for m in 1..=m_max {
        let mf = m as f64;
        let frac = psi_argument_fraction(x, mf, lf);
        let weight = mf * (x - mf * mf).powi(l as i32 - 1);
        acc += weight * (frac - 0.5);
    }
    p.psi_prefactor() * acc
}

/// Largest integer `m` with `m² ≤ x`.
pub(crate) fn isqrt_floor(x: f64) -> u64 {
    if x < 1.0 {
        return 0;
    }
    let mut m = x.sqrt().floor() as u64;
    while (m as f64) * (m as f64) > x {
        m -= 1;
    }
    while ((m + 1) as f64) * ((m + 1) as f64) <= x {
        m += 1;
    }
    m
}

fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

/// `C(N + l, l)`, built incrementally so every intermediate is an integer.
fn binomial_upper(n: u128, l: u32) -> Option<u128> {
    let mut c = 1u128;
    for i in 1..=u128::from(l) {
        c = c.checked_mul(n + i)? / i;
    }
    Some(c)
}

/// Weighted count of the Heisenberg part of the spectrum up to `2πx`:
/// `Σ 2 m^l C(n+l-1, l-1)` over `m ≥ 1, n ≥ 0` with `m² + m(2n+l) ≤ x`.
///
/// The inner sum over `n` is evaluated in closed form, so the cost is `O(√x)`.
pub fn n_ii_exact(p: &ManifoldParams, x: f64) -> Result<u128> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!(
            "x must be finite and >= 0, got {x}"
        )));
    }
    // Eigenvalue parameters are integers.
    let bound = x.floor() as u128;
    let l = p.l();
    let lw = u128::from(l);
    let mut total = 0u128;
    let mut m = 1u128;
    while m * (m + lw) <= bound {
        let n_max = (bound - m * (m + lw)) / (2 * m);
        let term = checked_pow(m, l)
            .and_then(|ml| ml.checked_mul(2))
            .and_then(|w| w.checked_mul(binomial_upper(n_max, l)?))
            .ok_or(Error::Overflow("N_II count"))?;
        total = total
            .checked_add(term)
            .ok_or(Error::Overflow("N_II count"))?;
        m += 1;
    }
    Ok(total)
}

/// Number of torus eigenvalues up to `2πx`, i.e. `#{k ∈ Z^{2l} : |k|² ≤ x/(2π)}`,
/// for the flat torus with unit periods.
pub fn n_i_exact(p: &ManifoldParams, x: f64) -> Result<u128> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!(
            "x must be finite and >= 0, got {x}"
        )));
    }
    let radius_sq = (x / (2.0 * PI)).floor() as u64;
    if radius_sq > MAX_TORUS_RADIUS_SQ {
        return Err(Error::Resource(format!(
            "torus count with |k|^2 <= {radius_sq} exceeds the supported table size"
        )));
    }
    let len = radius_sq as usize + 1;
    // counts[j] = number of lattice vectors of the current dimension with |k|² = j
    let mut counts = vec![0u128; len];
    counts[0] = 1;
    let mut next = vec![0u128; len];
    for _ in 0..2 * p.l() {
        next.iter_mut().for_each(|c| *c = 0);
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            next[j] += c;
            let mut t = 1usize;
            while j + t * t < len {
                next[j + t * t] += 2 * c;
                t += 1;
            }
        }
        std::mem::swap(&mut counts, &mut next);
    }
    Ok(counts.iter().sum())
}

/// Eigenvalue counts split into torus and Heisenberg parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCount {
    pub n_i: u128,
    pub n_ii: u128,
    pub total: u128,
}

pub fn exact_count(p: &ManifoldParams, x: f64) -> Result<ExactCount> {
    let n_i = n_i_exact(p, x)?;
    let n_ii = n_ii_exact(p, x)?;
    let total = n_i.checked_add(n_ii).ok_or(Error::Overflow("N(t)"))?;
    Ok(ExactCount { n_i, n_ii, total })
}

/// The Weyl main term `2^{l+1} l!/(2l+1)! · x^{l+1/2}`.
pub fn weyl_main_term(p: &ManifoldParams, x: f64) -> f64 {
    p.weyl_coefficient_f64() * x.powf(p.l() as f64 + 0.5)
}

/// Fails when `x` is within the guard band of an integer, where both the
/// Heisenberg count and every sawtooth argument may jump.
pub fn check_integer_guard(x: f64) -> Result<()> {
    let jump = x.round();
    if (x - jump).abs() <= JUMP_GUARD * jump.abs().max(1.0) {
        return Err(Error::NearJump { x, jump });
    }
    Ok(())
}

/// Fails when `x` is near a jump of either spectral part.
pub fn check_spectral_guard(x: f64) -> Result<()> {
    check_integer_guard(x)?;
    let u = x / (2.0 * PI);
    let j = u.round();
    if (u - j).abs() <= JUMP_GUARD * j.abs().max(1.0) {
        return Err(Error::NearJump {
            x,
            jump: 2.0 * PI * j,
        });
    }
    Ok(())
}

/// `N(2πx) - weyl_main_term(x)` from exact counts.
pub fn r_exact(p: &ManifoldParams, x: f64) -> Result<f64> {
    check_spectral_guard(x)?;
    let count = exact_count(p, x)?;
    Ok(count.total as f64 - weyl_main_term(p, x))
}

/// `Σ m^l n^e` over the representations `d = m(m + 2n + l)` with `m > 0, n ≥ 0`,
/// using `0⁰ = 1`.
pub fn lattice_weight(p: &ManifoldParams, d: u64, n_exponent: u32) -> u128 {
    let l = u64::from(p.l());
    let mut total = 0u128;
    let mut m = 1u64;
    while m * (m + l) <= d {
        if d.is_multiple_of(m) {
            let rest = d / m - m - l;
            if rest.is_multiple_of(2) {
                let n = u128::from(rest / 2);
                total += u128::from(m).pow(p.l()) * n.pow(n_exponent);
            }
        }
        m += 1;
    }
    total
}

/// The weight `f_R(d) = Σ_{d = m(m+2n+l)} m^l n^{l-1}`.
pub fn f_r_weight(p: &ManifoldParams, d: u64) -> Result<u128> {
    if d == 0 {
        return Err(Error::invalid("f_R is defined for d >= 1"));
    }
    Ok(lattice_weight(p, d, p.l() - 1))
}

/// A point of the error term together with its natural normalisation
/// `(2πx)^{-(l-1/4)} R_ψ(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorTermSample {
    pub x: f64,
    pub r_psi: f64,
    pub normalized: f64,
}

impl ErrorTermSample {
    pub fn at(p: &ManifoldParams, x: f64) -> Result<Self> {
        if !(x >= 1.0) || !x.is_finite() {
            return Err(Error::invalid(format!(
                "sample point must be >= 1, got {x}"
            )));
        }
        let r = r_psi(p, x);
        Ok(Self {
            x,
            r_psi: r,
            normalized: normalize_error(p, x, r),
        })
    }
}

/// `r · (2πx)^{-(l-1/4)}`.
#[inline]
pub fn normalize_error(p: &ManifoldParams, x: f64, r: f64) -> f64 {
    r * (2.0 * PI * x).powf(-p.error_exponent())
}
