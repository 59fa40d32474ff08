//! The coefficient `τ_l(n)` of the cosine expansion, its truncated form and
//! a sieved table with divisor counts.
//!
//! `τ_l(n)` sums over the factorisations `n = h·q` with `q = 2r - h`,
//! `q > h` and `q ≡ h (mod 2)`:
//!
//! ```text
//! τ_l(n) = Σ (-1)^{lh} (h/q)^{1/2} (1 - h/q)^{l-1}
//! ```
//!
//! Each term is bounded by 1 and there is at most one term per divisor, so
//! `|τ_l(n)| ≤ d(n)`. When `n ≡ 2 (mod 4)` one of `h, q` is odd and the other
//! even, so `τ_l(n) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ManifoldParams;

#[inline]
fn term(l: u32, h: u64, q: u64) -> f64 {
    let ratio = h as f64 / q as f64;
    let sign = if (u64::from(l) * h) % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    sign * ratio.sqrt() * (1.0 - ratio).powi(l as i32 - 1)
}

/// `τ_l(n)` by direct enumeration of the divisors `h < √n`.
///
/// Terms are accumulated in ascending `h`, i.e. descending `q`.
pub fn tau(p: &ManifoldParams, n: u64) -> f64 {
    assert!(n >= 1, "tau is defined for n >= 1");
    let l = p.l();
    let mut acc = 0.0;
    let mut h = 1u64;
    while h * h < n {
        if n.is_multiple_of(h) {
            let q = n / h;
            if (q - h).is_multiple_of(2) {
                acc += term(l, h, q);
            }
        }
        h += 1;
    }
    acc
}

/// Truncation of the `(h, r)` range: `h ≤ H` and `h < r ≤ h(2^{2J+1} + 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    h_max: f64,
    j: u32,
}

impl TruncationParams {
    pub fn new(h_max: f64, j: u32) -> Result<Self> {
        if !(h_max > 0.0) || !h_max.is_finite() {
            return Err(Error::invalid(format!(
                "H must be finite and > 0, got {h_max}"
            )));
        }
        Ok(Self { h_max, j })
    }

    /// `H` together with `J = ⌊(L - log L) / (2 log 2)⌋`, `L = log T`.
    pub fn for_height(h_max: f64, t: f64) -> Result<Self> {
        if !(t > std::f64::consts::E) {
            return Err(Error::invalid(format!("T must exceed e, got {t}")));
        }
        let big_l = t.ln();
        let j = ((big_l - big_l.ln()) / (2.0 * std::f64::consts::LN_2)).floor();
        Self::new(h_max, j.max(0.0) as u32)
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    /// `q_max = h · 2^{2J+2}`; `None` when it exceeds `u64`.
    fn q_max(&self, h: u64) -> Option<u64> {
        let shift = 2 * self.j + 2;
        if shift >= 64 {
            return None;
        }
        h.checked_mul(1u64 << shift)
    }
}

/// `τ_l(n; H, T)`: the sum of [`tau`] restricted by `t`. A term with even `h`
/// sitting exactly at the upper endpoint of the `r` range counts one half.
pub fn tau_truncated(p: &ManifoldParams, n: u64, t: &TruncationParams) -> f64 {
    assert!(n >= 1, "tau is defined for n >= 1");
    let l = p.l();
    let h_cap = if t.h_max >= u64::MAX as f64 {
        u64::MAX
    } else {
        t.h_max.floor() as u64
    };
    let mut acc = 0.0;
    let mut h = 1u64;
    while h <= h_cap && h * h < n {
        if n.is_multiple_of(h) {
            let q = n / h;
            if (q - h).is_multiple_of(2) {
                match t.q_max(h) {
                    Some(q_max) if q > q_max => {}
                    Some(q_max) if q == q_max && h.is_multiple_of(2) => acc += 0.5 * term(l, h, q),
                    _ => acc += term(l, h, q),
                }
            }
        }
        h += 1;
    }
    acc
}

/// Precomputed `τ_l(n)` and `d(n)` for `1 ≤ n ≤ limit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauTable {
    l: u32,
    limit: u64,
    values: Vec<f64>,
    divisor_counts: Vec<u32>,
}

impl TauTable {
    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `τ_l(n)`; panics when `n` is 0 or beyond the table.
    #[inline]
    pub fn value(&self, n: u64) -> f64 {
        assert!(
            n >= 1 && n <= self.limit,
            "n = {n} outside 1..={}",
            self.limit
        );
        self.values[n as usize]
    }

    #[inline]
    pub fn divisor_count(&self, n: u64) -> u32 {
        assert!(
            n >= 1 && n <= self.limit,
            "n = {n} outside 1..={}",
            self.limit
        );
        self.divisor_counts[n as usize]
    }

    /// `(n, τ_l(n), d(n))` in increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64, u32)> + '_ {
        (1..=self.limit).map(move |n| (n, self.values[n as usize], self.divisor_counts[n as usize]))
    }
}

fn try_alloc<T: Clone>(len: usize, fill: T) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|e| Error::Resource(format!("cannot allocate table of {len} entries: {e}")))?;
    v.resize(len, fill);
    Ok(v)
}

/// Builds the table by sieving the pairs `(h, q)` with `h·q ≤ limit` rather
/// than factoring each `n`.
pub fn tau_table(p: &ManifoldParams, limit: u64) -> Result<TauTable> {
    if limit == 0 {
        return Err(Error::invalid("table limit must be >= 1"));
    }
    let len = usize::try_from(limit)
        .ok()
        .and_then(|n| n.checked_add(1))
        .ok_or_else(|| Error::Resource(format!("table limit {limit} too large")))?;
    let l = p.l();
    let mut values = try_alloc(len, 0.0f64)?;
    let mut h = 1u64;
    while h * (h + 2) <= limit {
        let mut q = h + 2;
        while h * q <= limit {
            values[(h * q) as usize] += term(l, h, q);
            q += 2;
        }
        h += 1;
    }

    let mut divisor_counts = try_alloc(len, 0u32)?;
    for d in 1..len {
        for multiple in (d..len).step_by(d) {
            divisor_counts[multiple] += 1;
        }
    }

    Ok(TauTable {
        l,
        limit,
        values,
        divisor_counts,
    })
}
