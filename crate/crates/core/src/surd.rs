//! Exact detection of linear relations between square roots and the
//! singular series built on them.
//!
//! Writing `√n = m√s` with `s` squarefree, the square roots of distinct
//! squarefree integers are linearly independent over the rationals. A
//! signed sum `±√n₁ ± … ± √n_k` therefore vanishes exactly when, for every
//! kernel `s`, the signed multipliers attached to `s` cancel. No floating
//! point comparison is involved anywhere in this module.
//!
//! # Enumeration
//!
//! A solution tuple of `√n₁ + … + √n_v = √n_{v+1} + … + √n_k` partitions the
//! slots by kernel, and each part has at least two slots with both signs
//! present. The series is evaluated as
//!
//! 1. a sum over set partitions of the slots into such blocks;
//! 2. for each block and kernel, a meet-in-the-middle join: the block's slots
//!    are split in halves, each half is tabulated as a map from signed
//!    multiplier sum to accumulated weight, and the halves are joined on
//!    negated keys;
//! 3. distinct kernels across blocks are enforced by inclusion–exclusion over
//!    the partitions of the block set.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tau::TauTable;

/// Cap on the number of entries in one half-sum map.
pub const MAX_HALF_ENTRIES: u64 = 20_000_000;

/// `√n = multiplier · √kernel` with a squarefree kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalSurd {
    pub multiplier: u64,
    pub kernel: u64,
}

impl CanonicalSurd {
    pub fn value(&self) -> u64 {
        self.multiplier * self.multiplier * self.kernel
    }
}

/// Squarefree decomposition `n = m² s` by trial division.
pub fn canonical_surd(n: u64) -> CanonicalSurd {
    assert!(n >= 1, "canonical_surd needs n >= 1");
    let mut rest = n;
    let mut multiplier = 1u64;
    let mut kernel = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            multiplier *= p.pow(e / 2);
            if e % 2 == 1 {
                kernel *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    // what is left is 1 or a prime
    kernel *= rest;
    CanonicalSurd { multiplier, kernel }
}

/// The sign vector `i ∈ {0,1}^{k-1}`: slot 0 is always `+`, slot `j ≥ 1`
/// carries `-` when `bits[j-1]` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPattern {
    bits: Vec<bool>,
}

impl SignPattern {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The pattern of `√n₁ + … + √n_v - √n_{v+1} - … - √n_k`.
    pub fn for_relation(k: usize, v: usize) -> Self {
        assert!(k >= 2 && v >= 1 && v < k, "need 1 <= v < k");
        Self {
            bits: (1..k).map(|slot| slot >= v).collect(),
        }
    }

    /// Number of slots, `k`.
    pub fn len(&self) -> usize {
        self.bits.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `|i|`, the number of negative slots.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `β(i) = k - 2|i|`.
    pub fn beta(&self) -> i64 {
        self.len() as i64 - 2 * self.weight() as i64
    }

    #[inline]
    pub fn sign(&self, slot: usize) -> i64 {
        if slot > 0 && self.bits[slot - 1] {
            -1
        } else {
            1
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Exact test of `√n₁ ± √n₂ ± … ± √n_k = 0` with signs from `pattern`.
pub fn surd_relation_holds(ns: &[u64], pattern: &SignPattern) -> bool {
    assert_eq!(
        ns.len(),
        pattern.len(),
        "pattern describes {} slots, got {} integers",
        pattern.len(),
        ns.len()
    );
    let mut per_kernel: BTreeMap<u64, i64> = BTreeMap::new();
    for (slot, &n) in ns.iter().enumerate() {
        let c = canonical_surd(n);
        *per_kernel.entry(c.kernel).or_insert(0) += pattern.sign(slot) * c.multiplier as i64;
    }
    per_kernel.values().all(|&s| s == 0)
}

/// An arithmetic function `f: N → R` read on `1..=y`.
pub trait ArithmeticWeight {
    fn weight(&self, n: u64) -> f64;

    /// Largest argument at which the function is available, if bounded.
    fn max_argument(&self) -> Option<u64> {
        None
    }
}

impl ArithmeticWeight for TauTable {
    fn weight(&self, n: u64) -> f64 {
        self.value(n)
    }

    fn max_argument(&self) -> Option<u64> {
        Some(self.limit())
    }
}

impl<F: Fn(u64) -> f64> ArithmeticWeight for F {
    fn weight(&self, n: u64) -> f64 {
        self(n)
    }
}

/// A truncated series value `s_{k;v}(f; y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub k: usize,
    pub v: usize,
    pub y: f64,
    pub value: f64,
    /// Number of solution tuples with non-zero weight.
    pub term_count: u64,
}

/// Default cutoff for `s_{k;v}`, sized to keep the working set small.
pub fn default_cutoff(k: usize) -> f64 {
    match k {
        0..=4 => 4096.0,
        5..=6 => 512.0,
        _ => 128.0,
    }
}

/// `s(k) = 2^{k-2} + (k-6)/4`.
pub fn s_k_exponent(k: u32) -> Ratio<i64> {
    assert!((2..=60).contains(&k), "s(k) needs 2 <= k <= 60");
    Ratio::new(4 * (1i64 << (k - 2)) + i64::from(k) - 6, 4)
}

/// Per kernel, the multipliers `m` with `m² s ≤ y` and `f(m² s) ≠ 0`, with
/// weights `f(n) n^{-3/4}`.
struct KernelClasses {
    classes: BTreeMap<u64, Vec<(u64, f64)>>,
}

impl KernelClasses {
    fn build<F: ArithmeticWeight + ?Sized>(f: &F, cutoff: u64) -> Self {
        let mut classes: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
        for n in 1..=cutoff {
            let fv = f.weight(n);
            if fv == 0.0 {
                continue;
            }
            let c = canonical_surd(n);
            classes
                .entry(c.kernel)
                .or_default()
                .push((c.multiplier, fv / (n as f64).powf(0.75)));
        }
        Self { classes }
    }

    fn largest(&self) -> u64 {
        self.classes
            .values()
            .map(|c| c.len() as u64)
            .max()
            .unwrap_or(0)
    }
}

/// All set partitions of `0..k` whose blocks have at least two elements.
fn partitions_min2(k: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, k: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == k {
            if blocks.iter().all(|b| b.len() >= 2) {
                out.push(blocks.clone());
            }
            return;
        }
        // prune: singletons that can no longer be filled
        let remaining = k - i;
        let deficit: usize = blocks.iter().map(|b| 2usize.saturating_sub(b.len())).sum();
        if deficit > remaining {
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, k, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, k, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(0, k, &mut Vec::new(), &mut out);
    out
}

/// All set partitions of `0..r`.
fn partitions_all(r: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, r: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == r {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, r, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, r, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(0, r, &mut Vec::new(), &mut out);
    out
}

/// Accumulated weight and tuple count.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Tally {
    weight: f64,
    count: i128,
}

impl Tally {
    fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Visits every tuple over `class` for the given signs as
/// `(signed multiplier sum, weight product, multipliers)`.
fn for_each_half<G: FnMut(i64, f64, &[u64])>(class: &[(u64, f64)], signs: &[i64], mut visit: G) {
    fn rec<G: FnMut(i64, f64, &[u64])>(
        class: &[(u64, f64)],
        signs: &[i64],
        sum: i64,
        w: f64,
        picked: &mut Vec<u64>,
        visit: &mut G,
    ) {
        let depth = picked.len();
        if depth == signs.len() {
            visit(sum, w, picked);
            return;
        }
        for &(m, wm) in class {
            picked.push(m);
            rec(
                class,
                signs,
                sum + signs[depth] * m as i64,
                w * wm,
                picked,
                visit,
            );
            picked.pop();
        }
    }
    rec(
        class,
        signs,
        0,
        1.0,
        &mut Vec::with_capacity(signs.len()),
        &mut visit,
    );
}

fn check_half_size(class_len: usize, half_len: usize) -> Result<()> {
    let entries = (class_len as u64).checked_pow(half_len as u32);
    match entries {
        Some(e) if e <= MAX_HALF_ENTRIES => Ok(()),
        _ => Err(Error::Resource(format!(
            "half-sum map for {half_len} slots over {class_len} multipliers exceeds {MAX_HALF_ENTRIES} entries; reduce y"
        ))),
    }
}

/// Weighted count of multiplier tuples in one kernel class with
/// `Σ signs[j] · m_j = 0`, by meet-in-the-middle.
fn block_tally(class: &[(u64, f64)], signs: &[i64]) -> Result<Tally> {
    let split = signs.len().div_ceil(2);
    let (left, right) = signs.split_at(split);
    check_half_size(class.len(), split)?;
    let mut right_map: BTreeMap<i64, Tally> = BTreeMap::new();
    for_each_half(class, right, |s, w, _| {
        let t = right_map.entry(s).or_default();
        t.weight += w;
        t.count += 1;
    });
    let mut left_map: BTreeMap<i64, Tally> = BTreeMap::new();
    for_each_half(class, left, |s, w, _| {
        let t = left_map.entry(s).or_default();
        t.weight += w;
        t.count += 1;
    });
    let mut total = Tally::default();
    for (s, lt) in &left_map {
        if let Some(rt) = right_map.get(&-s) {
            total.weight += lt.weight * rt.weight;
            total.count += lt.count * rt.count;
        }
    }
    Ok(total)
}

/// Multiplier tuples (in slot order) of one kernel class with zero signed sum.
fn block_solutions(class: &[(u64, f64)], signs: &[i64]) -> Result<Vec<Vec<u64>>> {
    let split = signs.len().div_ceil(2);
    let (left, right) = signs.split_at(split);
    check_half_size(class.len(), split)?;
    let mut right_map: BTreeMap<i64, Vec<Vec<u64>>> = BTreeMap::new();
    for_each_half(class, right, |s, _, picked| {
        right_map.entry(s).or_default().push(picked.to_vec());
    });
    let mut out = Vec::new();
    for_each_half(class, left, |s, _, picked| {
        if let Some(rs) = right_map.get(&-s) {
            for r in rs {
                let mut t = picked.to_vec();
                t.extend_from_slice(r);
                out.push(t);
            }
        }
    });
    Ok(out)
}

fn validate(k: usize, v: usize, y: f64) -> Result<u64> {
    if !(2..=9).contains(&k) {
        return Err(Error::invalid(format!(
            "k must satisfy 2 <= k <= 9, got {k}"
        )));
    }
    if v < 1 || v >= k {
        return Err(Error::invalid(format!(
            "v must satisfy 1 <= v < k, got v={v}, k={k}"
        )));
    }
    if !(y >= 1.0) || !y.is_finite() {
        return Err(Error::invalid(format!(
            "y must be finite and >= 1, got {y}"
        )));
    }
    Ok(y.floor() as u64)
}

fn check_domain<F: ArithmeticWeight + ?Sized>(f: &F, cutoff: u64) -> Result<()> {
    match f.max_argument() {
        Some(max) if max < cutoff => Err(Error::invalid(format!(
            "weight table ends at {max}, series needs values up to {cutoff}"
        ))),
        _ => Ok(()),
    }
}

/// `s_{k;v}(f; y)`: the sum of `f(n₁)…f(n_k) / (n₁…n_k)^{3/4}` over tuples
/// with all `n_j ≤ y` and `√n₁ + … + √n_v = √n_{v+1} + … + √n_k`.
pub fn s_kv<F: ArithmeticWeight + ?Sized>(
    f: &F,
    k: usize,
    v: usize,
    y: f64,
) -> Result<SeriesValue> {
    let cutoff = validate(k, v, y)?;
    check_domain(f, cutoff)?;
    // kernel 1 alone may hold √y multipliers
    check_half_size((cutoff as f64).sqrt() as usize, k.div_ceil(2))?;
    let classes = KernelClasses::build(f, cutoff);
    let pattern = SignPattern::for_relation(k, v);

    // Block tallies depend only on (kernel, #plus, #minus).
    let mut memo: HashMap<(usize, usize), Vec<(u64, Tally)>> = HashMap::new();
    let mut block_table = |plus: usize, minus: usize| -> Result<Vec<(u64, Tally)>> {
        if let Some(t) = memo.get(&(plus, minus)) {
            return Ok(t.clone());
        }
        let signs: Vec<i64> = std::iter::repeat_n(1, plus)
            .chain(std::iter::repeat_n(-1, minus))
            .collect();
        let mut rows = Vec::new();
        for (&kernel, class) in &classes.classes {
            let t = block_tally(class, &signs)?;
            if !t.is_empty() {
                rows.push((kernel, t));
            }
        }
        memo.insert((plus, minus), rows.clone());
        Ok(rows)
    };

    let mut total = Tally::default();
    for partition in partitions_min2(k) {
        let mut tables = Vec::with_capacity(partition.len());
        let mut feasible = true;
        for block in &partition {
            let plus = block.iter().filter(|&&s| pattern.sign(s) > 0).count();
            let minus = block.len() - plus;
            if plus == 0 || minus == 0 {
                feasible = false;
                break;
            }
            tables.push(block_table(plus, minus)?);
        }
        if !feasible {
            continue;
        }
        let t = distinct_kernel_sum(&tables);
        total.weight += t.weight;
        total.count += t.count;
    }

    Ok(SeriesValue {
        k,
        v,
        y,
        value: total.weight,
        term_count: u64::try_from(total.count).map_err(|_| Error::Overflow("term count"))?,
    })
}

/// `Σ Π_b g_b(s_b)` over assignments of pairwise distinct kernels to the
/// blocks, via Möbius inversion on the partition lattice of the blocks.
fn distinct_kernel_sum(tables: &[Vec<(u64, Tally)>]) -> Tally {
    let lookup: Vec<BTreeMap<u64, Tally>> =
        tables.iter().map(|t| t.iter().copied().collect()).collect();
    let mut total = Tally::default();
    for grouping in partitions_all(tables.len()) {
        let mut weight = 1.0;
        let mut count = 1i128;
        for group in &grouping {
            // μ = (-1)^{|C|-1} (|C|-1)!
            let size = group.len() as i128;
            let mu: i128 = (1..size).product::<i128>() * if size % 2 == 0 { -1 } else { 1 };
            let mut gw = 0.0;
            let mut gc = 0i128;
            for (kernel, first) in &tables[group[0]] {
                let mut w = first.weight;
                let mut c = first.count;
                let mut present = true;
                for &b in &group[1..] {
                    match lookup[b].get(kernel) {
                        Some(t) => {
                            w *= t.weight;
                            c *= t.count;
                        }
                        None => {
                            present = false;
                            break;
                        }
                    }
                }
                if present {
                    gw += w;
                    gc += c;
                }
            }
            weight *= mu as f64 * gw;
            count *= mu * gc;
        }
        total.weight += weight;
        total.count += count;
    }
    total
}

/// Lists every solution tuple `(n₁, …, n_k)` of the relation with non-zero
/// weights, sorted. Intended for small `y`.
pub fn relation_solutions<F: ArithmeticWeight + ?Sized>(
    f: &F,
    k: usize,
    v: usize,
    y: f64,
) -> Result<Vec<Vec<u64>>> {
    let cutoff = validate(k, v, y)?;
    check_domain(f, cutoff)?;
    let classes = KernelClasses::build(f, cutoff);
    if classes.largest() > 4096 {
        return Err(Error::Resource(
            "solution listing is limited to small y".into(),
        ));
    }
    let pattern = SignPattern::for_relation(k, v);
    let kernels: Vec<u64> = classes.classes.keys().copied().collect();
    let mut out = Vec::new();

    for partition in partitions_min2(k) {
        let block_signs: Vec<Vec<i64>> = partition
            .iter()
            .map(|b| b.iter().map(|&s| pattern.sign(s)).collect())
            .collect();
        if block_signs
            .iter()
            .any(|s| s.iter().all(|&x| x > 0) || s.iter().all(|&x| x < 0))
        {
            continue;
        }
        let mut chosen = Vec::with_capacity(partition.len());
        assign_kernels(
            &partition,
            &block_signs,
            &kernels,
            &classes,
            k,
            &mut chosen,
            &mut out,
        )?;
    }
    out.sort();
    Ok(out)
}

fn assign_kernels(
    partition: &[Vec<usize>],
    block_signs: &[Vec<i64>],
    kernels: &[u64],
    classes: &KernelClasses,
    k: usize,
    chosen: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) -> Result<()> {
    if chosen.len() == partition.len() {
        let mut per_block = Vec::with_capacity(partition.len());
        for (b, &kernel) in chosen.iter().enumerate() {
            let sols = block_solutions(&classes.classes[&kernel], &block_signs[b])?;
            if sols.is_empty() {
                return Ok(());
            }
            per_block.push(sols);
        }
        let mut tuple = vec![0u64; k];
        expand(partition, chosen, &per_block, 0, &mut tuple, out);
        return Ok(());
    }
    for &kernel in kernels {
        if chosen.contains(&kernel) {
            continue;
        }
        chosen.push(kernel);
        assign_kernels(partition, block_signs, kernels, classes, k, chosen, out)?;
        chosen.pop();
    }
    Ok(())
}

fn expand(
    partition: &[Vec<usize>],
    kernels: &[u64],
    per_block: &[Vec<Vec<u64>>],
    b: usize,
    tuple: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    if b == partition.len() {
        out.push(tuple.clone());
        return;
    }
    for sol in &per_block[b] {
        for (&slot, &m) in partition[b].iter().zip(sol) {
            tuple[slot] = m * m * kernels[b];
        }
        expand(partition, kernels, per_block, b + 1, tuple, out);
    }
}

/// `cos(π j / 4)` for integer `j`, exactly where it vanishes.
fn cos_quarter_pi(j: i64) -> f64 {
    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
    [1.0, H, 0.0, -H, -1.0, -H, 0.0, H][j.rem_euclid(8) as usize]
}

/// `B_k(f; y) = Σ_{v=1}^{k-1} C(k-1, v) s_{k;v}(f; y) cos(π(k-2v)/4)`.
pub fn b_k<F: ArithmeticWeight + ?Sized>(f: &F, k: usize, y: f64) -> Result<f64> {
    validate(k, 1, y)?;
    let mut cache: HashMap<usize, f64> = HashMap::new();
    let mut total = 0.0;
    for v in 1..k {
        let c = cos_quarter_pi(k as i64 - 2 * v as i64);
        if c == 0.0 {
            continue;
        }
        // s_{k;v} = s_{k;k-v}
        let key = v.min(k - v);
        let s = match cache.get(&key) {
            Some(&s) => s,
            None => {
                let s = s_kv(f, k, key, y)?.value;
                cache.insert(key, s);
                s
            }
        };
        total += crate::params::binomial_f64(k as u64 - 1, v as u64) * s * c;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ManifoldParams;
    use crate::tau::tau_table;
    use proptest::prelude::*;

    fn tau1(limit: u64) -> TauTable {
        tau_table(&ManifoldParams::new(1).unwrap(), limit).unwrap()
    }

    /// All k-tuples over the non-zero support, filtered by the exact relation test.
    fn exhaustive<F: ArithmeticWeight>(f: &F, k: usize, v: usize, y: u64) -> (f64, Vec<Vec<u64>>) {
        let support: Vec<u64> = (1..=y).filter(|&n| f.weight(n) != 0.0).collect();
        let pattern = SignPattern::for_relation(k, v);
        let mut tuples = Vec::new();
        let mut value = 0.0;
        let mut idx = vec![0usize; k];
        if support.is_empty() {
            return (0.0, tuples);
        }
        loop {
            let t: Vec<u64> = idx.iter().map(|&i| support[i]).collect();
            if surd_relation_holds(&t, &pattern) {
                let w: f64 = t
                    .iter()
                    .map(|&n| f.weight(n) / (n as f64).powf(0.75))
                    .product();
                value += w;
                tuples.push(t);
            }
            let mut j = 0;
            loop {
                if j == k {
                    tuples.sort();
                    return (value, tuples);
                }
                idx[j] += 1;
                if idx[j] < support.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    #[test]
    fn canonical_surd_examples() {
        assert_eq!(
            canonical_surd(1),
            CanonicalSurd {
                multiplier: 1,
                kernel: 1
            }
        );
        assert_eq!(
            canonical_surd(12),
            CanonicalSurd {
                multiplier: 2,
                kernel: 3
            }
        );
        assert_eq!(
            canonical_surd(50),
            CanonicalSurd {
                multiplier: 5,
                kernel: 2
            }
        );
        assert_eq!(
            canonical_surd(97),
            CanonicalSurd {
                multiplier: 1,
                kernel: 97
            }
        );
        assert_eq!(
            canonical_surd(720),
            CanonicalSurd {
                multiplier: 12,
                kernel: 5
            }
        );
    }

    #[test]
    fn relation_examples() {
        let p = SignPattern::for_relation(3, 1);
        assert_eq!(p.bits(), &[true, true]);
        assert!(surd_relation_holds(&[12, 3, 3], &p));
        assert!(surd_relation_holds(&[8, 2, 2], &p));
        let q = SignPattern::new(vec![false, true]);
        assert!(!surd_relation_holds(&[2, 3, 5], &q));
        assert_eq!(q.weight(), 1);
        assert_eq!(q.beta(), 1);
    }

    #[test]
    fn diagonal_for_k2() {
        let t = tau1(200);
        let s = s_kv(&t, 2, 1, 200.0).unwrap();
        let direct: f64 = (1..=200u64)
            .map(|n| t.value(n).powi(2) / (n as f64).powf(1.5))
            .sum();
        assert!((s.value - direct).abs() < 1e-14);
        let nonzero = (1..=200u64).filter(|&n| t.value(n) != 0.0).count() as u64;
        assert_eq!(s.term_count, nonzero);
        let sols = relation_solutions(&t, 2, 1, 200.0).unwrap();
        assert!(sols.iter().all(|s| s[0] == s[1]));
        assert_eq!(sols.len() as u64, nonzero);
    }

    #[test]
    fn s21_tau1_at_ten() {
        let t = tau1(10);
        let s = s_kv(&t, 2, 1, 10.0).unwrap();
        // n ∈ {3, 5, 7, 8, 9}
        let oracle: f64 = [3u64, 5, 7, 8, 9]
            .iter()
            .map(|&n| t.value(n).powi(2) / (n as f64).powf(1.5))
            .sum();
        assert!((s.value - oracle).abs() < 1e-15);
        assert!((s.value - 0.1160).abs() < 1e-4);
        assert_eq!(s.term_count, 5);
    }

    #[test]
    fn s31_contains_twelve_three_three() {
        let t = tau1(12);
        let sols = relation_solutions(&t, 3, 1, 12.0).unwrap();
        assert!(sols.contains(&vec![12, 3, 3]));
        let (value, oracle) = exhaustive(&t, 3, 1, 12);
        assert_eq!(sols, oracle);
        let s = s_kv(&t, 3, 1, 12.0).unwrap();
        assert!((s.value - value).abs() < 1e-15);
        assert_eq!(s.term_count as usize, oracle.len());
    }

    #[test]
    fn mixed_kernel_solutions_are_found() {
        // √2 + √3 = √2 + √3 spans two kernels
        let ones = |_: u64| 1.0;
        let sols = relation_solutions(&ones, 4, 2, 3.0).unwrap();
        assert!(sols.contains(&vec![2, 3, 2, 3]));
        assert!(sols.contains(&vec![2, 3, 3, 2]));
        let (value, oracle) = exhaustive(&ones, 4, 2, 20);
        let s = s_kv(&ones, 4, 2, 20.0).unwrap();
        assert_eq!(s.term_count as usize, oracle.len());
        assert!((s.value - value).abs() < 1e-12);
        assert_eq!(relation_solutions(&ones, 4, 2, 20.0).unwrap(), oracle);
    }

    #[test]
    fn kernel_grouping_matches_exhaustive_small() {
        let t = tau1(30);
        for k in 2..=4 {
            for v in 1..k {
                let (value, oracle) = exhaustive(&t, k, v, 30);
                let s = s_kv(&t, k, v, 30.0).unwrap();
                assert_eq!(s.term_count as usize, oracle.len(), "k={k} v={v}");
                assert!((s.value - value).abs() <= 1e-12, "k={k} v={v}");
                assert_eq!(relation_solutions(&t, k, v, 30.0).unwrap(), oracle);
            }
        }
    }

    #[test]
    fn higher_k_against_exhaustive() {
        let f = |n: u64| {
            if n.is_multiple_of(3) {
                0.0
            } else {
                1.0 / n as f64
            }
        };
        for (k, v) in [(5, 2), (6, 3), (6, 1)] {
            let (value, oracle) = exhaustive(&f, k, v, 9);
            let s = s_kv(&f, k, v, 9.0).unwrap();
            assert_eq!(s.term_count as usize, oracle.len(), "k={k} v={v}");
            assert!((s.value - value).abs() <= 1e-12 * value.abs().max(1.0));
        }
    }

    #[test]
    fn b_k_reductions() {
        let t = tau1(64);
        let s21 = s_kv(&t, 2, 1, 64.0).unwrap().value;
        assert!((b_k(&t, 2, 64.0).unwrap() - s21).abs() < 1e-15);
        let s31 = s_kv(&t, 3, 1, 64.0).unwrap().value;
        let b3 = b_k(&t, 3, 64.0).unwrap();
        assert!((b3 - 1.5 * 2f64.sqrt() * s31).abs() < 1e-14);
        let s42 = s_kv(&t, 4, 2, 64.0).unwrap().value;
        assert!((b_k(&t, 4, 64.0).unwrap() - 3.0 * s42).abs() < 1e-14);
    }

    #[test]
    fn s_k_exponent_values() {
        assert_eq!(s_k_exponent(3), Ratio::new(5, 4));
        assert_eq!(s_k_exponent(4), Ratio::new(7, 2));
        assert_eq!(s_k_exponent(10), Ratio::from_integer(257));
        assert_eq!(s_k_exponent(2), Ratio::new(0, 1));
    }

    #[test]
    fn rejects_bad_arguments() {
        let t = tau1(20);
        assert!(s_kv(&t, 1, 1, 10.0).is_err());
        assert!(s_kv(&t, 10, 1, 10.0).is_err());
        assert!(s_kv(&t, 3, 3, 10.0).is_err());
        assert!(s_kv(&t, 3, 0, 10.0).is_err());
        assert!(s_kv(&t, 3, 1, 0.5).is_err());
        assert!(s_kv(&t, 3, 1, 40.0).is_err());
    }

    #[test]
    fn oversized_map_is_reported() {
        let ones = |_: u64| 1.0;
        let err = s_kv(&ones, 9, 4, 1e9).unwrap_err();
        assert!(err.is_resource());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn symmetric_in_v(k in 2usize..=5, y in 1u64..60, seed in 0u64..1000) {
            let f = move |n: u64| (((n * 2654435761 + seed) % 7) as f64 - 3.0) / 3.0;
            for v in 1..k {
                let a = s_kv(&f, k, v, y as f64).unwrap();
                let b = s_kv(&f, k, k - v, y as f64).unwrap();
                prop_assert_eq!(a.term_count, b.term_count);
                prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.abs().max(1.0));
            }
        }

        #[test]
        fn relation_agrees_with_reconstruction(n in 1u64..1_000_000) {
            let c = canonical_surd(n);
            prop_assert_eq!(c.value(), n);
            let mut s = c.kernel;
            let mut p = 2;
            while p * p <= s {
                prop_assert!(!s.is_multiple_of(p * p));
                while s.is_multiple_of(p) { s /= p; }
                p += 1;
            }
        }
    }
}
