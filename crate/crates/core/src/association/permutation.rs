//! Permutation test over equal-size re-partitions of pooled association values.
//!
//! Exact mode walks every `C(2n, n)` subset (split across rayon workers by
//! rank ranges). Monte Carlo mode draws subsets from one ChaCha8 stream in
//! fixed-size blocks and evaluates each block in parallel; the count is an
//! integer sum, so the p-value does not depend on the number of workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_EXACT_LIMIT: u64 = 500_000;
pub const MIN_MONTE_CARLO_SAMPLES: usize = 100;

/// Relative slack when comparing a permuted statistic against the observed
/// one, so partitions that are equal in exact arithmetic count as ties.
const TIE_TOLERANCE: f64 = 1e-10;

const EXACT_CHUNK: u64 = 1 << 15;
const MONTE_CARLO_BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationMode {
    Exact,
    #[serde(alias = "monte_carlo")]
    Montecarlo,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    #[serde(rename = "montecarlo")]
    MonteCarlo,
}

/// Requested tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Upper tail for a non-negative observed score, lower tail otherwise.
    #[default]
    Directional,
    TwoSided,
}

/// Tail actually used for a given observed score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailUsed {
    Upper,
    Lower,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermutationConfig {
    #[serde(default = "default_mode")]
    pub mode: PermutationMode,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_exact_limit")]
    pub exact_limit: u64,
}

fn default_mode() -> PermutationMode {
    PermutationMode::Auto
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_exact_limit() -> u64 {
    DEFAULT_EXACT_LIMIT
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            mode: PermutationMode::Auto,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

impl PermutationConfig {
    pub fn exact() -> Self {
        PermutationConfig {
            mode: PermutationMode::Exact,
            ..Default::default()
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        PermutationConfig {
            mode: PermutationMode::Montecarlo,
            samples,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode != PermutationMode::Exact && self.samples < MIN_MONTE_CARLO_SAMPLES {
            return Err(Error::InvalidPermutation(format!(
                "samples must be at least {MIN_MONTE_CARLO_SAMPLES}, got {}",
                self.samples
            )));
        }
        if self.exact_limit < 1 {
            return Err(Error::InvalidPermutation(
                "exact_limit must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationOutcome {
    pub p_value: f64,
    pub n_permutations: u64,
    pub method: Method,
    pub tail: TailUsed,
}

/// `C(n, k)`, or `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

struct Comparator {
    observed: f64,
    total: f64,
    tolerance: f64,
    tail: TailUsed,
}

impl Comparator {
    fn new(values1: &[f64], values2: &[f64], tail: Tail) -> Self {
        let observed = values1.iter().sum::<f64>() - values2.iter().sum::<f64>();
        let total = values1.iter().chain(values2).sum::<f64>();
        let scale = values1.iter().chain(values2).map(|v| v.abs()).sum::<f64>();
        let tail = match tail {
            Tail::TwoSided => TailUsed::TwoSided,
            Tail::Directional if observed >= 0.0 => TailUsed::Upper,
            Tail::Directional => TailUsed::Lower,
        };
        Comparator {
            observed,
            total,
            tolerance: TIE_TOLERANCE * scale.max(1.0),
            tail,
        }
    }

    /// Whether a partition whose first group sums to `group_sum` is at least
    /// as extreme as the observed split.
    fn at_least_as_extreme(&self, group_sum: f64) -> bool {
        let s = 2.0 * group_sum - self.total;
        match self.tail {
            TailUsed::Upper => s >= self.observed - self.tolerance,
            TailUsed::Lower => s <= self.observed + self.tolerance,
            TailUsed::TwoSided => s.abs() >= self.observed.abs() - self.tolerance,
        }
    }
}

/// Pools both lists, re-splits them into two groups of the original size
/// `n` (exhaustively or by sampling), and reports the fraction of splits
/// whose `Σ group1 − Σ group2` is at least as extreme as the observed one.
pub fn permutation_test(
    values1: &[f64],
    values2: &[f64],
    cfg: &PermutationConfig,
    tail: Tail,
) -> Result<PermutationOutcome> {
    let n = values1.len();
    if n == 0 {
        return Err(Error::InvalidPermutation(
            "value lists must be nonempty".into(),
        ));
    }
    if values2.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "groups must have equal size, got {} and {}",
            n,
            values2.len()
        )));
    }
    cfg.validate()?;

    let pooled: Vec<f64> = values1.iter().chain(values2).copied().collect();
    let cmp = Comparator::new(values1, values2, tail);
    let partitions = binomial(2 * n as u64, n as u64);

    let use_exact = match cfg.mode {
        PermutationMode::Exact => true,
        PermutationMode::Montecarlo => false,
        PermutationMode::Auto => partitions.is_some_and(|c| c <= cfg.exact_limit),
    };

    if use_exact {
        let total = partitions.ok_or_else(|| {
            Error::InvalidPermutation(format!(
                "C({}, {n}) partitions overflow exact enumeration",
                2 * n
            ))
        })?;
        let hits = exact_count(&pooled, n, total, &cmp);
        Ok(PermutationOutcome {
            p_value: hits as f64 / total as f64,
            n_permutations: total,
            method: Method::Exact,
            tail: cmp.tail,
        })
    } else {
        let hits = monte_carlo_count(&pooled, n, cfg.samples, cfg.seed, &cmp);
        Ok(PermutationOutcome {
            p_value: hits as f64 / cfg.samples as f64,
            n_permutations: cfg.samples as u64,
            method: Method::MonteCarlo,
            tail: cmp.tail,
        })
    }
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn unrank_combination(mut rank: u64, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0usize;
    for remaining in (1..=k).rev() {
        loop {
            let with_next =
                binomial((n - next - 1) as u64, (remaining - 1) as u64).unwrap_or(u64::MAX);
            if rank < with_next {
                out.push(next);
                next += 1;
                break;
            }
            rank -= with_next;
            next += 1;
        }
    }
    out
}

/// Advances to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn exact_count(pooled: &[f64], n: usize, total: u64, cmp: &Comparator) -> u64 {
    let chunks = total.div_ceil(EXACT_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * EXACT_CHUNK;
            let len = EXACT_CHUNK.min(total - start);
            let mut idx = unrank_combination(start, pooled.len(), n);
            let mut hits = 0u64;
            for step in 0..len {
                let sum: f64 = idx.iter().map(|&i| pooled[i]).sum();
                if cmp.at_least_as_extreme(sum) {
                    hits += 1;
                }
                if step + 1 < len {
                    next_combination(&mut idx, pooled.len());
                }
            }
            hits
        })
        .sum()
}

fn monte_carlo_count(pooled: &[f64], n: usize, samples: usize, seed: u64, cmp: &Comparator) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..pooled.len() as u32).collect();
    let mut block: Vec<u32> = Vec::with_capacity(MONTE_CARLO_BLOCK.min(samples) * n);
    let mut hits = 0u64;
    let mut drawn = 0usize;
    while drawn < samples {
        let this_block = MONTE_CARLO_BLOCK.min(samples - drawn);
        block.clear();
        for _ in 0..this_block {
            // partial Fisher–Yates: the first n slots become a uniform n-subset
            for i in 0..n {
                let j = rng.random_range(i..order.len());
                order.swap(i, j);
            }
            block.extend_from_slice(&order[..n]);
        }
        hits += block
            .par_chunks(n)
            .filter(|g| cmp.at_least_as_extreme(g.iter().map(|&i| pooled[i as usize]).sum()))
            .count() as u64;
        drawn += this_block;
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 6), Some(924));
        assert_eq!(binomial(24, 12), Some(2_704_156));
        assert_eq!(binomial(2, 1), Some(2));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(200, 100), None);
    }

    #[test]
    fn combinations_enumerate_in_order() {
        let total = binomial(7, 3).unwrap();
        let mut idx = unrank_combination(0, 7, 3);
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 7) {
            seen.push(idx.clone());
        }
        assert_eq!(seen.len() as u64, total);
        for (r, c) in seen.iter().enumerate() {
            assert_eq!(&unrank_combination(r as u64, 7, 3), c);
        }
    }

    #[test]
    fn one_versus_one() {
        let out = permutation_test(
            &[1.0],
            &[-1.0],
            &PermutationConfig::exact(),
            Tail::Directional,
        )
        .unwrap();
        assert_eq!(out.p_value, 0.5);
        assert_eq!(out.n_permutations, 2);
        assert_eq!(out.method, Method::Exact);
        assert_eq!(out.tail, TailUsed::Upper);

        let out = permutation_test(
            &[-1.0],
            &[1.0],
            &PermutationConfig::exact(),
            Tail::Directional,
        )
        .unwrap();
        assert_eq!(out.p_value, 0.5);
        assert_eq!(out.tail, TailUsed::Lower);

        let out =
            permutation_test(&[1.0], &[-1.0], &PermutationConfig::exact(), Tail::TwoSided).unwrap();
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn constant_values_give_p_one() {
        let v = [0.3; 5];
        for cfg in [
            PermutationConfig::exact(),
            PermutationConfig::monte_carlo(500, 9),
        ] {
            let out = permutation_test(&v, &v, &cfg, Tail::Directional).unwrap();
            assert_eq!(out.p_value, 1.0);
        }
    }

    #[test]
    fn auto_mode_switches_on_limit() {
        let v1 = [0.1, 0.2, 0.3];
        let v2 = [0.0, -0.1, 0.4];
        let mut cfg = PermutationConfig::default();
        assert_eq!(
            permutation_test(&v1, &v2, &cfg, Tail::Directional)
                .unwrap()
                .method,
            Method::Exact
        );
        cfg.exact_limit = 19;
        let out = permutation_test(&v1, &v2, &cfg, Tail::Directional).unwrap();
        assert_eq!(out.method, Method::MonteCarlo);
        assert_eq!(out.n_permutations, DEFAULT_SAMPLES as u64);
        cfg.exact_limit = 20;
        assert_eq!(
            permutation_test(&v1, &v2, &cfg, Tail::Directional)
                .unwrap()
                .n_permutations,
            20
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = PermutationConfig::exact();
        assert!(permutation_test(&[], &[], &cfg, Tail::Directional).is_err());
        assert!(permutation_test(&[1.0], &[1.0, 2.0], &cfg, Tail::Directional).is_err());
        let few = PermutationConfig::monte_carlo(99, 0);
        assert!(matches!(
            permutation_test(&[1.0], &[2.0], &few, Tail::Directional),
            Err(Error::InvalidPermutation(_))
        ));
        let zero_limit = PermutationConfig {
            exact_limit: 0,
            ..Default::default()
        };
        assert!(permutation_test(&[1.0], &[2.0], &zero_limit, Tail::Directional).is_err());
    }

    /// Brute-force over all 2^(2n) masks with exactly n bits set.
    fn brute_force_p(v1: &[f64], v2: &[f64], tail: Tail) -> f64 {
        let pooled: Vec<f64> = v1.iter().chain(v2).copied().collect();
        let n = v1.len();
        let obs: f64 = v1.iter().sum::<f64>() - v2.iter().sum::<f64>();
        let (mut hits, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << pooled.len()) {
            if mask.count_ones() as usize != n {
                continue;
            }
            total += 1;
            let mut s = 0.0;
            for (i, v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    s += v
                } else {
                    s -= v
                }
            }
            let hit = match tail {
                Tail::TwoSided => s.abs() >= obs.abs() - 1e-9,
                Tail::Directional if obs >= 0.0 => s >= obs - 1e-9,
                Tail::Directional => s <= obs + 1e-9,
            };
            hits += hit as u64;
        }
        hits as f64 / total as f64
    }

    #[test]
    fn monte_carlo_close_to_exact_for_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let v1: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v2: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact =
            permutation_test(&v1, &v2, &PermutationConfig::exact(), Tail::Directional).unwrap();
        assert_eq!(exact.n_permutations, 924);
        let mc = permutation_test(
            &v1,
            &v2,
            &PermutationConfig::monte_carlo(10_000, 3),
            Tail::Directional,
        )
        .unwrap();
        let p = exact.p_value;
        let bound = 3.0 * (p * (1.0 - p) / 10_000.0).sqrt();
        assert!(
            (mc.p_value - p).abs() <= bound,
            "mc {} exact {p}",
            mc.p_value
        );
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let v1 = [0.5, 0.1, -0.3, 0.8];
        let v2 = [0.0, 0.2, 0.25, -0.6];
        let cfg = PermutationConfig::monte_carlo(5_000, 77);
        let a = permutation_test(&v1, &v2, &cfg, Tail::Directional).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| permutation_test(&v1, &v2, &cfg, Tail::Directional).unwrap());
        assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
    }

    proptest! {
        #[test]
        fn exact_matches_brute_force(
            v1 in prop::collection::vec(-2.0f64..2.0, 1..6),
            seed in any::<u64>(),
            two_sided in any::<bool>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v2: Vec<f64> = v1.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
            let tail = if two_sided { Tail::TwoSided } else { Tail::Directional };
            let out = permutation_test(&v1, &v2, &PermutationConfig::exact(), tail).unwrap();
            prop_assert!((out.p_value - brute_force_p(&v1, &v2, tail)).abs() < 1e-12);
            prop_assert!(out.p_value >= 1.0 / out.n_permutations as f64);
            prop_assert!(out.p_value <= 1.0);
        }
    }
}
