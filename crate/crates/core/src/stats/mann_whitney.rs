//! Mann-Whitney U with midrank ties.
//!
//! The normal approximation uses the tie-corrected variance and a 0.5
//! continuity correction. Exact mode enumerates every way of choosing which
//! pooled observations belong to the first sample.

use serde::{Deserialize, Serialize};

use super::special::normal_two_sided;
use super::{Method, ResultFlag, Sample, TestResult};
use crate::error::StatsError;

/// Largest pooled sample size for exact enumeration.
pub const EXACT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwMode {
    /// Exact when `n1 + n2 ≤ EXACT_CAP`, otherwise normal.
    Auto,
    Normal,
    Exact,
}

/// Doubled midranks of the pooled sample (integers, so ties stay exact),
/// plus the sizes of every tie group.
fn doubled_ranks(pooled: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 averaged, doubled
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Variance of U under the null, corrected for ties.
pub fn u_variance(n1: usize, n2: usize, tie_sizes: &[usize]) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    let tie_term: f64 = tie_sizes.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let correction = if n > 1.0 { tie_term / (n * (n - 1.0)) } else { 0.0 };
    n1f * n2f / 12.0 * ((n + 1.0) - correction)
}

pub fn mann_whitney_u(a: &Sample, b: &Sample, mode: MwMode) -> Result<TestResult, StatsError> {
    a.check(1)?;
    b.check(1)?;
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;

    let pooled: Vec<f64> = a.values.iter().chain(&b.values).copied().collect();
    let (ranks, ties) = doubled_ranks(&pooled);
    let rank_sum2: u64 = ranks[..n1].iter().sum();
    // 2U = 2R − n1(n1 + 1)
    let u2 = rank_sum2 - (n1 * (n1 + 1)) as u64;
    let u = u2 as f64 / 2.0;

    let exact = match mode {
        MwMode::Exact if n > EXACT_CAP => return Err(StatsError::ExactCapExceeded { n, cap: EXACT_CAP }),
        MwMode::Exact => true,
        MwMode::Auto => n <= EXACT_CAP,
        MwMode::Normal => false,
    };

    if exact {
        let p = exact_p(&ranks, n1, rank_sum2);
        return Ok(TestResult { method: Method::MannWhitneyExact, statistic: u, degrees_of_freedom: None, p_value: p, z: None, flag: None });
    }

    let sigma = u_variance(n1, n2, &ties).sqrt();
    let mean = (n1 * n2) as f64 / 2.0;
    if sigma == 0.0 {
        return Ok(TestResult {
            method: Method::MannWhitneyNormal,
            statistic: u,
            degrees_of_freedom: None,
            p_value: 1.0,
            z: Some(0.0),
            flag: Some(ResultFlag::Degenerate),
        });
    }
    let diff = u - mean;
    let z = diff.signum() * (diff.abs() - 0.5).max(0.0) / sigma;
    Ok(TestResult {
        method: Method::MannWhitneyNormal,
        statistic: u,
        degrees_of_freedom: None,
        p_value: normal_two_sided(z),
        z: Some(z),
        flag: None,
    })
}

/// Two-sided exact p: twice the smaller tail of the permutation distribution
/// of the first sample's rank sum, capped at 1.
fn exact_p(ranks: &[u64], n1: usize, observed: u64) -> f64 {
    let n = ranks.len();
    let mut total = 0u64;
    let mut lower = 0u64;
    let mut upper = 0u64;
    for_each_subset(n, n1, |mask| {
        let sum: u64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        total += 1;
        if sum <= observed {
            lower += 1;
        }
        if sum >= observed {
            upper += 1;
        }
    });
    (2.0 * lower.min(upper) as f64 / total as f64).min(1.0)
}

/// Calls `f` with every `n`-bit mask that has exactly `k` bits set
/// (Gosper's hack).
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(u32)) {
    if k == 0 {
        f(0);
        return;
    }
    let limit = 1u32 << n;
    let mut mask: u32 = (1 << k) - 1;
    while mask < limit {
        f(mask);
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
}
