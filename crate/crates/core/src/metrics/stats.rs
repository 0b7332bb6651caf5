//! Rank statistics with midrank ties and two-sided p-values.
//!
//! Small samples get exact permutation p-values; larger ones fall back to
//! the t (Spearman) or normal (Mann-Whitney, Wilcoxon) approximation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

/// Largest n for which `spearman_rho` enumerates permutations by default.
pub const SPEARMAN_EXACT_MAX: usize = 9;
/// Largest combined sample size for the default exact Mann-Whitney test.
pub const MANN_WHITNEY_EXACT_MAX: usize = 12;
/// Largest count of nonzero differences for the default exact signed-rank test.
pub const WILCOXON_EXACT_MAX: usize = 12;

// Hard limits when exact enumeration is forced.
const SPEARMAN_FORCED_MAX: usize = 10;
const SUBSET_FORCED_MAX: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    Exact,
    Approximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankTestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: PMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample is empty")]
    EmptySample,
    #[error("every paired difference is zero")]
    AllZeroDifferences,
    #[error("input has no variation")]
    ConstantInput,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("exact p-value is limited to n <= {0}")]
    TooLargeForExact(usize),
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

/// 1-based ranks, ties share the mean of the ranks they span.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Sum of t^3 - t over tie groups.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .chunk_by(|a, b| a == b)
        .map(|g| {
            let t = g.len() as f64;
            t * t * t - t
        })
        .sum()
}

fn normal_two_sided(z: f64) -> f64 {
    let normal = Normal::standard();
    (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0)
}

// Tolerance for "at least as extreme" comparisons on rank sums.
fn extreme_eps(scale: f64) -> f64 {
    1e-9 * scale.abs().max(1.0)
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<RankTestResult, StatsError> {
    let method = if xs.len() <= SPEARMAN_EXACT_MAX {
        PMethod::Exact
    } else {
        PMethod::Approximation
    };
    spearman_rho_with(xs, ys, method)
}

pub fn spearman_rho_with(xs: &[f64], ys: &[f64], method: PMethod) -> Result<RankTestResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(StatsError::TooFewSamples {
            needed: 3,
            got: xs.len(),
        });
    }
    check_finite(xs)?;
    check_finite(ys)?;
    let rx = midranks(xs);
    let ry = midranks(ys);
    let rho = pearson(&rx, &ry).ok_or(StatsError::ConstantInput)?;
    let n = xs.len();

    let p_value = match method {
        PMethod::Exact => {
            if n > SPEARMAN_FORCED_MAX {
                return Err(StatsError::TooLargeForExact(SPEARMAN_FORCED_MAX));
            }
            spearman_exact_p(&rx, &ry)
        }
        PMethod::Approximation => {
            if rho.abs() >= 1.0 {
                0.0
            } else {
                let df = (n - 2) as f64;
                let t = rho * (df / (1.0 - rho * rho)).sqrt();
                let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
                (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
            }
        }
    };
    Ok(RankTestResult {
        statistic: rho,
        p_value,
        method,
    })
}

/// Share of all n! pairings of the y-ranks whose correlation is at least as
/// far from zero as the observed one. Only the cross product varies between
/// permutations, so that is what gets compared.
fn spearman_exact_p(rx: &[f64], ry: &[f64]) -> f64 {
    let n = rx.len();
    let mean = (n as f64 + 1.0) / 2.0;
    let cx: Vec<f64> = rx.iter().map(|r| r - mean).collect();
    let mut cy: Vec<f64> = ry.iter().map(|r| r - mean).collect();
    let cross = |cy: &[f64]| cx.iter().zip(cy).map(|(a, b)| a * b).sum::<f64>();
    let observed = cross(&cy).abs();
    let eps = extreme_eps(observed);

    // Heap's algorithm
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut c = vec![0usize; n];
    let mut tally = |cy: &[f64]| {
        total += 1;
        if cross(cy).abs() >= observed - eps {
            hits += 1;
        }
    };
    tally(&cy);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                cy.swap(0, i);
            } else {
                cy.swap(c[i], i);
            }
            tally(&cy);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

/// Calls `visit` with every `k`-subset of `0..n` as a bitmask.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(u32)) {
    if k == 0 {
        visit(0);
        return;
    }
    let limit = 1u64 << n;
    let mut mask: u64 = (1u64 << k) - 1;
    while mask < limit {
        visit(mask as u32);
        // Gosper's hack
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
}

/// U statistic of `xs` against `ys`: pairs with x > y, ties counting one half.
pub fn mann_whitney_u(xs: &[f64], ys: &[f64]) -> Result<RankTestResult, StatsError> {
    let method = if xs.len() + ys.len() <= MANN_WHITNEY_EXACT_MAX {
        PMethod::Exact
    } else {
        PMethod::Approximation
    };
    mann_whitney_u_with(xs, ys, method)
}

pub fn mann_whitney_u_with(xs: &[f64], ys: &[f64], method: PMethod) -> Result<RankTestResult, StatsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(xs)?;
    check_finite(ys)?;
    let (n1, n2) = (xs.len(), ys.len());
    let n = n1 + n2;
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let ranks = midranks(&pooled);
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let u = ranks[..n1].iter().sum::<f64>() - offset;
    let mean = (n1 * n2) as f64 / 2.0;

    let p_value = match method {
        PMethod::Exact => {
            if n > SUBSET_FORCED_MAX {
                return Err(StatsError::TooLargeForExact(SUBSET_FORCED_MAX));
            }
            let observed = (u - mean).abs();
            let eps = extreme_eps(observed);
            let (mut hits, mut total) = (0u64, 0u64);
            for_each_subset(n, n1, |mask| {
                let sum: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
                total += 1;
                if (sum - offset - mean).abs() >= observed - eps {
                    hits += 1;
                }
            });
            hits as f64 / total as f64
        }
        PMethod::Approximation => {
            let nf = n as f64;
            let var = (n1 * n2) as f64 / 12.0 * ((nf + 1.0) - tie_term(&pooled) / (nf * (nf - 1.0)));
            if var <= 0.0 {
                1.0
            } else {
                let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
                normal_two_sided(z)
            }
        }
    };
    Ok(RankTestResult {
        statistic: u,
        p_value,
        method,
    })
}

/// Paired signed-rank test on `x - y`; the statistic is the positive rank sum
/// W+. Zero differences are dropped.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<RankTestResult, StatsError> {
    let nonzero = pairs.iter().filter(|(x, y)| x - y != 0.0).count();
    let method = if nonzero <= WILCOXON_EXACT_MAX {
        PMethod::Exact
    } else {
        PMethod::Approximation
    };
    wilcoxon_signed_rank_with(pairs, method)
}

pub fn wilcoxon_signed_rank_with(pairs: &[(f64, f64)], method: PMethod) -> Result<RankTestResult, StatsError> {
    if pairs.is_empty() {
        return Err(StatsError::EmptySample);
    }
    for &(x, y) in pairs {
        check_finite(&[x, y])?;
    }
    let diffs: Vec<f64> = pairs.iter().map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    let n = diffs.len();
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&magnitudes);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let mean = ranks.iter().sum::<f64>() / 2.0;

    let p_value = match method {
        PMethod::Exact => {
            if n > SUBSET_FORCED_MAX {
                return Err(StatsError::TooLargeForExact(SUBSET_FORCED_MAX));
            }
            let observed = (w_plus - mean).abs();
            let eps = extreme_eps(observed);
            let mut hits = 0u64;
            let total = 1u64 << n;
            for mask in 0..total {
                let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
                if (w - mean).abs() >= observed - eps {
                    hits += 1;
                }
            }
            hits as f64 / total as f64
        }
        PMethod::Approximation => {
            let nf = n as f64;
            let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&magnitudes) / 48.0;
            if var <= 0.0 {
                1.0
            } else {
                let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
                normal_two_sided(z)
            }
        }
    };
    Ok(RankTestResult {
        statistic: w_plus,
        p_value,
        method,
    })
}
