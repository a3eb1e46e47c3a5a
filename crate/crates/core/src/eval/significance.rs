//! Mann-Whitney-Wilcoxon rank-sum test.

use std::fmt;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::eval::metrics::average_ranks;

/// Largest pooled sample size for which the exact null distribution is enumerated.
pub const EXACT_MAX_TOTAL: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Exact when the pooled size is at most [`EXACT_MAX_TOTAL`], else normal.
    Auto,
    Exact,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MannWhitney {
    /// `U` statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub exact: bool,
}

impl MannWhitney {
    pub fn significance(&self) -> Significance {
        Significance::from_p(self.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Significance {
    None,
    /// p < 0.05
    Weak,
    /// p < 0.01
    Strong,
}

impl Significance {
    pub fn from_p(p: f64) -> Self {
        if p < 0.01 {
            Significance::Strong
        } else if p < 0.05 {
            Significance::Weak
        } else {
            Significance::None
        }
    }

    pub fn marker(self) -> &'static str {
        match self {
            Significance::None => "",
            Significance::Weak => "△",
            Significance::Strong => "▲",
        }
    }
}

impl fmt::Display for Significance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.marker())
    }
}

pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    mann_whitney_with(a, b, Method::Auto)
}

pub fn mann_whitney_with(a: &[f64], b: &[f64], method: Method) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("Mann-Whitney needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN in sample".into()));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    // Doubled midranks are integers, which keeps the exact path free of rounding.
    let doubled: Vec<i64> = average_ranks(&pooled).iter().map(|r| (2.0 * r).round() as i64).collect();
    let rank_sum2: i64 = doubled[..na].iter().sum();
    // 2U = 2R - na(na+1)
    let u2 = rank_sum2 - (na * (na + 1)) as i64;
    let u = u2 as f64 / 2.0;

    let exact = match method {
        Method::Exact => true,
        Method::Normal => false,
        Method::Auto => n <= EXACT_MAX_TOTAL,
    };
    let p = if exact {
        exact_p(&doubled, na, u2)
    } else {
        normal_p(&pooled, na, nb, u)
    };
    Ok(MannWhitney { u, p, exact })
}

/// Two-sided p: share of all `C(n, na)` group assignments whose `U` is at
/// least as far from its mean as the observed one.
fn exact_p(doubled_ranks: &[i64], na: usize, observed_u2: i64) -> f64 {
    let n = doubled_ranks.len();
    let nb = n - na;
    // 4·mean(U) = 2·na·nb; compare |2U − na·nb| in doubled units.
    let center = (na * nb) as i64;
    let observed = (observed_u2 - center).abs();
    let offset = (na * (na + 1)) as i64;

    let mut hits = 0u64;
    let mut total = 0u64;
    let mut chosen: Vec<usize> = (0..na).collect();
    loop {
        let r2: i64 = chosen.iter().map(|&i| doubled_ranks[i]).sum();
        if (r2 - offset - center).abs() >= observed {
            hits += 1;
        }
        total += 1;
        // Next combination in lexicographic order.
        let mut i = na;
        loop {
            if i == 0 {
                return hits as f64 / total as f64;
            }
            i -= 1;
            if chosen[i] < n - na + i {
                break;
            }
        }
        chosen[i] += 1;
        for j in i + 1..na {
            chosen[j] = chosen[j - 1] + 1;
        }
    }
}

/// Normal approximation with tie-corrected variance and continuity correction.
fn normal_p(pooled: &[f64], na: usize, nb: usize, u: f64) -> f64 {
    let n = (na + nb) as f64;
    let mean = (na * nb) as f64 / 2.0;
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = (na * nb) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return 1.0;
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}
