use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest number of nonzero differences handled by the exact distribution.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wilcoxon {
    /// `W+ - W-`: positive when `a` tends to exceed `b`.
    pub statistic: f64,
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
}

/// Average ranks of `|d|`, ties sharing their mean rank.
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
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided paired signed-rank test.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<Wilcoxon> {
    if a.len() != b.len() {
        return Err(Error::Config(format!(
            "paired samples differ in length: {} and {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(Wilcoxon {
            statistic: 0.0,
            p_value: 1.0,
            n,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let statistic = 2.0 * w_plus - total;

    let p_value = if n <= EXACT_LIMIT {
        exact_p(&ranks, w_plus)
    } else {
        normal_p(&abs, &ranks, w_plus)
    };
    Ok(Wilcoxon {
        statistic,
        p_value,
        n,
    })
}

/// Exact null distribution of `W+` by dynamic programming over doubled
/// (hence integer) midranks.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let observed = (2.0 * w_plus).round() as usize;
    let all = 2f64.powi(ranks.len() as i32);
    let lower: f64 = counts[..=observed].iter().sum::<f64>() / all;
    let upper: f64 = counts[observed..].iter().sum::<f64>() / all;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Normal approximation with tie and continuity corrections.
fn normal_p(abs: &[f64], ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = abs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        let t = j as f64;
        ties += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}
