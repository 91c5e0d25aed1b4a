//! Small helpers for discrete mass functions.

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Divides by the sum in place.
pub fn normalize(values: &mut [f64]) {
    let total: f64 = values.iter().sum();
    for v in values.iter_mut() {
        *v /= total;
    }
}

/// `ln(sum(exp(x)))`, shifted by the maximum.
pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + logs.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}

/// Normalized exponentials of log-values, shifted by the maximum.
pub fn softmax(logs: &[f64]) -> Vec<f64> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    normalize(&mut out);
    out
}

/// Convex combination `sum_j weights[j] * rows[j]`, renormalized.
pub fn mixture(rows: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let width = rows.first().map_or(0, Vec::len);
    let mut out = vec![0.0; width];
    for (row, &w) in rows.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, &p) in out.iter_mut().zip(row) {
            *o += w * p;
        }
    }
    normalize(&mut out);
    out
}
