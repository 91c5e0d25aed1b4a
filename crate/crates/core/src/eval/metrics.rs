/// Mean of `(1 - P(true class))^2`.
pub fn brier(predictions: &[Vec<f64>], truths: &[usize]) -> f64 {
    assert_eq!(predictions.len(), truths.len());
    let total: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, &t)| (1.0 - p[t]).powi(2))
        .sum();
    total / truths.len() as f64
}

/// Determinacy, single-accuracy, set-accuracy and indeterminate output size.
/// The last three are `None` when no instance falls in their denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CredalMetrics {
    pub determinacy: f64,
    pub single_accuracy: Option<f64>,
    pub set_accuracy: Option<f64>,
    pub output_size: Option<f64>,
}

pub fn credal_metrics(sets: &[Vec<usize>], truths: &[usize]) -> CredalMetrics {
    assert_eq!(sets.len(), truths.len());
    assert!(
        !sets.is_empty(),
        "credal metrics need at least one instance"
    );
    let (mut single, mut single_hit) = (0usize, 0usize);
    let (mut multi, mut multi_hit, mut multi_size) = (0usize, 0usize, 0usize);
    for (set, t) in sets.iter().zip(truths) {
        if set.len() == 1 {
            single += 1;
            single_hit += usize::from(set[0] == *t);
        } else {
            multi += 1;
            multi_hit += usize::from(set.contains(t));
            multi_size += set.len();
        }
    }
    let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    CredalMetrics {
        determinacy: single as f64 / sets.len() as f64,
        single_accuracy: ratio(single_hit, single),
        set_accuracy: ratio(multi_hit, multi),
        output_size: ratio(multi_size, multi),
    }
}

/// Per-instance discounted accuracy: `1/|set|` when the set holds the truth.
pub fn discounted(set: &[usize], truth: usize) -> f64 {
    if set.contains(&truth) {
        1.0 / set.len() as f64
    } else {
        0.0
    }
}

pub fn discounted_accuracy(sets: &[Vec<usize>], truths: &[usize]) -> f64 {
    assert_eq!(sets.len(), truths.len());
    sets.iter()
        .zip(truths)
        .map(|(s, &t)| discounted(s, t))
        .sum::<f64>()
        / truths.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Utility {
    U65,
    U80,
}

/// Utility of a discounted-accuracy value, the quadratic through
/// `u(0) = 0`, `u(1) = 1` and `u(0.5) = 0.65` (U65) or `0.8` (U80):
/// `u65(x) = -0.6x^2 + 1.6x`, `u80(x) = -1.2x^2 + 2.2x`.
pub fn utility(x: f64, which: Utility) -> f64 {
    // Integer coefficients keep the anchor points exact.
    match which {
        Utility::U65 => (16.0 * x - 6.0 * x * x) / 10.0,
        Utility::U80 => (22.0 * x - 12.0 * x * x) / 10.0,
    }
}

/// Mean utility over instances.
pub fn mean_utility(sets: &[Vec<usize>], truths: &[usize], which: Utility) -> f64 {
    assert_eq!(sets.len(), truths.len());
    sets.iter()
        .zip(truths)
        .map(|(s, &t)| utility(discounted(s, t), which))
        .sum::<f64>()
        / truths.len() as f64
}
