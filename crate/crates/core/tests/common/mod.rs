#![allow(dead_code)]

use credal_aode::dataset::Dataset;
use credal_aode::optimize::FractionalLp;
use rand::distributions::WeightedIndex;
use rand::prelude::*;

pub const GRID_STEP: f64 = 1e-3;
pub const MARGIN: f64 = 1e-9;

fn compositions_rec<F: FnMut(&[usize])>(buf: &mut [usize], i: usize, left: usize, f: &mut F) {
    if i + 1 == buf.len() {
        buf[i] = left;
        f(buf);
        return;
    }
    for v in 0..=left {
        buf[i] = v;
        compositions_rec(buf, i + 1, left - v, f);
    }
}

/// Every vector of `parts` nonnegative integers summing to `units`.
pub fn compositions(parts: usize, units: usize, mut f: impl FnMut(&[usize])) {
    let mut buf = vec![0; parts];
    compositions_rec(&mut buf, 0, units, &mut f);
}

/// Grid units between `parts * lower` and `total`; panics off the lattice.
pub fn grid_units(parts: usize, lower: f64, total: f64) -> usize {
    let free = total - parts as f64 * lower;
    let units = (free / GRID_STEP).round();
    assert!(
        (units * GRID_STEP - free).abs() < 1e-9,
        "free mass {free} is off the grid"
    );
    units as usize
}

/// `ln(lower + i * step)` for every grid index.
fn log_table(lower: f64, units: usize) -> Vec<f64> {
    (0..=units)
        .map(|i| (lower + i as f64 * GRID_STEP).ln())
        .collect()
}

/// Minimum of the linear-fractional objective over the explicit vertices.
pub fn vertex_min(lp: &FractionalLp) -> f64 {
    let k = lp.numerator.len();
    let top = lp.total - (k - 1) as f64 * lp.lower_bound;
    (0..k)
        .map(|i| {
            let (mut num, mut den) = (lp.numerator_constant, lp.denominator_constant);
            for j in 0..k {
                let x = if i == j { top } else { lp.lower_bound };
                num += lp.numerator[j] * x;
                den += lp.denominator[j] * x;
            }
            num / den
        })
        .fold(f64::INFINITY, f64::min)
}

/// Grid minimum of `(sum alpha ln y - a) / (sum beta ln y - b)`.
pub fn grid_ratio_min(alpha: &[f64], beta: &[f64], a: f64, b: f64, lower: f64, total: f64) -> f64 {
    let k = alpha.len();
    let units = grid_units(k, lower, total);
    let logs = log_table(lower, units);
    let mut best = f64::INFINITY;
    compositions(k, units, |idx| {
        let (mut num, mut den) = (-a, -b);
        for j in 0..k {
            num += alpha[j] * logs[idx[j]];
            den += beta[j] * logs[idx[j]];
        }
        best = best.min(num / den);
    });
    best
}

/// Pairwise grid minima of `N(c1) / N(c2)` where `N(c)` is a sum of
/// per-model terms; `None` when some grid point has `N(c2) <= 0`.
struct PairMinima {
    n_classes: usize,
    min: Vec<f64>,
    bad_denominator: Vec<bool>,
}

impl PairMinima {
    fn new(n_classes: usize) -> Self {
        Self {
            n_classes,
            min: vec![f64::INFINITY; n_classes * n_classes],
            bad_denominator: vec![false; n_classes],
        }
    }

    fn update(&mut self, mass: &[f64]) {
        let l = self.n_classes;
        for c2 in 0..l {
            if mass[c2] <= 0.0 {
                self.bad_denominator[c2] = true;
                continue;
            }
            for c1 in 0..l {
                let r = mass[c1] / mass[c2];
                let slot = &mut self.min[c1 * l + c2];
                if r < *slot {
                    *slot = r;
                }
            }
        }
    }

    fn dominates(&self, c1: usize, c2: usize) -> bool {
        !self.bad_denominator[c2] && self.min[c1 * self.n_classes + c2] > 1.0 + MARGIN
    }

    fn maximal(&self) -> Vec<usize> {
        let l = self.n_classes;
        (0..l)
            .filter(|&c2| !(0..l).any(|c1| c1 != c2 && self.dominates(c1, c2)))
            .collect()
    }
}

/// Conditional log-likelihood recomputed from per-model class posteriors on
/// the training instances.
pub fn log_likelihoods(posteriors: &[Vec<Vec<f64>>], truths: &[usize]) -> Vec<f64> {
    let k = posteriors.first().map_or(0, |p| p.len());
    (0..k)
        .map(|j| {
            posteriors
                .iter()
                .zip(truths)
                .map(|(p, &c)| p[j][c].ln())
                .sum()
        })
        .collect()
}

/// Non-dominated classes when the model prior ranges over every grid point
/// with `P(s_j) >= eps` and total one; pruned models contribute nothing.
pub fn bma_grid_set(
    posteriors: &[Vec<f64>],
    spode_ll: &[f64],
    epsilon: f64,
    prune_log_ratio: f64,
) -> Vec<usize> {
    let k = posteriors.len();
    let l = posteriors[0].len();
    let max = spode_ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weight: Vec<f64> = spode_ll
        .iter()
        .map(|&ll| {
            if ll >= max - prune_log_ratio {
                (ll - max).exp()
            } else {
                0.0
            }
        })
        .collect();
    let units = grid_units(k, epsilon, 1.0);
    let mut pairs = PairMinima::new(l);
    let mut mass = vec![0.0; l];
    compositions(k, units, |idx| {
        mass.iter_mut().for_each(|m| *m = 0.0);
        for j in 0..k {
            let p = (epsilon + idx[j] as f64 * GRID_STEP) * weight[j];
            for c in 0..l {
                mass[c] += p * posteriors[j][c];
            }
        }
        pairs.update(&mass);
    });
    pairs.maximal()
}

/// Non-dominated classes under the compression credal set: the null model
/// keeps `eps`, every SPODE prior ranges over the grid with `P(s_j) >= eps`
/// and total `1 - eps`. Models whose coefficient cannot be positive are
/// left out of the mixture.
pub fn comp_grid_set(
    posteriors: &[Vec<f64>],
    spode_ll: &[f64],
    null_ll: f64,
    epsilon: f64,
) -> Vec<usize> {
    let k = posteriors.len();
    let l = posteriors[0].len();
    let z = null_ll + epsilon.ln();
    let top = 1.0 - k as f64 * epsilon;
    let feasible: Vec<usize> = (0..k)
        .filter(|&j| 1.0 - (spode_ll[j] + top.ln()) / z > 0.0)
        .collect();
    if feasible.is_empty() {
        return (0..l).collect();
    }
    let units = grid_units(k, epsilon, 1.0 - epsilon);
    let logs = log_table(epsilon, units);
    let mut pairs = PairMinima::new(l);
    let mut mass = vec![0.0; l];
    compositions(k, units, |idx| {
        mass.iter_mut().for_each(|m| *m = 0.0);
        for &j in &feasible {
            let pi = 1.0 - (spode_ll[j] + logs[idx[j]]) / z;
            for c in 0..l {
                mass[c] += pi * posteriors[j][c];
            }
        }
        pairs.update(&mass);
    });
    pairs.maximal()
}

fn random_dist(rng: &mut impl Rng, n: usize) -> WeightedIndex<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powi(2) + 0.02).collect();
    WeightedIndex::new(w).unwrap()
}

/// Random categorical data: every feature depends on the class, and each
/// feature after the first also on the first feature.
pub fn random_dataset(
    rng: &mut impl Rng,
    n: usize,
    k: usize,
    n_classes: usize,
    max_card: usize,
) -> Dataset {
    let cards: Vec<usize> = (0..k).map(|_| rng.gen_range(2..=max_card)).collect();
    let prior = random_dist(rng, n_classes);
    let first: Vec<WeightedIndex<f64>> =
        (0..n_classes).map(|_| random_dist(rng, cards[0])).collect();
    let rest: Vec<Vec<Vec<WeightedIndex<f64>>>> = (1..k)
        .map(|f| {
            (0..n_classes)
                .map(|_| (0..cards[0]).map(|_| random_dist(rng, cards[f])).collect())
                .collect()
        })
        .collect();
    let mut classes = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let c = prior.sample(rng);
        let x0 = first[c].sample(rng);
        let mut row = vec![x0];
        for cpt in &rest {
            row.push(cpt[c][x0].sample(rng));
        }
        classes.push(c);
        rows.push(row);
    }
    Dataset::new(
        (0..k).map(|f| format!("f{f}")).collect(),
        cards
            .iter()
            .map(|&m| (0..m).map(|v| v.to_string()).collect())
            .collect(),
        (0..n_classes).map(|c| format!("c{c}")).collect(),
        classes,
        rows,
    )
    .unwrap()
}

pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Two-sided exact signed-rank p-value by enumerating all sign patterns.
pub fn enumerated_signed_rank_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|v| *v != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    // Midranks by counting: rank = #smaller + (#equal + 1) / 2.
    let ranks: Vec<f64> = abs
        .iter()
        .map(|&v| {
            let smaller = abs.iter().filter(|&&u| u < v).count() as f64;
            let equal = abs.iter().filter(|&&u| u == v).count() as f64;
            smaller + (equal + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = d
        .iter()
        .zip(&ranks)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| r)
        .sum();
    let (mut low, mut high) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if w <= observed + 1e-9 {
            low += 1;
        }
        if w >= observed - 1e-9 {
            high += 1;
        }
    }
    let all = (1u64 << n) as f64;
    (2.0 * (low.min(high) as f64 / all)).min(1.0)
}
