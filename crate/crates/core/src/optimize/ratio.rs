//! Ratios of log-linear functions over a shifted simplex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{simplex_vertices, OptimizeError};

/// Seeded interior starting points used in addition to the vertices and the barycenter.
pub const RANDOM_STARTS: usize = 20;
const MAX_ITERS: usize = 10_000;
const GRAD_TOL: f64 = 1e-9;
const ARMIJO: f64 = 1e-4;

/// `minimize (sum alpha_j ln y_j - a) / (sum beta_j ln y_j - b)`
/// subject to `y_j >= lower_bound` and `sum y = total`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioProgram {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    a: f64,
    b: f64,
    lower_bound: f64,
    total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSolution {
    pub value: f64,
    pub y: Vec<f64>,
    /// Index of the start that produced the optimum: vertices first, then the
    /// barycenter, then the random points.
    pub start: usize,
}

impl RatioProgram {
    /// Fails with [`OptimizeError::IndefiniteRatio`] unless the denominator is
    /// positive on the whole feasible set. With nonnegative `beta` the
    /// denominator is concave, so checking the vertices is exact.
    pub fn new(
        alpha: Vec<f64>,
        beta: Vec<f64>,
        a: f64,
        b: f64,
        lower_bound: f64,
        total: f64,
    ) -> Result<Self, OptimizeError> {
        let k = alpha.len();
        if k == 0 || beta.len() != k {
            return Err(OptimizeError::Invalid("coefficient lengths".into()));
        }
        let finite = alpha
            .iter()
            .chain(&beta)
            .chain([&a, &b, &lower_bound, &total])
            .all(|v| v.is_finite());
        if !finite {
            return Err(OptimizeError::Invalid("non-finite coefficient".into()));
        }
        if alpha.iter().chain(&beta).any(|&v| v < 0.0) {
            return Err(OptimizeError::Invalid("negative coefficient".into()));
        }
        if lower_bound <= 0.0 || total < k as f64 * lower_bound {
            return Err(OptimizeError::Invalid("empty feasible set".into()));
        }
        let rp = Self {
            alpha,
            beta,
            a,
            b,
            lower_bound,
            total,
        };
        if rp.vertices().iter().any(|v| !(rp.denominator(v) > 0.0)) {
            return Err(OptimizeError::IndefiniteRatio);
        }
        Ok(rp)
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn numerator(&self, y: &[f64]) -> f64 {
        self.alpha
            .iter()
            .zip(y)
            .map(|(c, v)| c * v.ln())
            .sum::<f64>()
            - self.a
    }

    pub fn denominator(&self, y: &[f64]) -> f64 {
        self.beta
            .iter()
            .zip(y)
            .map(|(c, v)| c * v.ln())
            .sum::<f64>()
            - self.b
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.numerator(y) / self.denominator(y)
    }

    fn value_and_gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.numerator(y);
        let d = self.denominator(y);
        let d2 = d * d;
        for (j, g) in grad.iter_mut().enumerate() {
            *g = (self.alpha[j] * d - self.beta[j] * n) / (y[j] * d2);
        }
        n / d
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        simplex_vertices(self.k(), self.lower_bound, self.total)
    }

    pub fn barycenter(&self) -> Vec<f64> {
        vec![self.total / self.k() as f64; self.k()]
    }

    /// Vertices, barycenter and [`RANDOM_STARTS`] uniform interior points.
    pub fn starts(&self, seed: u64) -> Vec<Vec<f64>> {
        let k = self.k();
        let free = self.total - k as f64 * self.lower_bound;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.vertices();
        out.push(self.barycenter());
        for _ in 0..RANDOM_STARTS {
            let mut e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            for v in e.iter_mut() {
                *v = self.lower_bound + free * *v / s;
            }
            out.push(e);
        }
        out
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        project_shifted_simplex(v, self.lower_bound, self.total)
    }
}

/// Euclidean projection onto `{y_j >= lower, sum y = total}`.
pub(crate) fn project_shifted_simplex(v: &[f64], lower: f64, total: f64) -> Vec<f64> {
    let k = v.len();
    let free = total - k as f64 * lower;
    if free <= 0.0 {
        return vec![lower; k];
    }
    let mut u: Vec<f64> = v.iter().map(|x| x - lower).collect();
    u.sort_by(|x, y| y.total_cmp(x));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - free) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter()
        .map(|x| lower + (x - lower - theta).max(0.0))
        .collect()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Monotone projected gradient with Barzilai-Borwein trial steps and Armijo
/// backtracking. Stops early once the value drops to `stop_at`.
fn descend(rp: &RatioProgram, start: &[f64], stop_at: Option<f64>) -> (f64, Vec<f64>) {
    let k = rp.k();
    let mut y = start.to_vec();
    let mut g = vec![0.0; k];
    let mut f = rp.value_and_gradient(&y, &mut g);
    let mut step = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut trial = vec![0.0; k];

    for _ in 0..MAX_ITERS {
        if stop_at.is_some_and(|t| f <= t) {
            break;
        }
        for j in 0..k {
            trial[j] = y[j] - g[j];
        }
        let p = rp.project(&trial);
        let pg: f64 = p
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if pg < GRAD_TOL {
            break;
        }
        if let Some((yp, gp)) = &prev {
            let s: Vec<f64> = y.iter().zip(yp).map(|(a, b)| a - b).collect();
            let r: Vec<f64> = g.iter().zip(gp).map(|(a, b)| a - b).collect();
            let sr = dot(&s, &r);
            if sr > 0.0 {
                step = dot(&s, &s) / sr;
            }
        }
        step = step.clamp(1e-12, 1e12);

        let accepted = loop {
            for j in 0..k {
                trial[j] = y[j] - step * g[j];
            }
            let cand = rp.project(&trial);
            let descent: f64 = g
                .iter()
                .zip(cand.iter().zip(&y))
                .map(|(gj, (c, yj))| gj * (c - yj))
                .sum();
            if descent >= 0.0 {
                break None;
            }
            let fc = rp.value(&cand);
            if fc <= f + ARMIJO * descent {
                break Some((fc, cand));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((fc, cand)) = accepted else { break };
        let old = std::mem::replace(&mut y, cand);
        let old_g = g.clone();
        f = rp.value_and_gradient(&y, &mut g);
        debug_assert!((f - fc).abs() <= 1e-12 * (1.0 + fc.abs()));
        prev = Some((old, old_g));
    }
    (f, y)
}

fn multistart(rp: &RatioProgram, seed: u64, stop_at: Option<f64>) -> RatioSolution {
    let starts = rp.starts(seed);
    let values: Vec<f64> = starts.iter().map(|s| rp.value(s)).collect();
    if let Some(t) = stop_at {
        if let Some(i) = values.iter().position(|&v| v <= t) {
            return RatioSolution {
                value: values[i],
                y: starts[i].clone(),
                start: i,
            };
        }
    }
    if rp.total == rp.k() as f64 * rp.lower_bound || rp.k() == 1 {
        return RatioSolution {
            value: values[0],
            y: starts[0].clone(),
            start: 0,
        };
    }
    let mut best: Option<RatioSolution> = None;
    for (i, s) in starts.iter().enumerate() {
        let (value, y) = descend(rp, s, stop_at);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(RatioSolution { value, y, start: i });
        }
        if stop_at.is_some_and(|t| value <= t) {
            break;
        }
    }
    best.expect("at least one start")
}

/// Best local minimum over all starts. Ties go to the lowest start index.
pub fn minimize_ratio(rp: &RatioProgram, seed: u64) -> RatioSolution {
    multistart(rp, seed, None)
}

/// `minimize_ratio(rp, seed).value > threshold`, returning as soon as any
/// evaluated feasible point reaches the threshold.
pub fn ratio_min_exceeds(rp: &RatioProgram, threshold: f64, seed: u64) -> bool {
    multistart(rp, seed, Some(threshold)).value > threshold
}
