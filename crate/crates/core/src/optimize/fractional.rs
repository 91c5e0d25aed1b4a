//! Linear-fractional programs over a shifted simplex.

use super::simplex::{solve_lp, Constraint, LinearProgram, Relation};
use super::{simplex_vertices, OptimizeError};

/// `minimize (numerator . x + numerator_constant) / (denominator . x + denominator_constant)`
/// subject to `x_j >= lower_bound` and `sum x = total`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalLp {
    pub numerator: Vec<f64>,
    pub numerator_constant: f64,
    pub denominator: Vec<f64>,
    pub denominator_constant: f64,
    pub lower_bound: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

impl FractionalLp {
    pub fn k(&self) -> usize {
        self.numerator.len()
    }

    pub fn ratio(&self, x: &[f64]) -> f64 {
        let num: f64 = self
            .numerator
            .iter()
            .zip(x)
            .map(|(g, v)| g * v)
            .sum::<f64>()
            + self.numerator_constant;
        let den: f64 = self
            .denominator
            .iter()
            .zip(x)
            .map(|(d, v)| d * v)
            .sum::<f64>()
            + self.denominator_constant;
        num / den
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        simplex_vertices(self.k(), self.lower_bound, self.total)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let k = self.k();
        if k == 0 {
            return Err(OptimizeError::Invalid("empty program".into()));
        }
        if self.denominator.len() != k {
            return Err(OptimizeError::Invalid(
                "numerator and denominator lengths differ".into(),
            ));
        }
        let finite = self
            .numerator
            .iter()
            .chain(&self.denominator)
            .chain([
                &self.numerator_constant,
                &self.denominator_constant,
                &self.lower_bound,
                &self.total,
            ])
            .all(|v| v.is_finite());
        if !finite {
            return Err(OptimizeError::Invalid("non-finite coefficient".into()));
        }
        if self.lower_bound < 0.0 || self.total < k as f64 * self.lower_bound {
            return Err(OptimizeError::Invalid("empty feasible set".into()));
        }
        // The denominator is affine, so it is positive on the polytope iff it
        // is positive at every vertex.
        let positive = self.vertices().iter().all(|v| {
            self.denominator
                .iter()
                .zip(v)
                .map(|(d, x)| d * x)
                .sum::<f64>()
                + self.denominator_constant
                > 0.0
        });
        if !positive {
            return Err(OptimizeError::DenominatorNotPositive);
        }
        Ok(())
    }
}

/// Charnes-Cooper transformation: with `y = x t` and `t >= 0`,
///
/// ```text
/// minimize   g.y + g0 t
/// subject to d.y + d0 t = 1
///            y_j - eps t >= 0
///            sum y - T t = 0
/// ```
///
/// Variables are `(y_1, ..., y_k, t)`.
pub fn charnes_cooper(lp: &FractionalLp) -> Result<LinearProgram, OptimizeError> {
    lp.validate()?;
    let k = lp.k();
    let mut objective = lp.numerator.clone();
    objective.push(lp.numerator_constant);

    let mut constraints = Vec::with_capacity(k + 2);
    let mut norm = lp.denominator.clone();
    norm.push(lp.denominator_constant);
    constraints.push(Constraint::new(norm, Relation::Eq, 1.0));
    for j in 0..k {
        let mut row = vec![0.0; k + 1];
        row[j] = 1.0;
        row[k] = -lp.lower_bound;
        constraints.push(Constraint::new(row, Relation::Ge, 0.0));
    }
    let mut sum = vec![1.0; k + 1];
    sum[k] = -lp.total;
    constraints.push(Constraint::new(sum, Relation::Eq, 0.0));

    Ok(LinearProgram {
        objective,
        constraints,
        lower_bounds: vec![0.0; k + 1],
    })
}

/// Solves the fractional program through [`charnes_cooper`] and maps the
/// optimum back to `x = y / t`.
///
/// The denominator is rescaled to a minimum of one over the polytope and the
/// numerator to unit magnitude, so `t` stays in `(0, 1]` whatever the scale
/// of the coefficients.
pub fn solve_fractional(lp: &FractionalLp) -> Result<FractionalSolution, OptimizeError> {
    lp.validate()?;
    let den_min = lp
        .vertices()
        .iter()
        .map(|v| {
            lp.denominator
                .iter()
                .zip(v)
                .map(|(d, x)| d * x)
                .sum::<f64>()
                + lp.denominator_constant
        })
        .fold(f64::INFINITY, f64::min);
    let num_scale = lp
        .numerator
        .iter()
        .chain([&lp.numerator_constant])
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let num_scale = if num_scale > 0.0 { num_scale } else { 1.0 };
    let scaled = FractionalLp {
        numerator: lp.numerator.iter().map(|g| g / num_scale).collect(),
        numerator_constant: lp.numerator_constant / num_scale,
        denominator: lp.denominator.iter().map(|d| d / den_min).collect(),
        denominator_constant: lp.denominator_constant / den_min,
        lower_bound: lp.lower_bound,
        total: lp.total,
    };

    let transformed = charnes_cooper(&scaled)?;
    let sol = solve_lp(&transformed)?;
    let k = lp.k();
    let t = sol.x[k];
    if t <= 0.0 {
        return Err(OptimizeError::DenominatorNotPositive);
    }
    let x: Vec<f64> = sol.x[..k].iter().map(|y| y / t).collect();
    Ok(FractionalSolution {
        value: sol.value * num_scale / den_min,
        x,
    })
}

/// Minimum of the ratio over the `k` vertices (ties to the lowest index).
/// A linear-fractional objective attains its minimum at a vertex, so this is
/// an exact reference for [`solve_fractional`].
pub fn vertex_oracle(lp: &FractionalLp) -> Result<(f64, usize), OptimizeError> {
    lp.validate()?;
    let mut best = (f64::INFINITY, 0);
    for (i, v) in lp.vertices().iter().enumerate() {
        let r = lp.ratio(v);
        if r < best.0 {
            best = (r, i);
        }
    }
    Ok(best)
}
