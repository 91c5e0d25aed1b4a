//! Numerical core of the dominance tests.
//!
//! * [`FractionalLp`]: minimize `(g.x + g0) / (d.x + d0)` over
//!   `{x_j >= eps, sum x = T}`. Solved exactly by the Charnes-Cooper
//!   transformation into a [`LinearProgram`] and a dense two-phase simplex;
//!   [`vertex_oracle`] evaluates the k extreme points as an independent check.
//! * [`RatioProgram`]: minimize `(sum a_j ln y_j - a) / (sum b_j ln y_j - b)`
//!   over the same kind of polytope. This objective is neither convex nor
//!   quasi-convex, and Dinkelbach subproblems `sum (a_j - l b_j) ln y_j` mix
//!   concave and convex terms, so [`minimize_ratio`] runs projected gradient
//!   descent from every vertex, the barycenter and seeded random interior
//!   points and keeps the best local minimum.

mod fractional;
mod ratio;
mod simplex;

use thiserror::Error;

pub use fractional::{
    charnes_cooper, solve_fractional, vertex_oracle, FractionalLp, FractionalSolution,
};
pub use ratio::{minimize_ratio, ratio_min_exceeds, RatioProgram, RatioSolution, RANDOM_STARTS};
pub use simplex::{solve_lp, Constraint, LinearProgram, LpSolution, Relation};

/// Margin for "optimum greater than one": dominance requires `value > 1 + DOMINANCE_MARGIN`.
pub const DOMINANCE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("denominator is not positive over the feasible set")]
    DenominatorNotPositive,
    #[error("ratio denominator is not positive over the feasible set")]
    IndefiniteRatio,
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// The `k` extreme points of `{x_j >= lower, sum x = total}`.
pub(crate) fn simplex_vertices(k: usize, lower: f64, total: f64) -> Vec<Vec<f64>> {
    let top = total - (k as f64 - 1.0) * lower;
    (0..k)
        .map(|i| {
            let mut v = vec![lower; k];
            v[i] = top;
            v
        })
        .collect()
}
