//! Dense two-phase primal simplex with Bland's rule.

use super::OptimizeError;

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }
}

/// `minimize objective . x` subject to the constraints and `x >= lower_bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower_bounds: Vec<f64>,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), OptimizeError> {
        let n = self.n_vars();
        if n == 0 {
            return Err(OptimizeError::Invalid("no variables".into()));
        }
        if self.lower_bounds.len() != n {
            return Err(OptimizeError::Invalid(
                "lower bounds length mismatch".into(),
            ));
        }
        if self.constraints.iter().any(|c| c.coeffs.len() != n) {
            return Err(OptimizeError::Invalid("constraint length mismatch".into()));
        }
        let finite = self
            .objective
            .iter()
            .chain(&self.lower_bounds)
            .all(|v| v.is_finite())
            && self
                .constraints
                .iter()
                .all(|c| c.rhs.is_finite() && c.coeffs.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(OptimizeError::Invalid("non-finite coefficient".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

struct Tableau {
    /// `rows[i]` holds the constraint coefficients followed by the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, cost: &mut [f64], r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = cost[c];
        if f != 0.0 {
            for (v, &pv) in cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced costs for `objective` given the current basis; the last entry
    /// holds minus the objective value.
    fn reduced_costs(&self, objective: &[f64]) -> Vec<f64> {
        let mut cost = objective.to_vec();
        cost.push(0.0);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let f = cost[b];
            if f != 0.0 {
                for (v, &rv) in cost.iter_mut().zip(row) {
                    *v -= f * rv;
                }
            }
        }
        cost
    }

    /// Runs Bland-rule pivots over the columns `< allowed`.
    fn optimize(&mut self, cost: &mut [f64], allowed: usize) -> Result<(), OptimizeError> {
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..allowed).find(|&c| cost[c] < -PIVOT_TOL) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOL {
                    let ratio = row[self.width] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(OptimizeError::Unbounded);
            };
            self.pivot(cost, r, enter);
        }
        Err(OptimizeError::IterationLimit(MAX_PIVOTS))
    }
}

/// Solves a small dense LP exactly (up to floating point).
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, OptimizeError> {
    lp.validate()?;
    let n = lp.n_vars();

    // Shift x = x' + lower so that x' >= 0, and make every rhs nonnegative.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            let shift: f64 = c
                .coeffs
                .iter()
                .zip(&lp.lower_bounds)
                .map(|(a, l)| a * l)
                .sum();
            (c.coeffs.clone(), c.relation, c.rhs - shift)
        })
        .collect();
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            coeffs.iter_mut().for_each(|a| *a = -*a);
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let real = n + n_slack;
    let width = real + n_art;

    let mut tableau = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
    };
    let (mut slack, mut art) = (n, real);
    for (coeffs, rel, rhs) in &rows {
        let mut row = vec![0.0; width + 1];
        row[..n].copy_from_slice(coeffs);
        row[width] = *rhs;
        match rel {
            Relation::Le => {
                row[slack] = 1.0;
                tableau.basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -1.0;
                slack += 1;
                row[art] = 1.0;
                tableau.basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                row[art] = 1.0;
                tableau.basis.push(art);
                art += 1;
            }
        }
        tableau.rows.push(row);
    }

    if n_art > 0 {
        let mut phase_one = vec![0.0; width];
        phase_one[real..].iter_mut().for_each(|c| *c = 1.0);
        let mut cost = tableau.reduced_costs(&phase_one);
        tableau.optimize(&mut cost, width)?;
        let infeasibility = -cost[width];
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeasibility > 1e-9 * scale {
            return Err(OptimizeError::Infeasible);
        }
        // Drive remaining (zero-level) artificials out of the basis.
        let mut r = 0;
        while r < tableau.rows.len() {
            if tableau.basis[r] >= real {
                match (0..real).find(|&c| tableau.rows[r][c].abs() > PIVOT_TOL) {
                    Some(c) => tableau.pivot(&mut cost, r, c),
                    None => {
                        // Redundant row.
                        tableau.rows.remove(r);
                        tableau.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut objective = vec![0.0; width];
    objective[..n].copy_from_slice(&lp.objective);
    let mut cost = tableau.reduced_costs(&objective);
    tableau.optimize(&mut cost, real)?;

    let mut x = lp.lower_bounds.clone();
    for (row, &b) in tableau.rows.iter().zip(&tableau.basis) {
        if b < n {
            x[b] += row[width];
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { value, x })
}
