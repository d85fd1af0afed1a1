//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Problems are `min cᵀx` subject to rows `aᵢᵀx {≤,≥,=} bᵢ` and `x ≥ 0`.
//! Sized for a few dozen variables; no sparsity, no presolve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEASIBILITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const DUALITY_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    /// Minimized.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub description: String,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, description: impl Into<String>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
            description: description.into(),
        }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Largest violation of any constraint or sign bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => (lhs - c.rhs).max(0.0),
                Relation::Ge => (c.rhs - lhs).max(0.0),
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexSolution {
    pub status: LpStatus,
    /// Meaningful only when optimal.
    pub objective: f64,
    pub x: Vec<f64>,
    /// One multiplier per constraint row, in input order.
    pub duals: Vec<f64>,
    pub dual_objective: f64,
    pub iterations: usize,
}

impl SimplexSolution {
    fn without_solution(status: LpStatus, n: usize, m: usize, iterations: usize) -> Self {
        Self {
            status,
            objective: f64::NAN,
            x: vec![f64::NAN; n],
            duals: vec![f64::NAN; m],
            dual_objective: f64::NAN,
            iterations,
        }
    }

    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs()
    }
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    /// Reduced-cost row, last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
    iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

    fn set_costs(&mut self, c: &[f64]) {
        let mut cost: Vec<f64> = c.to_vec();
        cost.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for (r, v) in cost.iter_mut().zip(&self.t[i]) {
                    *r -= cb * v;
                }
            }
        }
        self.cost = cost;
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<()> {
        let p = self.t[row][col];
        if !(p.abs() > PIVOT_TOL) || !p.is_finite() {
            return Err(Error::SolverFailure(format!("degenerate pivot element {p}")));
        }
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
        self.iterations += 1;
        if self.t[row].iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverFailure("non-finite tableau entry".into()));
        }
        Ok(())
    }

    /// Bland's rule: lowest-index improving column, then lowest-index basic
    /// variable among minimum-ratio rows.
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<Step> {
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::SolverFailure("iteration limit reached".into()));
            }
            let Some(col) = (0..self.cols).find(|&j| allowed(j) && self.cost[j] < -FEASIBILITY_TOL * 1e-2)
            else {
                return Ok(Step::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-14
                                || (ratio <= best + 1e-14 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(Step::Unbounded),
                Some((row, _)) => self.pivot(row, col)?,
            }
        }
    }
}

pub fn simplex_solve(problem: &LpProblem) -> Result<SimplexSolution> {
    let n = problem.num_vars();
    let m = problem.constraints.len();
    for (i, c) in problem.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(Error::invalid(format!(
                "constraint {i} has {} coefficients, expected {n}",
                c.coeffs.len()
            )));
        }
        if c.coeffs.iter().any(|v| !v.is_finite()) || !c.rhs.is_finite() {
            return Err(Error::invalid(format!("constraint {i} has non-finite entries")));
        }
    }
    if problem.objective.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("objective has non-finite entries"));
    }

    // Normalize to non-negative right-hand sides.
    let mut signs = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    for c in &problem.constraints {
        if c.rhs < 0.0 {
            let rel = match c.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            signs.push(-1.0);
            rows.push((c.coeffs.iter().map(|v| -v).collect::<Vec<_>>(), rel, -c.rhs));
        } else {
            signs.push(1.0);
            rows.push((c.coeffs.clone(), c.relation, c.rhs));
        }
    }

    // Column layout: originals, one slack/surplus per inequality, one
    // artificial per ≥ or = row. `unit_col[i]` started as e_i.
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + n_slack + n_art;
    let art_start = n + n_slack;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let mut unit_col = vec![0; m];
    let (mut s, mut a) = (n, art_start);
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(coeffs);
        t[i][cols] = *rhs;
        match rel {
            Relation::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                unit_col[i] = s;
                s += 1;
            }
            Relation::Ge => {
                t[i][s] = -1.0;
                t[i][a] = 1.0;
                basis[i] = a;
                unit_col[i] = a;
                s += 1;
                a += 1;
            }
            Relation::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                unit_col[i] = a;
                a += 1;
            }
        }
    }
    let mut tab = Tableau {
        t,
        cost: Vec::new(),
        basis,
        cols,
        iterations: 0,
    };

    if n_art > 0 {
        let phase1: Vec<f64> = (0..cols).map(|j| if j >= art_start { 1.0 } else { 0.0 }).collect();
        tab.set_costs(&phase1);
        tab.run(&|_| true)?;
        let infeasibility = -tab.cost[cols];
        if infeasibility > FEASIBILITY_TOL {
            return Ok(SimplexSolution::without_solution(
                LpStatus::Infeasible,
                n,
                m,
                tab.iterations,
            ));
        }
        // Drive zero-level artificials out of the basis where possible; rows
        // where that fails are redundant and keep their artificial at zero.
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| tab.t[i][j].abs() > 1e-9) {
                    tab.pivot(i, j)?;
                }
            }
        }
    }

    let mut costs = problem.objective.clone();
    costs.resize(cols, 0.0);
    tab.set_costs(&costs);
    if let Step::Unbounded = tab.run(&|j| j < art_start)? {
        return Ok(SimplexSolution::without_solution(
            LpStatus::Unbounded,
            n,
            m,
            tab.iterations,
        ));
    }

    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(i).max(0.0);
        }
    }
    // y'_i = c_u − r_u for the column that began as e_i; c_u = 0 for slacks
    // and artificials. Undo the row sign flip to get the input row's dual.
    let duals: Vec<f64> = (0..m).map(|i| -tab.cost[unit_col[i]] * signs[i]).collect();
    let dual_objective: f64 = duals
        .iter()
        .zip(&problem.constraints)
        .map(|(y, c)| y * c.rhs)
        .sum();
    let objective = problem.objective_at(&x);

    let violation = problem.max_violation(&x);
    if violation > FEASIBILITY_TOL {
        return Err(Error::SolverFailure(format!(
            "returned point violates constraints by {violation:e}"
        )));
    }
    let solution = SimplexSolution {
        status: LpStatus::Optimal,
        objective,
        x,
        duals,
        dual_objective,
        iterations: tab.iterations,
    };
    if solution.duality_gap() > DUALITY_TOL {
        return Err(Error::SolverFailure(format!(
            "duality gap {:e} exceeds tolerance",
            solution.duality_gap()
        )));
    }
    Ok(solution)
}
