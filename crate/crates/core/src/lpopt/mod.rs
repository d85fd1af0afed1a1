//! Minimal one-sided measurement dependence needed to reach a CHSH value or
//! a full correlator quad with deterministic strategies.
//!
//! Hidden variables are the 16 deterministic strategies. Alice's two settings
//! induce distributions `ρ(·|X)` and `ρ(·|X')` over them; Bob's setting plays
//! no role in the distribution. The program minimizes
//! `Σ_s |ρ(s|X) − ρ(s|X')|`, linearized with one auxiliary `t_s ≥ ±(ρ(s|X) − ρ(s|X'))`
//! per strategy, subject to the target correlators. Correlators `⟨XY⟩, ⟨XY'⟩`
//! are taken under `ρ(·|X)` and `⟨X'Y⟩, ⟨X'Y'⟩` under `ρ(·|X')`.
//!
//! Variable layout: `ρ(·|X)` at `0..16`, `ρ(·|X')` at `16..32`, `t` at `32..48`.

mod simplex;

use serde::{Deserialize, Serialize};

pub use simplex::{
    simplex_solve, Constraint, LpProblem, LpStatus, Relation, SimplexSolution, FEASIBILITY_TOL,
};

use crate::chsh::{CorrelatorQuad, VARIANT_SIGNS};
use crate::error::{Error, Result};
use crate::models::Outcome;

pub const STRATEGY_COUNT: usize = 16;
const VARS: usize = 3 * STRATEGY_COUNT;

/// Deterministic assignment of outcomes to `X, X', Y, Y'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strategy {
    pub v_x: Outcome,
    pub v_xp: Outcome,
    pub v_y: Outcome,
    pub v_yp: Outcome,
}

impl Strategy {
    /// Strategy `k`: bits 3, 2, 1, 0 of `k` set to 1 mean `−1` for
    /// `X, X', Y, Y'` respectively. Index 0 is all `+1`.
    pub fn from_index(k: usize) -> Self {
        let bit = |b: usize| if k >> b & 1 == 1 { Outcome::Minus } else { Outcome::Plus };
        Self {
            v_x: bit(3),
            v_xp: bit(2),
            v_y: bit(1),
            v_yp: bit(0),
        }
    }

    /// Products `(XY, XY', X'Y, X'Y')`.
    pub fn products(&self) -> [f64; 4] {
        let v = |o: Outcome| f64::from(o.value());
        [
            v(self.v_x) * v(self.v_y),
            v(self.v_x) * v(self.v_yp),
            v(self.v_xp) * v(self.v_y),
            v(self.v_xp) * v(self.v_yp),
        ]
    }
}

pub fn enumerate_strategies() -> Vec<Strategy> {
    (0..STRATEGY_COUNT).map(Strategy::from_index).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LpTarget {
    Chsh { b: f64 },
    Correlators { quad: CorrelatorQuad },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub target: LpTarget,
    /// Minimal dependence; `None` unless optimal.
    pub m_star: Option<f64>,
    pub rho_x: Vec<f64>,
    pub rho_xp: Vec<f64>,
    /// Correlators realized by the returned distributions.
    pub correlators: Option<CorrelatorQuad>,
    pub duality_gap: Option<f64>,
    pub iterations: usize,
}

/// Correlators of the quad under the given pair of distributions.
pub fn realized_correlators(rho_x: &[f64], rho_xp: &[f64]) -> [f64; 4] {
    let mut c = [0.0; 4];
    for (k, s) in enumerate_strategies().iter().enumerate() {
        let p = s.products();
        c[0] += rho_x[k] * p[0];
        c[1] += rho_x[k] * p[1];
        c[2] += rho_xp[k] * p[2];
        c[3] += rho_xp[k] * p[3];
    }
    c
}

/// Row coefficients of correlator `which` (quad order) in the LP layout.
fn correlator_row(which: usize) -> Vec<f64> {
    let mut row = vec![0.0; VARS];
    let offset = if which < 2 { 0 } else { STRATEGY_COUNT };
    for (k, s) in enumerate_strategies().iter().enumerate() {
        row[offset + k] = s.products()[which];
    }
    row
}

fn base_problem(description: String) -> LpProblem {
    let mut objective = vec![0.0; VARS];
    objective[2 * STRATEGY_COUNT..].fill(1.0);
    let mut lp = LpProblem::new(objective, description);
    for s in 0..STRATEGY_COUNT {
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; VARS];
            row[2 * STRATEGY_COUNT + s] = 1.0;
            row[s] = -sign;
            row[STRATEGY_COUNT + s] = sign;
            lp.push(row, Relation::Ge, 0.0);
        }
    }
    for block in 0..2 {
        let mut row = vec![0.0; VARS];
        row[block * STRATEGY_COUNT..(block + 1) * STRATEGY_COUNT].fill(1.0);
        lp.push(row, Relation::Eq, 1.0);
    }
    lp
}

/// LP for reaching variant-0 CHSH value `target_b` (no outer absolute value;
/// `target_b ≥ 2` fixes the sign).
pub fn chsh_problem(target_b: f64) -> Result<LpProblem> {
    if !(2.0..=4.0).contains(&target_b) {
        return Err(Error::invalid(format!("target CHSH value {target_b} outside [2, 4]")));
    }
    let mut lp = base_problem(format!("min M subject to CHSH variant 0 = {target_b}"));
    let signs = VARIANT_SIGNS[0];
    let mut row = vec![0.0; VARS];
    for (which, sign) in signs.iter().enumerate() {
        for (r, c) in row.iter_mut().zip(correlator_row(which)) {
            *r += sign * c;
        }
    }
    lp.push(row, Relation::Eq, target_b);
    Ok(lp)
}

pub fn correlator_problem(quad: &CorrelatorQuad) -> Result<LpProblem> {
    let quad = CorrelatorQuad::from_array(quad.as_array())?;
    let mut lp = base_problem(format!("min M subject to correlators {:?}", quad.as_array()));
    for (which, value) in quad.as_array().iter().enumerate() {
        lp.push(correlator_row(which), Relation::Eq, *value);
    }
    Ok(lp)
}

fn finish(target: LpTarget, solution: SimplexSolution) -> LpSolution {
    if solution.status != LpStatus::Optimal {
        return LpSolution {
            status: solution.status,
            target,
            m_star: None,
            rho_x: Vec::new(),
            rho_xp: Vec::new(),
            correlators: None,
            duality_gap: None,
            iterations: solution.iterations,
        };
    }
    let rho_x = solution.x[..STRATEGY_COUNT].to_vec();
    let rho_xp = solution.x[STRATEGY_COUNT..2 * STRATEGY_COUNT].to_vec();
    let c = realized_correlators(&rho_x, &rho_xp).map(|v| v.clamp(-1.0, 1.0));
    LpSolution {
        status: solution.status,
        target,
        m_star: Some(solution.objective),
        correlators: CorrelatorQuad::from_array(c).ok(),
        rho_x,
        rho_xp,
        duality_gap: Some(solution.duality_gap()),
        iterations: solution.iterations,
    }
}

/// Minimal `M` for which some one-sided deterministic model reaches CHSH
/// value `target_b` on variant 0.
pub fn min_m_for_chsh(target_b: f64) -> Result<LpSolution> {
    let lp = chsh_problem(target_b)?;
    Ok(finish(LpTarget::Chsh { b: target_b }, simplex_solve(&lp)?))
}

/// Minimal `M` for which some one-sided deterministic model reproduces all
/// four correlators.
pub fn min_m_for_correlators(quad: &CorrelatorQuad) -> Result<LpSolution> {
    let lp = correlator_problem(quad)?;
    Ok(finish(LpTarget::Correlators { quad: *quad }, simplex_solve(&lp)?))
}
