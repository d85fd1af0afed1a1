//! Measurement-dependence metrics.
//!
//! `M` is the largest variational distance `∫|ρ(λ|X) − ρ(λ|X')| dλ` between
//! λ distributions under two of Alice's settings, so `0 ≤ M ≤ 2`. The
//! free-will fraction is `F = 1 − M/2`.
//!
//! Percent conventions in reports: "dependence percent" is `100·M/2` and
//! "independence percent" is `100·F`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Label, ModelDescriptor, Setting};
use crate::quadrature::GaussLegendre;

const NORMALIZATION_TOL: f64 = 1e-9;
const PANEL_NODES: usize = 32;

/// `Σ_λ |ρ(λ|X) − ρ(λ|X')|` for two distributions on the same labels.
pub fn m_discrete(rho_x: &[f64], rho_xp: &[f64]) -> Result<f64> {
    if rho_x.len() != rho_xp.len() {
        return Err(Error::invalid(format!(
            "distributions have different lengths ({} vs {})",
            rho_x.len(),
            rho_xp.len()
        )));
    }
    for rho in [rho_x, rho_xp] {
        if rho.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::invalid("probabilities must be non-negative"));
        }
        let total: f64 = rho.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!("distribution sums to {total}, not 1")));
        }
    }
    Ok(rho_x.iter().zip(rho_xp).map(|(a, b)| (a - b).abs()).sum())
}

/// Variational distance between the densities `|X·λ|/2π` and `|X'·λ|/2π`
/// for settings separated by angle `beta`:
/// `(1/4) ∫₀^{2π} ||cos φ| − |cos(φ − β)|| dφ`.
///
/// The integrand is smooth between the zeros of each cosine and the points
/// where the two magnitudes cross (`φ = β/2 + kπ/2`); each such panel gets a
/// 32-node Gauss–Legendre rule.
pub fn m_sphere_pair(beta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&beta) {
        return Err(Error::invalid(format!("angle {beta} outside [0, π]")));
    }
    let rule = GaussLegendre::new(PANEL_NODES);
    Ok(sphere_pair_with(&rule, beta))
}

fn sphere_pair_with(rule: &GaussLegendre, beta: f64) -> f64 {
    let tau = 2.0 * PI;
    let mut breaks = vec![
        0.5 * PI,
        1.5 * PI,
        (beta + 0.5 * PI).rem_euclid(tau),
        (beta + 1.5 * PI).rem_euclid(tau),
    ];
    breaks.extend((0..4).map(|k| (0.5 * beta + 0.5 * PI * k as f64).rem_euclid(tau)));
    let integrand = |phi: f64| (phi.cos().abs() - (phi - beta).cos().abs()).abs();
    0.25 * rule.integrate_panels(integrand, 0.0, tau, &breaks)
}

/// Where the supremum of `M` is attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArgmaxPair {
    /// Angle between `X` and `X'` for sphere models.
    Angle { beta: f64 },
    /// Context pair for discrete models.
    Contexts { first: Label, second: Label },
    /// Every pair attains the same value (no dependence).
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MDepReport {
    pub m: f64,
    pub f: f64,
    pub argmax_pair: ArgmaxPair,
    pub method: Method,
    /// `100·M/2`.
    pub dependence_percent: f64,
    /// `100·F`.
    pub independence_percent: f64,
}

impl MDepReport {
    fn new(m: f64, argmax_pair: ArgmaxPair, method: Method) -> Result<Self> {
        let f = free_will(m)?;
        Ok(Self {
            m,
            f,
            argmax_pair,
            method,
            dependence_percent: 50.0 * m,
            independence_percent: 100.0 * f,
        })
    }
}

/// `F = 1 − M/2` for `M ∈ [0, 2]`.
pub fn free_will(m: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&m) {
        return Err(Error::invalid(format!("measurement dependence {m} outside [0, 2]")));
    }
    Ok(1.0 - m / 2.0)
}

const GRID_STEPS: usize = 180;
const GOLDEN_TOL: f64 = 1e-10;

/// Supremum of `M` over Alice's setting pairs.
pub fn m_supremum(model: &ModelDescriptor) -> Result<MDepReport> {
    match model {
        ModelDescriptor::SingletOnesided => {
            let (beta, m) = maximize_sphere_pair()?;
            MDepReport::new(m.min(2.0), ArgmaxPair::Angle { beta }, Method::Quadrature)
        }
        ModelDescriptor::ToyTable(params) => {
            MDepReport::new(
                params.dependence(Label::X, Label::XPrime),
                ArgmaxPair::Contexts {
                    first: Label::X,
                    second: Label::XPrime,
                },
                Method::Exact,
            )
        }
        ModelDescriptor::UniformBaseline => MDepReport::new(0.0, ArgmaxPair::Any, Method::Exact),
    }
}

/// Coarse 1° grid over `[0, π]`, then golden-section refinement around the
/// best grid point.
fn maximize_sphere_pair() -> Result<(f64, f64)> {
    let rule = GaussLegendre::new(PANEL_NODES);
    let f = |beta: f64| sphere_pair_with(&rule, beta);
    let step = PI / GRID_STEPS as f64;
    let grid: Vec<f64> = (0..=GRID_STEPS).map(|i| f(i as f64 * step)).collect();

    // Single-peak check: the grid must rise to one maximum and then fall.
    let peaks = (1..GRID_STEPS)
        .filter(|&i| grid[i] > grid[i - 1] + 1e-12 && grid[i] > grid[i + 1] + 1e-12)
        .count();
    let best = (0..=GRID_STEPS)
        .reduce(|a, b| if grid[b] > grid[a] { b } else { a })
        .expect("non-empty grid");
    if peaks > 1 {
        return Err(Error::SolverFailure(format!(
            "sphere-pair distance has {peaks} local maxima on the grid"
        )));
    }

    let mut lo = best.saturating_sub(1) as f64 * step;
    let mut hi = ((best + 1).min(GRID_STEPS)) as f64 * step;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > GOLDEN_TOL {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let beta = 0.5 * (lo + hi);
    let mut m = f(beta);
    let mut arg = beta;
    if grid[best] > m {
        m = grid[best];
        arg = best as f64 * step;
    }
    Ok((arg, m))
}

/// Pairwise `M` between two of Alice's settings under `model`.
pub fn m_between(model: &ModelDescriptor, x: &Setting, xp: &Setting) -> Result<f64> {
    match (model, x, xp) {
        (ModelDescriptor::SingletOnesided, Setting::Direction(u), Setting::Direction(v)) => {
            m_sphere_pair(u.angle_to(v).clamp(0.0, PI))
        }
        (ModelDescriptor::UniformBaseline, Setting::Direction(_), Setting::Direction(_)) => Ok(0.0),
        (ModelDescriptor::ToyTable(params), Setting::Label(a), Setting::Label(b))
            if a.is_alice() && b.is_alice() =>
        {
            Ok(params.dependence(*a, *b))
        }
        _ => Err(Error::invalid(format!(
            "settings {x:?}, {xp:?} do not match model {}",
            model.kind()
        ))),
    }
}

/// True when every pair of the given Alice settings has `M ≤ tol`.
pub fn independence_check(model: &ModelDescriptor, settings: &[Setting], tol: f64) -> Result<bool> {
    if settings.len() < 2 {
        return Err(Error::invalid("independence check needs at least two settings"));
    }
    for (i, x) in settings.iter().enumerate() {
        for xp in &settings[i + 1..] {
            if m_between(model, x, xp)? > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Relative entropy in bits between a density `g` of `c = X·λ` on `[-1, 1]`
/// and the uniform density `1/2`: `∫ g log₂(2g) dc`, with `0·log 0 = 0`.
///
/// Panels are graded geometrically toward `c = 0` where densities such as
/// `|c|` make `g log g` non-smooth.
pub fn kl_bits_against_uniform(g: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(PANEL_NODES);
    let integrand = |c: f64| {
        let v = g(c);
        if v > 0.0 {
            v * (2.0 * v).ln() / LN_2
        } else {
            0.0
        }
    };
    let mut total = 0.0;
    let mut hi = 1.0f64;
    for _ in 0..60 {
        let lo = 0.5 * hi;
        total += rule.integrate(integrand, lo, hi) + rule.integrate(integrand, -hi, -lo);
        hi = lo;
    }
    total + rule.integrate(integrand, -hi, hi)
}

/// Mutual information `I(x:λ)` in bits for λ distributed as `|X·λ|/2π` with
/// the setting direction uniform on the sphere.
///
/// The λ marginal is then uniform (`1/4π`), and the divergence of each
/// conditional from it reduces to `∫_{-1}^{1} |c| log₂(2|c|) dc`.
pub fn mutual_information_onesided() -> f64 {
    kl_bits_against_uniform(f64::abs)
}
