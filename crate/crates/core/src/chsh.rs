//! CHSH expressions and the relaxed bound `B ≤ 2 + M`.
//!
//! A correlator quad holds `⟨XY⟩, ⟨XY'⟩, ⟨X'Y⟩, ⟨X'Y'⟩`. Variants are the eight
//! sign patterns with an odd number of minus signs, in this fixed order:
//!
//! | variant | signs          |
//! |---------|----------------|
//! | 0       | `+ + + -`      |
//! | 1       | `+ + - +`      |
//! | 2       | `+ - + +`      |
//! | 3       | `- + + +`      |
//! | 4..=7   | negations of 0..=3 |
//!
//! Variant `k + 4` has the same absolute value as variant `k`; both are kept so
//! that every sign pattern has an index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate_correlator, CorrelatorEstimate};
use crate::geometry::UnitVec3;
use crate::models::{Label, ModelDescriptor, Setting};
use crate::rng::RandomStream;

pub const VARIANT_COUNT: usize = 8;

pub const VARIANT_SIGNS: [[f64; 4]; VARIANT_COUNT] = [
    [1.0, 1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0, 1.0],
    [-1.0, -1.0, -1.0, 1.0],
    [-1.0, -1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0, -1.0],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorQuad {
    pub xy: f64,
    pub xyp: f64,
    pub xpy: f64,
    pub xpyp: f64,
}

impl CorrelatorQuad {
    pub fn new(xy: f64, xyp: f64, xpy: f64, xpyp: f64) -> Result<Self> {
        let quad = Self { xy, xyp, xpy, xpyp };
        for c in quad.as_array() {
            if !(-1.0..=1.0).contains(&c) {
                return Err(Error::invalid(format!("correlator {c} outside [-1, 1]")));
            }
        }
        Ok(quad)
    }

    pub fn from_array(c: [f64; 4]) -> Result<Self> {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.xy, self.xyp, self.xpy, self.xpyp]
    }
}

/// `|Σ sᵢ cᵢ|` for the variant's signs.
pub fn chsh_value(quad: &CorrelatorQuad, variant: usize) -> Result<f64> {
    let signs = VARIANT_SIGNS
        .get(variant)
        .ok_or_else(|| Error::invalid(format!("CHSH variant {variant} out of range 0..8")))?;
    Ok(signed_sum(signs, &quad.as_array()).abs())
}

fn signed_sum(signs: &[f64; 4], c: &[f64; 4]) -> f64 {
    signs[0] * c[0] + signs[1] * c[1] + signs[2] * c[2] + signs[3] * c[3]
}

pub fn chsh_values(quad: &CorrelatorQuad) -> [f64; VARIANT_COUNT] {
    let c = quad.as_array();
    VARIANT_SIGNS.map(|s| signed_sum(&s, &c).abs())
}

/// Largest variant value and the lowest index attaining it.
pub fn chsh_max(quad: &CorrelatorQuad) -> (f64, usize) {
    let values = chsh_values(quad);
    let mut best = 0;
    for (k, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = k;
        }
    }
    (values[best], best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub b: f64,
    pub m: f64,
    pub bound: f64,
    pub tol: f64,
    pub satisfied: bool,
}

/// Checks `B ≤ 2 + M + tol` for `M ∈ [0, 2]`.
pub fn bound_check(b: f64, m: f64, tol: f64) -> Result<BoundCheck> {
    if !(0.0..=2.0).contains(&m) {
        return Err(Error::invalid(format!("measurement dependence {m} outside [0, 2]")));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid(format!("tolerance {tol} must be non-negative")));
    }
    let bound = 2.0 + m;
    Ok(BoundCheck {
        b,
        m,
        bound,
        tol,
        satisfied: b <= bound + tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshReport {
    pub value_per_variant: [f64; VARIANT_COUNT],
    pub max_value: f64,
    pub argmax_variant: usize,
    pub bound: f64,
    pub satisfied: bool,
}

impl ChshReport {
    pub fn new(quad: &CorrelatorQuad, m: f64, tol: f64) -> Result<Self> {
        let (max_value, argmax_variant) = chsh_max(quad);
        let check = bound_check(max_value, m, tol)?;
        Ok(Self {
            value_per_variant: chsh_values(quad),
            max_value,
            argmax_variant,
            bound: check.bound,
            satisfied: check.satisfied,
        })
    }
}

/// Settings `(X, X', Y, Y')` at which singlet correlators `-X·Y` reach
/// `2√2` on variant 0.
pub fn quantum_optimal_settings() -> [UnitVec3; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        UnitVec3::X,
        UnitVec3::Y,
        UnitVec3::from_normalized(-h, -h, 0.0),
        UnitVec3::from_normalized(-h, h, 0.0),
    ]
}

/// Default `(X, X', Y, Y')` for a model: the optimal directions for
/// continuous models and the table labels for the toy model.
pub fn canonical_settings(model: &ModelDescriptor) -> [Setting; 4] {
    if model.kind().is_continuous() {
        quantum_optimal_settings().map(Setting::Direction)
    } else {
        [Label::X, Label::XPrime, Label::Y, Label::YPrime].map(Setting::Label)
    }
}

/// The four analytic correlators at `(X, X', Y, Y')`.
pub fn analytic_quad(model: &ModelDescriptor, settings: &[Setting; 4]) -> Result<CorrelatorQuad> {
    let [x, xp, y, yp] = settings;
    CorrelatorQuad::new(
        model.analytic_correlator(x, y)?,
        model.analytic_correlator(x, yp)?,
        model.analytic_correlator(xp, y)?,
        model.analytic_correlator(xp, yp)?,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadEstimate {
    pub quad: CorrelatorQuad,
    /// Estimates in quad order `XY, XY', X'Y, X'Y'`.
    pub estimates: [CorrelatorEstimate; 4],
}

impl QuadEstimate {
    /// Standard error of any variant's signed sum, treating the four
    /// estimates as independent.
    pub fn combined_std_error(&self) -> f64 {
        self.estimates
            .iter()
            .map(|e| e.std_error * e.std_error)
            .sum::<f64>()
            .sqrt()
    }
}

/// Monte-Carlo estimate of the four correlators; entry `k` is drawn on
/// `stream.subcontext(k)`.
pub fn estimate_quad(
    model: &ModelDescriptor,
    settings: &[Setting; 4],
    shots: u64,
    stream: &RandomStream,
) -> Result<QuadEstimate> {
    let [x, xp, y, yp] = settings;
    let pairs = [(x, y), (x, yp), (xp, y), (xp, yp)];
    let mut estimates = Vec::with_capacity(4);
    for (k, (a, b)) in pairs.iter().enumerate() {
        estimates.push(estimate_correlator(model, a, b, shots, &stream.subcontext(k as u64))?);
    }
    let estimates: [CorrelatorEstimate; 4] = estimates.try_into().expect("four estimates");
    Ok(QuadEstimate {
        quad: CorrelatorQuad::from_array(estimates.map(|e| e.mean))?,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Outcome;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn quad(c: [f64; 4]) -> CorrelatorQuad {
        CorrelatorQuad::from_array(c).unwrap()
    }

    #[test]
    fn variants_have_odd_minus_count_and_are_distinct() {
        for (i, s) in VARIANT_SIGNS.iter().enumerate() {
            assert_eq!(s.iter().filter(|x| **x < 0.0).count() % 2, 1);
            for t in &VARIANT_SIGNS[i + 1..] {
                assert_ne!(s, t);
            }
        }
    }

    #[test]
    fn chsh_value_examples() {
        assert_eq!(chsh_value(&quad([1.0, 1.0, 1.0, -1.0]), 0).unwrap(), 4.0);
        for v in 0..8 {
            assert_eq!(chsh_value(&quad([0.0; 4]), v).unwrap(), 0.0);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let got = chsh_value(&quad([h, h, h, -h]), 0).unwrap();
        assert!((got - 2.0 * SQRT_2).abs() < 1e-15);
        assert!(matches!(chsh_value(&quad([0.0; 4]), 8), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn chsh_max_examples() {
        // (1, 1, 1, 1 - 2p) at p = 0.5 gives B = 2 + 2p = 3 on variant 0.
        assert_eq!(chsh_max(&quad([1.0, 1.0, 1.0, 0.0])), (3.0, 0));
        assert_eq!(chsh_max(&quad([1.0, 1.0, 1.0, 1.0])).0, 2.0);
        assert_eq!(chsh_max(&quad([-1.0, -1.0, -1.0, 1.0])), (4.0, 0));
        // all-zero quad ties everywhere; lowest index wins
        assert_eq!(chsh_max(&quad([0.0; 4])), (0.0, 0));
    }

    #[test]
    fn quad_rejects_out_of_range() {
        assert!(CorrelatorQuad::new(1.1, 0.0, 0.0, 0.0).is_err());
        assert!(CorrelatorQuad::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn bound_check_examples() {
        assert!(bound_check(2.5, 0.5, 0.0).unwrap().satisfied);
        assert!(!bound_check(2.9, 0.5, 0.0).unwrap().satisfied);
        let r = bound_check(2.0 * SQRT_2, 2.0 * SQRT_2 - 2.0, 1e-9).unwrap();
        assert!(r.satisfied);
        assert!(bound_check(2.0, 2.5, 0.0).is_err());
        assert!(bound_check(2.0, -0.1, 0.0).is_err());
        assert!(bound_check(2.0, 0.5, -1.0).is_err());
    }

    #[test]
    fn optimal_settings_reach_tsirelson() {
        let q = analytic_quad(
            &ModelDescriptor::SingletOnesided,
            &canonical_settings(&ModelDescriptor::SingletOnesided),
        )
        .unwrap();
        assert!((chsh_value(&q, 0).unwrap() - 2.0 * SQRT_2).abs() <= 1e-12);
        for v in quantum_optimal_settings() {
            assert!((v.norm() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn aligned_settings_give_local_value() {
        let [x, xp, _, _] = quantum_optimal_settings();
        let settings = [x, xp, x, xp].map(Setting::Direction);
        let q = analytic_quad(&ModelDescriptor::SingletOnesided, &settings).unwrap();
        assert_eq!(q.as_array(), [-1.0, 0.0, 0.0, -1.0]);
        assert_eq!(chsh_max(&q).0, 2.0);
    }

    #[test]
    fn toy_table_saturates_relaxed_bound() {
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            for (a, b) in [(Outcome::Plus, Outcome::Minus), (Outcome::Minus, Outcome::Minus)] {
                let m = ModelDescriptor::toy(p, a, b).unwrap();
                let q = analytic_quad(&m, &canonical_settings(&m)).unwrap();
                assert_eq!(chsh_value(&q, 0).unwrap(), 2.0 + 2.0 * p);
                let check = bound_check(2.0 + 2.0 * p, 2.0 * p, 0.0).unwrap();
                assert!(check.satisfied);
                assert_eq!(check.b, check.bound);
            }
        }
    }

    #[test]
    fn uniform_baseline_respects_chsh() {
        let mut s = RandomStream::new(12, 0, 0);
        for _ in 0..500 {
            let settings = [(); 4].map(|_| Setting::Direction(crate::sampling::sample_uniform_sphere(&mut s)));
            let q = analytic_quad(&ModelDescriptor::UniformBaseline, &settings).unwrap();
            assert!(chsh_max(&q).0 <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn report_combines_value_and_bound() {
        let r = ChshReport::new(&quad([1.0, 1.0, 1.0, -1.0]), 2.0, 0.0).unwrap();
        assert_eq!(r.max_value, 4.0);
        assert_eq!(r.bound, 4.0);
        assert!(r.satisfied);
        let r = ChshReport::new(&quad([1.0, 1.0, 1.0, -1.0]), 1.0, 0.0).unwrap();
        assert!(!r.satisfied);
    }

    fn arb_quad() -> impl Strategy<Value = [f64; 4]> {
        prop::array::uniform4(-1.0f64..=1.0)
    }

    proptest! {
        #[test]
        fn max_invariant_under_relabeling(c in arb_quad(), party in 0usize..4) {
            // Flip outcomes of X, X', Y or Y' in turn: affects two correlators each.
            let flips: [[f64; 4]; 4] = [
                [-1.0, -1.0, 1.0, 1.0],
                [1.0, 1.0, -1.0, -1.0],
                [-1.0, 1.0, -1.0, 1.0],
                [1.0, -1.0, 1.0, -1.0],
            ];
            let f = flips[party];
            let flipped = [c[0] * f[0], c[1] * f[1], c[2] * f[2], c[3] * f[3]];
            let a = chsh_max(&quad(c)).0;
            let b = chsh_max(&quad(flipped)).0;
            prop_assert!((a - b).abs() <= 1e-15);
        }

        #[test]
        fn max_bounded_by_four(c in arb_quad()) {
            let (v, k) = chsh_max(&quad(c));
            prop_assert!((0.0..=4.0).contains(&v));
            prop_assert!(k < VARIANT_COUNT);
        }
    }
}
