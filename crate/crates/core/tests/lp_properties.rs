//! Properties of the one-sided dependence LP checked against independent
//! oracles: the CHSH lower bound `M ≥ B − 2` and the toy table, which attains
//! it.

use mdlab_core::chsh::{chsh_max, CorrelatorQuad, VARIANT_SIGNS};
use mdlab_core::lpopt::{enumerate_strategies, min_m_for_chsh, min_m_for_correlators, realized_correlators};
use mdlab_core::mdep::m_discrete;
use mdlab_core::{Label, Outcome, ToyModelParams};
use proptest::prelude::*;

/// The toy table written over the 16 deterministic strategies.
fn toy_in_strategy_space(t: &ToyModelParams) -> (Vec<f64>, Vec<f64>) {
    let strategies = enumerate_strategies();
    let index = |l: usize| {
        strategies
            .iter()
            .position(|s| {
                s.v_x == t.outcome(Label::X, l)
                    && s.v_xp == t.outcome(Label::XPrime, l)
                    && s.v_y == t.outcome(Label::Y, l)
                    && s.v_yp == t.outcome(Label::YPrime, l)
            })
            .unwrap()
    };
    let mut rho_x = vec![0.0; 16];
    let mut rho_xp = vec![0.0; 16];
    for l in 1..=2 {
        rho_x[index(l)] += t.mass(Label::X, l);
        rho_xp[index(l)] += t.mass(Label::XPrime, l);
    }
    (rho_x, rho_xp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chsh_target_optimum_is_b_minus_two(b in 2.0f64..=4.0) {
        let s = min_m_for_chsh(b).unwrap();
        let m_star = s.m_star.unwrap();
        prop_assert!((m_star - (b - 2.0)).abs() <= 1e-9);

        // Achievability: the toy table with p = (B − 2)/2 reaches B at M = B − 2.
        let t = ToyModelParams::new((b - 2.0) / 2.0, Outcome::Minus, Outcome::Plus).unwrap();
        let (rx, rxp) = toy_in_strategy_space(&t);
        let c = realized_correlators(&rx, &rxp);
        prop_assert!((c[0] + c[1] + c[2] - c[3] - b).abs() <= 1e-12);
        prop_assert!((m_discrete(&rx, &rxp).unwrap() - (b - 2.0)).abs() <= 1e-12);
    }

    #[test]
    fn correlator_optimum_matches_chsh_excess(c in prop::array::uniform4(-1.0f64..=1.0)) {
        let quad = CorrelatorQuad::from_array(c).unwrap();
        let s = min_m_for_correlators(&quad).unwrap();
        let m_star = s.m_star.unwrap();
        let (b, _) = chsh_max(&quad);
        prop_assert!((m_star - (b - 2.0).max(0.0)).abs() <= 1e-9, "m* {} vs B {}", m_star, b);
        let realized = realized_correlators(&s.rho_x, &s.rho_xp);
        for (r, want) in realized.iter().zip(c) {
            prop_assert!((r - want).abs() <= 1e-9);
        }
        prop_assert!(s.duality_gap.unwrap() <= 1e-8);
    }

    #[test]
    fn every_variant_lower_bound_holds(c in prop::array::uniform4(-1.0f64..=1.0)) {
        let quad = CorrelatorQuad::from_array(c).unwrap();
        let m_star = min_m_for_correlators(&quad).unwrap().m_star.unwrap();
        for signs in VARIANT_SIGNS {
            let v: f64 = signs.iter().zip(c).map(|(s, x)| s * x).sum();
            prop_assert!(m_star >= v.abs() - 2.0 - 1e-9);
        }
    }
}
