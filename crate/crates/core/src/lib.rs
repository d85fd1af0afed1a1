//! Simulation and analysis of hidden-variable models whose λ distribution
//! depends on one party's measurement setting.
//!
//! The crate covers sphere sampling with reproducible counter-based streams,
//! three concrete models, Monte-Carlo correlator estimation, CHSH values and
//! the relaxed bound `B ≤ 2 + M`, measurement-dependence metrics, and a small
//! simplex solver certifying that the bound is tight.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chsh;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod lpopt;
pub mod mdep;
pub mod models;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod sampling;

pub use error::{Error, Result};
pub use geometry::{dot, orthonormal_frame, unit, Frame, UnitVec3};
pub use models::{HiddenVar, Label, ModelDescriptor, ModelKind, Outcome, Setting, ToyModelParams};
pub use rng::RandomStream;
