//! Hidden-variable models.
//!
//! Every model is deterministic given λ: the outcome of each party is a fixed
//! function of that party's own setting and λ. Only the distribution of λ may
//! depend on a setting, and for the models here only on Alice's.
//!
//! * `singlet-onesided`: λ has density `|X·λ|/2π`; `a = -sgn(X·λ)`, `b = sgn(Y·λ)`.
//!   Reproduces the singlet correlator `-X·Y`.
//! * `toy-table`: two labels λ₁, λ₂ with a table of outcomes and a single
//!   dependence parameter `p`. Reaches CHSH value `2 + 2p`.
//! * `uniform-baseline`: λ uniform, `a = sgn(X·λ)`, `b = -sgn(Y·λ)`.
//!   Measurement independent; correlator `-1 + 2θ/π`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UnitVec3;
use crate::rng::RandomStream;
use crate::sampling::{sample_cosine_weighted, sample_uniform_sphere, sgn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_sign(x: f64) -> Self {
        if sgn(x) > 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl std::ops::Neg for Outcome {
    type Output = Outcome;
    fn neg(self) -> Outcome {
        self.flip()
    }
}

impl TryFrom<i8> for Outcome {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::invalid(format!("outcome must be +1 or -1, got {other}"))),
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.value()
    }
}

/// Abstract setting labels used by discrete models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "X")]
    X,
    #[serde(rename = "X'")]
    XPrime,
    #[serde(rename = "Y")]
    Y,
    #[serde(rename = "Y'")]
    YPrime,
}

impl Label {
    pub fn is_alice(self) -> bool {
        matches!(self, Label::X | Label::XPrime)
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::X => "X",
            Label::XPrime => "X'",
            Label::Y => "Y",
            Label::YPrime => "Y'",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Label::X),
            "X'" | "Xp" | "xp" | "x'" => Ok(Label::XPrime),
            "Y" | "y" => Ok(Label::Y),
            "Y'" | "Yp" | "yp" | "y'" => Ok(Label::YPrime),
            other => Err(Error::invalid(format!("unknown setting label `{other}`"))),
        }
    }
}

/// A measurement setting: a direction for continuous models, a label for
/// discrete ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Setting {
    Direction(UnitVec3),
    Label(Label),
}

impl From<UnitVec3> for Setting {
    fn from(v: UnitVec3) -> Self {
        Setting::Direction(v)
    }
}

impl From<Label> for Setting {
    fn from(l: Label) -> Self {
        Setting::Label(l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HiddenVar {
    Direction(UnitVec3),
    /// 1-based label.
    Label(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyModelParams {
    p: f64,
    a: Outcome,
    b: Outcome,
}

impl ToyModelParams {
    pub fn new(p: f64, a: Outcome, b: Outcome) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("toy-table p must lie in [0, 1], got {p}")));
        }
        Ok(Self { p, a, b })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn a(&self) -> Outcome {
        self.a
    }

    pub fn b(&self) -> Outcome {
        self.b
    }

    /// Outcome table: `[λ₁, λ₂]` rows, columns `X, X', Y, Y'`.
    pub fn outcome(&self, setting: Label, lambda: usize) -> Outcome {
        match (lambda, setting) {
            (1, Label::YPrime) => self.a,
            (1, _) => -self.a,
            _ => self.b,
        }
    }

    /// `ρ(λ | Alice context)` from the table.
    pub fn mass(&self, alice: Label, lambda: usize) -> f64 {
        match (alice, lambda) {
            (Label::X, 1) => 0.0,
            (Label::X, _) => 1.0,
            (_, 1) => self.p,
            _ => 1.0 - self.p,
        }
    }

    /// `Σ_λ |ρ(λ|first) − ρ(λ|second)|` for two Alice contexts. Switching
    /// context moves mass `p` from λ₂ to λ₁, so the sum is `2p` without the
    /// cancellation of evaluating `1 − (1 − p)`.
    pub fn dependence(&self, first: Label, second: Label) -> f64 {
        if first == second {
            0.0
        } else {
            2.0 * self.p
        }
    }

    /// `P(a = +1 | X_i)` computed from the table. Alice's marginal cannot
    /// depend on Bob's setting since λ depends only on her context.
    pub fn alice_plus_probability(&self, alice: Label) -> f64 {
        (1..=2)
            .filter(|&l| self.outcome(alice, l) == Outcome::Plus)
            .map(|l| self.mass(alice, l))
            .sum()
    }

    /// `P(b = +1 | Y_j)` under Alice context `alice`, computed from the table.
    pub fn bob_plus_probability(&self, alice: Label, bob: Label) -> f64 {
        (1..=2)
            .filter(|&l| self.outcome(bob, l) == Outcome::Plus)
            .map(|l| self.mass(alice, l))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SingletOnesided,
    ToyTable,
    UniformBaseline,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SingletOnesided => "singlet-onesided",
            ModelKind::ToyTable => "toy-table",
            ModelKind::UniformBaseline => "uniform-baseline",
        }
    }

    pub fn is_continuous(self) -> bool {
        !matches!(self, ModelKind::ToyTable)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singlet-onesided" => Ok(ModelKind::SingletOnesided),
            "toy-table" => Ok(ModelKind::ToyTable),
            "uniform-baseline" => Ok(ModelKind::UniformBaseline),
            other => Err(Error::invalid(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Which settings the λ distribution may depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaDependence {
    AliceOnly,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelDescriptor {
    SingletOnesided,
    ToyTable(ToyModelParams),
    UniformBaseline,
}

impl ModelDescriptor {
    pub fn toy(p: f64, a: Outcome, b: Outcome) -> Result<Self> {
        ToyModelParams::new(p, a, b).map(ModelDescriptor::ToyTable)
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelDescriptor::SingletOnesided => ModelKind::SingletOnesided,
            ModelDescriptor::ToyTable(_) => ModelKind::ToyTable,
            ModelDescriptor::UniformBaseline => ModelKind::UniformBaseline,
        }
    }

    pub fn dependence(&self) -> LambdaDependence {
        match self {
            ModelDescriptor::UniformBaseline => LambdaDependence::None,
            _ => LambdaDependence::AliceOnly,
        }
    }

    /// Number of hidden-variable labels for discrete models.
    pub fn lambda_count(&self) -> Option<usize> {
        match self {
            ModelDescriptor::ToyTable(_) => Some(2),
            _ => None,
        }
    }

    fn direction(&self, setting: &Setting) -> Result<UnitVec3> {
        match setting {
            Setting::Direction(v) => Ok(*v),
            Setting::Label(l) => Err(Error::invalid(format!(
                "{} expects a direction setting, got label {l}",
                self.kind()
            ))),
        }
    }

    fn label(&self, setting: &Setting, alice: bool) -> Result<Label> {
        match setting {
            Setting::Label(l) if l.is_alice() == alice => Ok(*l),
            other => Err(Error::invalid(format!(
                "{} expects {} label, got {other:?}",
                self.kind(),
                if alice { "an Alice (X/X')" } else { "a Bob (Y/Y')" }
            ))),
        }
    }

    fn hidden_direction(&self, lambda: &HiddenVar) -> Result<UnitVec3> {
        match lambda {
            HiddenVar::Direction(v) => Ok(*v),
            HiddenVar::Label(_) => Err(Error::invalid(format!(
                "{} expects a direction hidden variable",
                self.kind()
            ))),
        }
    }

    fn hidden_label(&self, lambda: &HiddenVar) -> Result<usize> {
        match lambda {
            HiddenVar::Label(i) if (1..=2).contains(i) => Ok(*i),
            other => Err(Error::invalid(format!(
                "{} expects label 1 or 2, got {other:?}",
                self.kind()
            ))),
        }
    }

    /// Draws λ conditioned on Alice's setting.
    pub fn sample_lambda(&self, alice: &Setting, stream: &mut RandomStream) -> Result<HiddenVar> {
        match self {
            ModelDescriptor::SingletOnesided => {
                let x = self.direction(alice)?;
                Ok(HiddenVar::Direction(sample_cosine_weighted(&x, stream)))
            }
            ModelDescriptor::UniformBaseline => {
                self.direction(alice)?;
                Ok(HiddenVar::Direction(sample_uniform_sphere(stream)))
            }
            ModelDescriptor::ToyTable(params) => {
                let ctx = self.label(alice, true)?;
                let u = stream.next_f64();
                Ok(HiddenVar::Label(if u < params.mass(ctx, 1) { 1 } else { 2 }))
            }
        }
    }

    pub fn outcome_alice(&self, setting: &Setting, lambda: &HiddenVar) -> Result<Outcome> {
        match self {
            ModelDescriptor::SingletOnesided => {
                let x = self.direction(setting)?;
                let l = self.hidden_direction(lambda)?;
                Ok(-Outcome::from_sign(x.dot(&l)))
            }
            ModelDescriptor::UniformBaseline => {
                let x = self.direction(setting)?;
                let l = self.hidden_direction(lambda)?;
                Ok(Outcome::from_sign(x.dot(&l)))
            }
            ModelDescriptor::ToyTable(params) => {
                let label = self.label(setting, true)?;
                Ok(params.outcome(label, self.hidden_label(lambda)?))
            }
        }
    }

    pub fn outcome_bob(&self, setting: &Setting, lambda: &HiddenVar) -> Result<Outcome> {
        match self {
            ModelDescriptor::SingletOnesided => {
                let y = self.direction(setting)?;
                let l = self.hidden_direction(lambda)?;
                Ok(Outcome::from_sign(y.dot(&l)))
            }
            ModelDescriptor::UniformBaseline => {
                let y = self.direction(setting)?;
                let l = self.hidden_direction(lambda)?;
                Ok(-Outcome::from_sign(y.dot(&l)))
            }
            ModelDescriptor::ToyTable(params) => {
                let label = self.label(setting, false)?;
                Ok(params.outcome(label, self.hidden_label(lambda)?))
            }
        }
    }

    /// Closed-form `⟨ab⟩` for the given setting pair.
    pub fn analytic_correlator(&self, alice: &Setting, bob: &Setting) -> Result<f64> {
        match self {
            ModelDescriptor::SingletOnesided => {
                Ok(-self.direction(alice)?.dot(&self.direction(bob)?))
            }
            ModelDescriptor::UniformBaseline => {
                let theta = self.direction(alice)?.angle_to(&self.direction(bob)?);
                Ok(-1.0 + 2.0 * theta / PI)
            }
            ModelDescriptor::ToyTable(params) => {
                let x = self.label(alice, true)?;
                let y = self.label(bob, false)?;
                Ok((1..=2)
                    .map(|l| {
                        let ab = params.outcome(x, l).value() * params.outcome(y, l).value();
                        params.mass(x, l) * f64::from(ab)
                    })
                    .sum())
            }
        }
    }

    /// `ρ(λ | Alice setting)`: a probability for discrete models, a density
    /// with respect to the sphere's area element for continuous ones.
    pub fn lambda_mass(&self, alice: &Setting, lambda: &HiddenVar) -> Result<f64> {
        match self {
            ModelDescriptor::SingletOnesided => {
                let x = self.direction(alice)?;
                Ok(x.dot(&self.hidden_direction(lambda)?).abs() / (2.0 * PI))
            }
            ModelDescriptor::UniformBaseline => {
                self.direction(alice)?;
                self.hidden_direction(lambda)?;
                Ok(1.0 / (4.0 * PI))
            }
            ModelDescriptor::ToyTable(params) => {
                let x = self.label(alice, true)?;
                Ok(params.mass(x, self.hidden_label(lambda)?))
            }
        }
    }
}
