//! Monte-Carlo estimation of correlators and joint outcome distributions.
//!
//! Shots are grouped in fixed chunks of [`CHUNK_SHOTS`]. Chunk `i` draws from
//! the caller's stream context starting at counter block
//! `stream.counter() + i * CHUNK_SHOTS`, so results depend only on the stream
//! address and shot count, never on how chunks are scheduled across threads.
//! Per-chunk results are integer outcome counts, merged in chunk order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelDescriptor, Outcome, Setting};
use crate::rng::RandomStream;

pub const CHUNK_SHOTS: u64 = 1 << 16;

/// Counts of the four outcome pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
}

impl OutcomeCounts {
    pub fn total(&self) -> u64 {
        self.pp + self.pm + self.mp + self.mm
    }

    pub fn record(&mut self, a: Outcome, b: Outcome) {
        match (a, b) {
            (Outcome::Plus, Outcome::Plus) => self.pp += 1,
            (Outcome::Plus, Outcome::Minus) => self.pm += 1,
            (Outcome::Minus, Outcome::Plus) => self.mp += 1,
            (Outcome::Minus, Outcome::Minus) => self.mm += 1,
        }
    }

    pub fn merge(self, other: OutcomeCounts) -> OutcomeCounts {
        OutcomeCounts {
            pp: self.pp + other.pp,
            pm: self.pm + other.pm,
            mp: self.mp + other.mp,
            mm: self.mm + other.mm,
        }
    }

    pub fn joint(&self) -> JointDistribution {
        let n = self.total() as f64;
        JointDistribution {
            p_pp: self.pp as f64 / n,
            p_pm: self.pm as f64 / n,
            p_mp: self.mp as f64 / n,
            p_mm: self.mm as f64 / n,
            shots: self.total(),
        }
    }

    pub fn correlator(&self) -> CorrelatorEstimate {
        let joint = self.joint();
        let mean = joint.correlator();
        let n = self.total();
        // Bessel-corrected variance of ±1 samples is n(1 - mean²)/(n - 1).
        let std_error = if n > 1 {
            ((1.0 - mean * mean).max(0.0) / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        CorrelatorEstimate {
            mean,
            std_error,
            shots: n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub shots: u64,
}

/// Empirical `p(a, b)`; fields are ordered `(+,+), (+,−), (−,+), (−,−)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
    pub shots: u64,
}

impl JointDistribution {
    /// `((a, b), p(a, b))` in canonical order.
    pub fn entries(&self) -> [((i8, i8), f64); 4] {
        [
            ((1, 1), self.p_pp),
            ((1, -1), self.p_pm),
            ((-1, 1), self.p_mp),
            ((-1, -1), self.p_mm),
        ]
    }

    pub fn correlator(&self) -> f64 {
        self.p_pp - self.p_pm - self.p_mp + self.p_mm
    }

    pub fn alice_plus(&self) -> f64 {
        self.p_pp + self.p_pm
    }

    pub fn bob_plus(&self) -> f64 {
        self.p_pp + self.p_mp
    }
}

fn check_settings(model: &ModelDescriptor, alice: &Setting, bob: &Setting) -> Result<()> {
    // analytic_correlator validates both settings against the model kind.
    model.analytic_correlator(alice, bob).map(|_| ())
}

/// Runs chunk `index` of an estimate with `shots` total shots.
pub fn simulate_chunk(
    model: &ModelDescriptor,
    alice: &Setting,
    bob: &Setting,
    shots: u64,
    stream: &RandomStream,
    index: u64,
) -> Result<OutcomeCounts> {
    let start = index * CHUNK_SHOTS;
    let len = shots.saturating_sub(start).min(CHUNK_SHOTS);
    let mut rng = stream.at_offset(start);
    let mut counts = OutcomeCounts::default();
    for _ in 0..len {
        let lambda = model.sample_lambda(alice, &mut rng)?;
        let a = model.outcome_alice(alice, &lambda)?;
        let b = model.outcome_bob(bob, &lambda)?;
        counts.record(a, b);
    }
    Ok(counts)
}

pub fn chunk_count(shots: u64) -> u64 {
    shots.div_ceil(CHUNK_SHOTS)
}

/// Outcome counts over all chunks, evaluated in parallel on the current
/// rayon pool.
pub fn simulate_counts(
    model: &ModelDescriptor,
    alice: &Setting,
    bob: &Setting,
    shots: u64,
    stream: &RandomStream,
) -> Result<OutcomeCounts> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    check_settings(model, alice, bob)?;
    let per_chunk: Vec<OutcomeCounts> = (0..chunk_count(shots))
        .into_par_iter()
        .map(|i| simulate_chunk(model, alice, bob, shots, stream, i))
        .collect::<Result<_>>()?;
    Ok(per_chunk
        .into_iter()
        .fold(OutcomeCounts::default(), OutcomeCounts::merge))
}

pub fn estimate_correlator(
    model: &ModelDescriptor,
    alice: &Setting,
    bob: &Setting,
    shots: u64,
    stream: &RandomStream,
) -> Result<CorrelatorEstimate> {
    simulate_counts(model, alice, bob, shots, stream).map(|c| c.correlator())
}

pub fn estimate_joint(
    model: &ModelDescriptor,
    alice: &Setting,
    bob: &Setting,
    shots: u64,
    stream: &RandomStream,
) -> Result<JointDistribution> {
    simulate_counts(model, alice, bob, shots, stream).map(|c| c.joint())
}

/// How one party's `P(+1)` for a fixed local setting varies across the
/// remote party's settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalVariation {
    pub local_index: usize,
    /// `P(+1)` for each remote setting, in input order.
    pub p_plus: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// `max - min` of `p_plus`.
    pub variation: f64,
    /// Combined standard error of the two extreme entries.
    pub variation_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    /// `P(a=+1 | X_i)` across Bob's settings, one entry per Alice setting.
    pub alice: Vec<MarginalVariation>,
    /// `P(b=+1 | Y_j)` across Alice's settings, one entry per Bob setting.
    pub bob: Vec<MarginalVariation>,
    pub max_alice_variation: f64,
    pub max_bob_variation: f64,
    pub shots: u64,
}

fn variation(local_index: usize, p_plus: Vec<f64>, shots: u64) -> MarginalVariation {
    let se = |p: f64| (p * (1.0 - p) / shots as f64).sqrt();
    let std_errors: Vec<f64> = p_plus.iter().map(|&p| se(p)).collect();
    let (mut lo, mut hi) = (0, 0);
    for (i, &p) in p_plus.iter().enumerate() {
        if p < p_plus[lo] {
            lo = i;
        }
        if p > p_plus[hi] {
            hi = i;
        }
    }
    MarginalVariation {
        local_index,
        variation: p_plus[hi] - p_plus[lo],
        variation_std_error: std_errors[hi].hypot(std_errors[lo]),
        p_plus,
        std_errors,
    }
}

/// Estimates every `(X_i, Y_j)` joint distribution (pair `k = i·|Y| + j` on
/// `stream.subcontext(k)`) and reports how each local marginal moves with the
/// remote setting.
pub fn marginal_scan(
    model: &ModelDescriptor,
    alice_settings: &[Setting],
    bob_settings: &[Setting],
    shots: u64,
    stream: &RandomStream,
) -> Result<MarginalReport> {
    if alice_settings.is_empty() || bob_settings.is_empty() {
        return Err(Error::invalid("marginal scan needs at least one setting per party"));
    }
    let nb = bob_settings.len();
    let mut joints = Vec::with_capacity(alice_settings.len() * nb);
    for (i, x) in alice_settings.iter().enumerate() {
        for (j, y) in bob_settings.iter().enumerate() {
            let sub = stream.subcontext((i * nb + j) as u64);
            joints.push(estimate_joint(model, x, y, shots, &sub)?);
        }
    }
    Ok(marginal_report(&joints, alice_settings.len(), nb, shots))
}

/// Builds the marginal report from row-major joint distributions
/// (`joints[i·nb + j]` for Alice setting `i`, Bob setting `j`).
pub fn marginal_report(joints: &[JointDistribution], na: usize, nb: usize, shots: u64) -> MarginalReport {
    assert_eq!(joints.len(), na * nb, "joint grid must be na × nb");
    let alice: Vec<_> = (0..na)
        .map(|i| variation(i, (0..nb).map(|j| joints[i * nb + j].alice_plus()).collect(), shots))
        .collect();
    let bob: Vec<_> = (0..nb)
        .map(|j| {
            let ps = (0..na)
                .map(|i| joints[i * nb + j].bob_plus())
                .collect();
            variation(j, ps, shots)
        })
        .collect();
    let max_of = |v: &[MarginalVariation]| v.iter().map(|m| m.variation).fold(0.0, f64::max);
    MarginalReport {
        max_alice_variation: max_of(&alice),
        max_bob_variation: max_of(&bob),
        alice,
        bob,
        shots,
    }
}
