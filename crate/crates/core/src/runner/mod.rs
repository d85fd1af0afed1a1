//! Command dispatch shared by the command-line tool and the Python module.
//!
//! Each command draws from its own stream context, so changing one command's
//! sampling never shifts another's numbers.

mod config;
mod report;

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::time::Instant;

use serde_json::{json, Value};

pub use config::{
    parse_settings, Command, NamedSetting, OutputFormat, RawConfig, RunConfig, SweepAxis,
    SweepRange, DEFAULT_SEED, DEFAULT_SHOTS,
};
pub use report::{format_f64, to_json_string, Report};

use crate::chsh::{analytic_quad, chsh_max, chsh_value, bound_check, estimate_quad, ChshReport};
use crate::error::{Error, Result};
use crate::estimator::{marginal_report, simulate_counts};
use crate::lpopt::{min_m_for_chsh, min_m_for_correlators, LpSolution, LpTarget};
use crate::mdep::{free_will, independence_check, m_between, m_supremum, mutual_information_onesided};
use crate::models::{Label, ModelDescriptor, Setting, ToyModelParams};
use crate::rng::RandomStream;

const CONTEXT_SIMULATE: u64 = 0x01;
const CONTEXT_CHSH: u64 = 0x02;
const CONTEXT_TABLE: u64 = 0x03;

/// Tolerance for checks on analytic (non-sampled) values.
const ANALYTIC_TOL: f64 = 1e-9;
/// Monte-Carlo checks pass within this many standard errors.
const SIGMAS: f64 = 5.0;

struct Payload {
    results: Value,
    std_errors: BTreeMap<String, f64>,
}

impl Payload {
    fn exact(results: Value) -> Self {
        Self {
            results,
            std_errors: BTreeMap::new(),
        }
    }
}

/// Runs one command. With `workers` set, Monte-Carlo chunks run on a
/// dedicated pool of that size; results never depend on it.
pub fn run(config: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let payload = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::SolverFailure(format!("building thread pool: {e}")))?
            .install(|| dispatch(config)),
        None => dispatch(config),
    }?;
    Ok(Report {
        command: config.command,
        config: config.clone(),
        results: payload.results,
        std_errors: payload.std_errors,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn dispatch(config: &RunConfig) -> Result<Payload> {
    match config.command {
        Command::Simulate => simulate(config),
        Command::Chsh => chsh(config),
        Command::Mdep => mdep(config),
        Command::Mutualinfo => Ok(mutualinfo()),
        Command::Optimize => optimize(config),
        Command::Table => table(config),
        Command::Sweep => sweep_rows(config),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

type Named = Vec<(String, Setting)>;

/// Alice's and Bob's settings. Continuous models take `X*` names for Alice
/// and `Y*` names for Bob; the toy table uses its fixed labels.
fn party_settings(config: &RunConfig) -> Result<(Named, Named)> {
    if !config.model.kind().is_continuous() {
        let named = |ls: [Label; 2]| ls.map(|l| (l.name().to_string(), Setting::Label(l))).to_vec();
        return Ok((named([Label::X, Label::XPrime]), named([Label::Y, Label::YPrime])));
    }
    let (mut alice, mut bob) = (Vec::new(), Vec::new());
    for s in &config.settings {
        let entry = (s.name.clone(), Setting::Direction(s.direction));
        match s.name.chars().next() {
            Some('X') => alice.push(entry),
            Some('Y') => bob.push(entry),
            _ => {
                return Err(Error::invalid(format!(
                    "setting `{}` must be named X… (Alice) or Y… (Bob)",
                    s.name
                )))
            }
        }
    }
    Ok((alice, bob))
}

/// `(X, X', Y, Y')` for CHSH-type commands.
fn quad_settings(config: &RunConfig) -> Result<[Setting; 4]> {
    if !config.model.kind().is_continuous() {
        return Ok([Label::X, Label::XPrime, Label::Y, Label::YPrime].map(Setting::Label));
    }
    let get = |name: &str| {
        config
            .setting(name)
            .map(Setting::Direction)
            .ok_or_else(|| Error::invalid(format!("command `{}` needs setting `{name}`", config.command)))
    };
    Ok([get("X")?, get("X'")?, get("Y")?, get("Y'")?])
}

fn settings_echo(settings: &[Setting; 4]) -> Value {
    let names = ["X", "X'", "Y", "Y'"];
    let mut map = serde_json::Map::new();
    for (n, s) in names.iter().zip(settings) {
        let v = match s {
            Setting::Direction(d) => to_value(&d.components()),
            Setting::Label(l) => Value::from(l.name()),
        };
        map.insert(n.to_string(), v);
    }
    Value::Object(map)
}

fn simulate(config: &RunConfig) -> Result<Payload> {
    let (alice, bob) = party_settings(config)?;
    if alice.is_empty() || bob.is_empty() {
        return Err(Error::invalid("simulate needs at least one X… and one Y… setting"));
    }
    let stream = RandomStream::new(config.seed, CONTEXT_SIMULATE, 0);
    let mut pairs = Vec::new();
    let mut joints = Vec::new();
    let mut std_errors = BTreeMap::new();
    for (i, (xn, x)) in alice.iter().enumerate() {
        for (j, (yn, y)) in bob.iter().enumerate() {
            let sub = stream.subcontext((i * bob.len() + j) as u64);
            let counts = simulate_counts(&config.model, x, y, config.shots, &sub)?;
            let estimate = counts.correlator();
            let joint = counts.joint();
            let analytic = config.model.analytic_correlator(x, y)?;
            std_errors.insert(format!("{xn}{yn}"), estimate.std_error);
            pairs.push(json!({
                "alice": xn,
                "bob": yn,
                "analytic": analytic,
                "estimate": estimate,
                "deviation": estimate.mean - analytic,
                "joint": joint,
            }));
            joints.push(joint);
        }
    }
    let marginals = marginal_report(&joints, alice.len(), bob.len(), config.shots);
    Ok(Payload {
        results: json!({ "pairs": pairs, "marginals": marginals }),
        std_errors,
    })
}

const QUAD_KEYS: [&str; 4] = ["XY", "XY'", "X'Y", "X'Y'"];

fn chsh(config: &RunConfig) -> Result<Payload> {
    let settings = quad_settings(config)?;
    let model = &config.model;
    let m = m_between(model, &settings[0], &settings[1])?;
    let sup = m_supremum(model)?;
    let analytic = analytic_quad(model, &settings)?;
    let stream = RandomStream::new(config.seed, CONTEXT_CHSH, 0);
    let mc = estimate_quad(model, &settings, config.shots, &stream)?;
    let sigma = mc.combined_std_error();
    let mut std_errors: BTreeMap<String, f64> = QUAD_KEYS
        .iter()
        .zip(&mc.estimates)
        .map(|(k, e)| (k.to_string(), e.std_error))
        .collect();
    std_errors.insert("chsh_b".into(), sigma);
    let results = json!({
        "settings": settings_echo(&settings),
        "m": m,
        "f": free_will(m)?,
        "m_supremum": sup.m,
        "analytic": {
            "correlators": analytic,
            "chsh": ChshReport::new(&analytic, m, ANALYTIC_TOL)?,
            "tolerance": ANALYTIC_TOL,
        },
        "monte_carlo": {
            "shots_per_correlator": config.shots,
            "correlators": mc.quad,
            "estimates": mc.estimates,
            "chsh": ChshReport::new(&mc.quad, m, SIGMAS * sigma)?,
            "combined_std_error": sigma,
            "tolerance": SIGMAS * sigma,
        },
    });
    Ok(Payload { results, std_errors })
}

fn mdep(config: &RunConfig) -> Result<Payload> {
    let model = &config.model;
    let report = m_supremum(model)?;
    let (alice, _) = party_settings(config)?;
    let mut pairs = Vec::new();
    for (i, (xn, x)) in alice.iter().enumerate() {
        for (xpn, xp) in &alice[i + 1..] {
            pairs.push(json!({ "first": xn, "second": xpn, "m": m_between(model, x, xp)? }));
        }
    }
    let independent = if alice.len() >= 2 {
        let settings: Vec<Setting> = alice.iter().map(|(_, s)| *s).collect();
        Value::from(independence_check(model, &settings, ANALYTIC_TOL)?)
    } else {
        Value::Null
    };
    let mut results = to_value(&report);
    let obj = results.as_object_mut().expect("report is an object");
    obj.insert("setting_pairs".into(), Value::from(pairs));
    obj.insert("measurement_independent".into(), independent);
    Ok(Payload::exact(results))
}

fn mutualinfo() -> Payload {
    let bits = mutual_information_onesided();
    let closed_form = 1.0 - 1.0 / (2.0 * LN_2);
    Payload::exact(json!({
        "bits": bits,
        "closed_form": closed_form,
        "abs_error": (bits - closed_form).abs(),
    }))
}

fn require_optimal(solution: &LpSolution) -> Result<f64> {
    solution.m_star.ok_or_else(|| {
        Error::SolverFailure(format!("LP for {:?} ended {:?}", solution.target, solution.status))
    })
}

/// Minimal dependence for `--quad`, else `--target-b`, else the configured
/// model's own analytic correlators at its settings.
fn optimize(config: &RunConfig) -> Result<Payload> {
    let solution = match (config.quad, config.target_b) {
        (Some(q), _) => min_m_for_correlators(&q)?,
        (None, Some(b)) => min_m_for_chsh(b)?,
        (None, None) => min_m_for_correlators(&analytic_quad(&config.model, &quad_settings(config)?)?)?,
    };
    let target_b = match solution.target {
        LpTarget::Chsh { b } => b,
        LpTarget::Correlators { quad } => chsh_max(&quad).0,
    };
    let mut results = to_value(&solution);
    let obj = results.as_object_mut().expect("solution is an object");
    obj.insert("target_chsh_b".into(), Value::from(target_b));
    obj.insert("lower_bound".into(), Value::from((target_b - 2.0).max(0.0)));
    Ok(Payload::exact(results))
}

fn toy_params(config: &RunConfig) -> Result<ToyModelParams> {
    match config.model {
        ModelDescriptor::ToyTable(t) => Ok(t),
        other => Err(Error::invalid(format!(
            "command `{}` only applies to the toy-table model, got {}",
            config.command,
            other.kind()
        ))),
    }
}

fn table(config: &RunConfig) -> Result<Payload> {
    let params = toy_params(config)?;
    let model = &config.model;
    let settings = quad_settings(config)?;
    let analytic = analytic_quad(model, &settings)?;
    let (b, variant) = chsh_max(&analytic);
    let report = m_supremum(model)?;
    let check = bound_check(b, report.m, ANALYTIC_TOL)?;

    let alice_marginals: Vec<Value> = [Label::X, Label::XPrime]
        .iter()
        .map(|&x| json!({ "setting": x.name(), "p_plus": params.alice_plus_probability(x) }))
        .collect();
    let bob_marginals: Vec<Value> = [Label::Y, Label::YPrime]
        .iter()
        .map(|&y| {
            let under_x = params.bob_plus_probability(Label::X, y);
            let under_xp = params.bob_plus_probability(Label::XPrime, y);
            json!({
                "setting": y.name(),
                "p_plus": { "X": under_x, "X'": under_xp },
                "variation": (under_x - under_xp).abs(),
            })
        })
        .collect();

    let stream = RandomStream::new(config.seed, CONTEXT_TABLE, 0);
    let mc = estimate_quad(model, &settings, config.shots, &stream)?;
    let sigma = mc.combined_std_error();
    let mc_b = chsh_value(&mc.quad, variant)?;
    let mut std_errors: BTreeMap<String, f64> = QUAD_KEYS
        .iter()
        .zip(&mc.estimates)
        .map(|(k, e)| (k.to_string(), e.std_error))
        .collect();
    std_errors.insert("chsh_b".into(), sigma);

    let results = json!({
        "p": params.p(),
        "a": params.a(),
        "b": params.b(),
        "correlators": analytic,
        "chsh_b": b,
        "chsh_variant": variant,
        "m": report.m,
        "f": report.f,
        "dependence_percent": report.dependence_percent,
        "independence_percent": report.independence_percent,
        "bound": check,
        "bound_tight": (check.bound - b).abs() <= ANALYTIC_TOL,
        "alice_marginals": alice_marginals,
        "bob_marginals": bob_marginals,
        "monte_carlo": {
            "shots_per_correlator": config.shots,
            "correlators": mc.quad,
            "estimates": mc.estimates,
            "chsh_b": mc_b,
            "combined_std_error": sigma,
            "within_tolerance": (mc_b - b).abs() <= SIGMAS * sigma,
        },
    });
    Ok(Payload { results, std_errors })
}

/// Runs `config` as a sweep regardless of its command.
pub fn sweep(config: &RunConfig) -> Result<Report> {
    let mut config = config.clone();
    config.command = Command::Sweep;
    run(&config)
}

/// One row per grid point: toy-table analytic values across `p`, or LP
/// optima across target `B`.
fn sweep_rows(config: &RunConfig) -> Result<Payload> {
    let range = config
        .sweep
        .ok_or_else(|| Error::invalid("sweep needs a p range or a B range"))?;
    let mut rows = Vec::new();
    match range.axis {
        SweepAxis::P => {
            let params = toy_params(config)?;
            for p in range.points()? {
                let model = ModelDescriptor::toy(p, params.a(), params.b())?;
                let quad = analytic_quad(&model, &[Label::X, Label::XPrime, Label::Y, Label::YPrime].map(Setting::Label))?;
                let (b, _) = chsh_max(&quad);
                let report = m_supremum(&model)?;
                let m_star = require_optimal(&min_m_for_chsh(b.clamp(2.0, 4.0))?)?;
                rows.push(json!({ "p": p, "chsh_b": b, "m": report.m, "f": report.f, "m_star": m_star }));
            }
        }
        SweepAxis::B => {
            for b in range.points()? {
                let m_star = require_optimal(&min_m_for_chsh(b)?)?;
                let m = m_star.clamp(0.0, 2.0);
                rows.push(json!({ "b": b, "chsh_b": b, "m": m, "f": free_will(m)?, "m_star": m_star }));
            }
        }
    }
    let axis = match range.axis {
        SweepAxis::P => "p",
        SweepAxis::B => "b",
    };
    Ok(Payload::exact(json!({ "axis": axis, "rows": rows })))
}
