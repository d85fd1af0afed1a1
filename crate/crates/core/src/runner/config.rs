//! Run configuration: raw layered input (flags, config file) resolved into a
//! validated [`RunConfig`].

use std::collections::hash_map::RandomState;
use std::fmt;
use std::hash::{BuildHasher, Hasher};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chsh::{quantum_optimal_settings, CorrelatorQuad};
use crate::error::{Error, Result};
use crate::geometry::UnitVec3;
use crate::models::{ModelDescriptor, ModelKind, Outcome};

pub const DEFAULT_SHOTS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Chsh,
    Mdep,
    Mutualinfo,
    Optimize,
    Table,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Chsh => "chsh",
            Command::Mdep => "mdep",
            Command::Mutualinfo => "mutualinfo",
            Command::Optimize => "optimize",
            Command::Table => "table",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "simulate" => Command::Simulate,
            "chsh" => Command::Chsh,
            "mdep" => Command::Mdep,
            "mutualinfo" => Command::Mutualinfo,
            "optimize" => Command::Optimize,
            "table" => Command::Table,
            "sweep" => Command::Sweep,
            other => return Err(Error::invalid(format!("unknown command `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::invalid(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSetting {
    pub name: String,
    pub direction: UnitVec3,
}

/// Canonical setting name: `X`, `X'`, `Y`, `Y'` (`Xp`/`Yp` accepted as
/// shell-friendly spellings), or any other name verbatim.
fn canonical_name(name: &str) -> String {
    match name {
        "Xp" | "xp" => "X'".into(),
        "Yp" | "yp" => "Y'".into(),
        "x" => "X".into(),
        "y" => "Y".into(),
        other => other.to_string(),
    }
}

/// Parses `optimal` or entries `name=x,y,z` separated by `,` or `;`.
pub fn parse_settings(spec: &str) -> Result<Vec<NamedSetting>> {
    let spec = spec.trim();
    if spec == "optimal" {
        let names = ["X", "X'", "Y", "Y'"];
        return Ok(names
            .iter()
            .zip(quantum_optimal_settings())
            .map(|(n, d)| NamedSetting {
                name: n.to_string(),
                direction: d,
            })
            .collect());
    }
    let mut entries: Vec<(String, Vec<String>)> = Vec::new();
    for token in spec.split([',', ';']).map(str::trim) {
        if let Some((name, first)) = token.split_once('=') {
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::invalid(format!("setting entry `{token}` has no name")));
            }
            entries.push((name.to_string(), vec![first.trim().to_string()]));
        } else if let Some(last) = entries.last_mut() {
            last.1.push(token.to_string());
        } else {
            return Err(Error::invalid(format!(
                "unparsable setting token `{token}`; expected `name=x,y,z`"
            )));
        }
    }
    if entries.is_empty() {
        return Err(Error::invalid("empty settings specification"));
    }
    let mut out: Vec<NamedSetting> = Vec::with_capacity(entries.len());
    for (name, comps) in entries {
        let token = format!("{name}={}", comps.join(","));
        if comps.len() != 3 {
            return Err(Error::invalid(format!(
                "setting `{token}` needs exactly three components"
            )));
        }
        let mut v = [0.0; 3];
        for (slot, c) in v.iter_mut().zip(&comps) {
            *slot = c
                .parse()
                .map_err(|_| Error::invalid(format!("setting `{token}`: `{c}` is not a number")))?;
        }
        let direction = UnitVec3::new(v[0], v[1], v[2])
            .map_err(|_| Error::invalid(format!("setting `{token}` is a zero vector")))?;
        let name = canonical_name(&name);
        if out.iter().any(|s| s.name == name) {
            return Err(Error::invalid(format!("setting `{name}` given twice")));
        }
        out.push(NamedSetting { name, direction });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    P,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub axis: SweepAxis,
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl SweepRange {
    /// Parses `start:end:step`, or a single value for a one-point range.
    pub fn parse(axis: SweepAxis, spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("range `{spec}`: `{s}` is not a number")))
        };
        let range = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                SweepRange { axis, start: v, end: v, step: 1.0 }
            }
            [a, b, s] => SweepRange {
                axis,
                start: num(a)?,
                end: num(b)?,
                step: num(s)?,
            },
            _ => {
                return Err(Error::invalid(format!(
                    "range `{spec}` must be `start:end:step` or a single value"
                )))
            }
        };
        range.points().map(|_| range)
    }

    /// Grid points `start + i·step` up to `end` (with 1e-9 slack).
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::invalid("range bounds must be finite"));
        }
        if !(self.step > 0.0) {
            return Err(Error::invalid("range step must be positive"));
        }
        if self.start > self.end {
            return Err(Error::invalid(format!(
                "empty range: start {} exceeds end {}",
                self.start, self.end
            )));
        }
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n)
            .map(|i| (self.start + i as f64 * self.step).min(self.end))
            .collect())
    }
}

/// Unvalidated configuration as read from flags or a config file. Every
/// field is optional; layers combine with [`RawConfig::or`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Option<String>,
    pub model: Option<String>,
    pub p: Option<f64>,
    pub a: Option<i8>,
    pub b: Option<i8>,
    pub settings: Option<String>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub entropy: Option<bool>,
    pub workers: Option<usize>,
    pub format: Option<String>,
    pub output: Option<PathBuf>,
    pub target_b: Option<f64>,
    pub quad: Option<String>,
    pub p_range: Option<String>,
    pub b_range: Option<String>,
}

impl RawConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("config file: {e}")))
    }

    /// Field-wise: values in `self` win over `lower`.
    pub fn or(self, lower: RawConfig) -> RawConfig {
        RawConfig {
            command: self.command.or(lower.command),
            model: self.model.or(lower.model),
            p: self.p.or(lower.p),
            a: self.a.or(lower.a),
            b: self.b.or(lower.b),
            settings: self.settings.or(lower.settings),
            shots: self.shots.or(lower.shots),
            seed: self.seed.or(lower.seed),
            entropy: self.entropy.or(lower.entropy),
            workers: self.workers.or(lower.workers),
            format: self.format.or(lower.format),
            output: self.output.or(lower.output),
            target_b: self.target_b.or(lower.target_b),
            quad: self.quad.or(lower.quad),
            p_range: self.p_range.or(lower.p_range),
            b_range: self.b_range.or(lower.b_range),
        }
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let command: Command = self
            .command
            .as_deref()
            .ok_or_else(|| Error::invalid("no command given"))?
            .parse()?;
        let default_kind = match command {
            Command::Table | Command::Sweep => ModelKind::ToyTable,
            _ => ModelKind::SingletOnesided,
        };
        let kind = match &self.model {
            Some(m) => m.parse()?,
            None => default_kind,
        };
        if matches!(command, Command::Table) && kind != ModelKind::ToyTable {
            return Err(Error::invalid("`table` only applies to the toy-table model"));
        }
        let outcome = |v: Option<i8>| v.map_or(Ok(Outcome::Plus), Outcome::try_from);
        let model = match kind {
            ModelKind::SingletOnesided => ModelDescriptor::SingletOnesided,
            ModelKind::UniformBaseline => ModelDescriptor::UniformBaseline,
            ModelKind::ToyTable => {
                ModelDescriptor::toy(self.p.unwrap_or(0.5), outcome(self.a)?, outcome(self.b)?)?
            }
        };
        let settings = match (&self.settings, kind.is_continuous()) {
            (Some(_), false) => {
                return Err(Error::invalid(
                    "toy-table uses the fixed labels X, X', Y, Y'; do not pass --settings",
                ))
            }
            (Some(spec), true) => parse_settings(spec)?,
            (None, true) => parse_settings("optimal")?,
            (None, false) => Vec::new(),
        };
        let shots = self.shots.unwrap_or(DEFAULT_SHOTS);
        if shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        let seed = if self.entropy.unwrap_or(false) {
            RandomState::new().build_hasher().finish()
        } else {
            self.seed.unwrap_or(DEFAULT_SEED)
        };
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be at least 1"));
        }
        let output_format = match &self.format {
            Some(f) => f.parse()?,
            None => OutputFormat::Json,
        };
        let quad = match &self.quad {
            Some(q) => Some(parse_quad(q)?),
            None => None,
        };
        if let Some(b) = self.target_b {
            if !(2.0..=4.0).contains(&b) {
                return Err(Error::invalid(format!("target B {b} outside [2, 4]")));
            }
        }
        let sweep = match (&self.p_range, &self.b_range) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid("give either a p range or a B range, not both"))
            }
            (Some(r), None) => Some(SweepRange::parse(SweepAxis::P, r)?),
            (None, Some(r)) => Some(SweepRange::parse(SweepAxis::B, r)?),
            (None, None) => None,
        };
        if command == Command::Sweep && sweep.is_none() {
            return Err(Error::invalid("sweep needs --p-range or --b-range"));
        }
        Ok(RunConfig {
            command,
            model,
            settings,
            shots,
            seed,
            workers: self.workers,
            output_format,
            output_path: self.output.clone(),
            target_b: self.target_b,
            quad,
            sweep,
        })
    }
}

fn parse_quad(spec: &str) -> Result<CorrelatorQuad> {
    let vals: Vec<f64> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("quad `{spec}`: `{s}` is not a number")))
        })
        .collect::<Result<_>>()?;
    let arr: [f64; 4] = vals
        .try_into()
        .map_err(|_| Error::invalid(format!("quad `{spec}` needs four correlators")))?;
    CorrelatorQuad::from_array(arr)
}

/// Validated configuration for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelDescriptor,
    /// Named directions for continuous models; empty for the toy table.
    pub settings: Vec<NamedSetting>,
    pub shots: u64,
    pub seed: u64,
    /// Rayon worker count; `None` uses the global pool. Never affects results.
    pub workers: Option<usize>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub target_b: Option<f64>,
    pub quad: Option<CorrelatorQuad>,
    pub sweep: Option<SweepRange>,
}

impl RunConfig {
    pub fn new(command: Command, model: ModelDescriptor) -> Self {
        let settings = if model.kind().is_continuous() {
            parse_settings("optimal").expect("optimal settings")
        } else {
            Vec::new()
        };
        Self {
            command,
            model,
            settings,
            shots: DEFAULT_SHOTS,
            seed: DEFAULT_SEED,
            workers: None,
            output_format: OutputFormat::Json,
            output_path: None,
            target_b: None,
            quad: None,
            sweep: None,
        }
    }

    pub fn setting(&self, name: &str) -> Option<UnitVec3> {
        self.settings.iter().find(|s| s.name == name).map(|s| s.direction)
    }
}
