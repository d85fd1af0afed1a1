//! Run reports and their JSON/CSV renderings.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly. Positional notation is used for decimal exponents in
//! `[-5, 16)`, scientific otherwise.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use super::config::{Command, RunConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Command,
    pub config: RunConfig,
    pub results: Value,
    /// Standard errors of the Monte-Carlo estimates in `results`, keyed by
    /// estimate name.
    pub std_errors: BTreeMap<String, f64>,
    pub version: String,
    pub wall_time_s: f64,
}

/// `v` with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..16).contains(&exp) {
        return sci;
    }
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest.replace('.', "")),
        None => ("", mantissa.replace('.', "")),
    };
    if exp >= 0 {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{sign}{int}.{frac}")
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{digits}")
    }
}

/// Pretty JSON with [`format_f64`] floats.
struct Pretty17<'a>(PrettyFormatter<'a>);

impl Formatter for Pretty17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Pretty17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::SolverFailure(format!("serializing report: {e}")))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

const SWEEP_COLUMNS: [&str; 4] = ["chsh_b", "m", "f", "m_star"];
const SWEEP_HEADERS: [&str; 4] = ["chsh_B", "M", "F", "m_star"];

impl Report {
    /// Everything except the wall time: the part that is reproducible.
    pub fn payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("wall_time_s");
        v
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }

    pub fn payload_json(&self) -> Result<String> {
        to_json_string(&self.payload())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("report JSON: {e}")))
    }

    /// Sweeps render as one row per grid point; every other command as
    /// flattened `key,value` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::SolverFailure(format!("writing CSV: {e}"));
        if let (Some(axis), Some(rows)) = (
            self.results.get("axis").and_then(Value::as_str),
            self.results.get("rows").and_then(Value::as_array),
        ) {
            let axis_header = if axis == "b" { "B" } else { "p" };
            let mut header = vec![axis_header];
            header.extend(SWEEP_HEADERS);
            w.write_record(&header).map_err(csv_err)?;
            for row in rows {
                let mut record = vec![cell(&row[axis])];
                record.extend(SWEEP_COLUMNS.iter().map(|k| cell(&row[*k])));
                w.write_record(&record).map_err(csv_err)?;
            }
        } else {
            w.write_record(["key", "value"]).map_err(csv_err)?;
            let mut flat = Vec::new();
            flatten("", &serde_json::to_value(self).expect("report serializes"), &mut flat);
            for (k, v) in flat {
                w.write_record([k, v]).map_err(csv_err)?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::SolverFailure(format!("writing CSV: {e}")))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 strings"))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (_, Some(i), _) => i.to_string(),
            (_, _, Some(f)) => format_f64(f),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&key(k), child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), child, out);
            }
        }
        leaf => out.push((prefix.to_string(), cell(leaf))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelDescriptor;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(3.0), "3.0000000000000000");
        assert_eq!(format_f64(-0.5), "-0.50000000000000000");
        assert_eq!(format_f64(2.0 * std::f64::consts::SQRT_2), "2.8284271247461903");
        assert_eq!(format_f64(1e-3), "0.0010000000000000000");
        assert_eq!(format_f64(1e20), "1.0000000000000000e20");
        assert_eq!(format_f64(1.5e-7), "1.4999999999999999e-7");
        assert_eq!(format_f64(0.0), "0.0000000000000000");
    }

    proptest! {
        #[test]
        fn formatted_floats_round_trip(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let s = format_f64(v);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
            let parsed: Value = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(parsed.as_f64().unwrap().to_bits(), v.to_bits());
        }
    }

    fn sample() -> Report {
        Report {
            command: Command::Mdep,
            config: RunConfig::new(Command::Mdep, ModelDescriptor::SingletOnesided),
            results: serde_json::json!({"m": 2.0 * std::f64::consts::SQRT_2 - 2.0, "list": [0.1, 1, -3.5e-9]}),
            std_errors: BTreeMap::from([("XY".to_string(), 1.0 / 3.0)]),
            version: "0.1.0".into(),
            wall_time_s: 0.25,
        }
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let r = sample();
        let text = r.to_json().unwrap();
        assert_eq!(Report::from_json(&text).unwrap(), r);
        assert!(text.contains("0.82842712474619029"), "{text}");
        assert!(!r.payload_json().unwrap().contains("wall_time_s"));
    }

    #[test]
    fn csv_flattens_with_header() {
        let csv = sample().to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("key,value"));
        assert!(csv.contains("results.list.1,1\n"));
        assert!(csv.contains("std_errors.XY,0.33333333333333331\n"));
    }

    #[test]
    fn sweep_csv_columns() {
        let mut r = sample();
        r.results = serde_json::json!({
            "axis": "p",
            "rows": [{"p": 0.0, "chsh_b": 2.0, "m": 0.0, "f": 1.0, "m_star": 0.0}]
        });
        let csv = r.to_csv().unwrap();
        assert_eq!(
            csv,
            "p,chsh_B,M,F,m_star\n0.0000000000000000,2.0000000000000000,0.0000000000000000,1.0000000000000000,0.0000000000000000\n"
        );
    }
}
