use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Machine-readable record of a pipeline run: tool version, digests of the
/// inputs, and an ordered list of steps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub inputs: Vec<String>,
    pub steps: Vec<Value>,
}

impl Report {
    pub fn new() -> Self {
        Report { tool_version: env!("CARGO_PKG_VERSION").to_string(), inputs: Vec::new(), steps: Vec::new() }
    }

    pub fn add_input(&mut self, bytes: &[u8]) {
        self.inputs.push(digest_bytes(bytes));
    }

    pub fn add_input_digest(&mut self, digest: impl Into<String>) {
        self.inputs.push(digest.into());
    }

    /// Append a step with a name, its parameters and its outputs.
    pub fn push_step(&mut self, name: &str, params: Value, outputs: Value) {
        let mut m = Map::new();
        m.insert("name".into(), Value::String(name.into()));
        m.insert("params".into(), params);
        m.insert("outputs".into(), outputs);
        self.steps.push(Value::Object(m));
    }

    pub fn push_raw(&mut self, step: Value) {
        self.steps.push(step);
    }

    pub fn to_json(&self) -> Result<String> {
        export_report(self)
    }
}

/// Hex SHA-256 of a byte string.
pub fn digest_bytes(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// Canonical JSON of any serialisable report: sorted keys, two-space
/// indentation, floats to ten significant digits, non-finite values as null.
pub fn export_report<T: Serialize + ?Sized>(report: &T) -> Result<String> {
    let value = serde_json::to_value(report)?;
    Ok(to_canonical_json(&value))
}

pub fn write_report<T: Serialize + ?Sized>(path: impl AsRef<Path>, report: &T) -> Result<()> {
    let mut text = export_report(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn to_canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(v: &Value, level: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if f.is_finite() {
                    out.push_str(&format_g10(f));
                } else {
                    out.push_str("null");
                }
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(level + 1, out);
                write_value(item, level + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(level + 1, out);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*k], level + 1, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push('}');
        }
    }
}

/// `printf("%.10g")` formatting.
pub fn format_g10(x: f64) -> String {
    const P: i32 = 10;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return "null".into();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
