use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use ordist_core::quadfield::QuadField;
use ordist_core::zlinalg::AbGroup;
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: &str = "ordist.report/1";

#[derive(Clone, Debug, Serialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: CommandEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
    /// Wall-clock milliseconds; the only field allowed to differ between runs.
    pub timing_ms: u64,
}

impl ReportDocument {
    pub fn new(command: CommandEcho) -> Self {
        ReportDocument {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            command,
            field: None,
            result: None,
            error: None,
            timing_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `key = value` lines, nested keys joined with dots.
    pub fn to_text(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        flatten("", &v, &mut out);
        out
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object()) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        _ => {
            out.push_str(prefix);
            out.push_str(" = ");
            out.push_str(&v.to_string());
            out.push('\n');
        }
    }
}

/// An exact integer: a JSON number when it fits in `i64`, a decimal string
/// otherwise.
pub fn big(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn bigs(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(big).collect())
}

/// Rank and torsion invariants, in divisibility order.
pub fn group(g: &AbGroup) -> Value {
    json!({ "rank": g.rank(), "torsion_invariants": bigs(&g.torsion_invariants()) })
}

pub fn field(k: &QuadField) -> Value {
    json!({
        "d": k.d(),
        "disc": k.disc(),
        "w": k.w(),
        "h": k.h(),
        "class_group": bigs(&k.class_group().torsion_invariants()),
    })
}
