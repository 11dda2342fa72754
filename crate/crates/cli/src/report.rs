//! JSON report assembly.
//!
//! Top-level keys, always in this order: `command`, `inputs`, `scheme`,
//! `values`, `certificates`, `tolerances`, `seed`. Floats are written in
//! scientific notation with 17 significant digits; non-finite floats as null.

use serde_json::{Map, Number, Value};

pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    // arbitrary_precision keeps the literal text
    let v = if v == 0.0 { 0.0 } else { v };
    serde_json::from_str::<Number>(&format!("{v:.16e}"))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn nums(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| num(v)).collect())
}

/// Row-major flat values as an array of rows.
pub fn rows(flat: &[f64], dim: usize) -> Value {
    Value::Array(flat.chunks(dim.max(1)).map(nums).collect())
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<Value>,
    pub scheme: Value,
    pub values: Map<String, Value>,
    pub certificates: Map<String, Value>,
    pub tolerances: Map<String, Value>,
    pub seed: Option<u64>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            scheme: Value::Null,
            values: Map::new(),
            certificates: Map::new(),
            tolerances: Map::new(),
            seed: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut top = Map::new();
        top.insert("command".into(), Value::String(self.command.clone()));
        top.insert("inputs".into(), Value::Array(self.inputs.clone()));
        top.insert("scheme".into(), self.scheme.clone());
        top.insert("values".into(), Value::Object(self.values.clone()));
        top.insert(
            "certificates".into(),
            Value::Object(self.certificates.clone()),
        );
        top.insert("tolerances".into(), Value::Object(self.tolerances.clone()));
        top.insert(
            "seed".into(),
            self.seed.map_or(Value::Null, |s| Value::Number(s.into())),
        );
        let mut text = serde_json::to_string_pretty(&Value::Object(top)).unwrap_or_default();
        text.push('\n');
        text
    }
}
