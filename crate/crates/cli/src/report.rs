//! Deterministic report emission as JSON or an aligned `key = value` table.

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Table,
}

/// Outcome class, mapped onto the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Verdict,
    Inconclusive,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verdict => 0,
            Status::Inconclusive => 1,
            Status::InputError => 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Status::Verdict => "ok",
            Status::Inconclusive => "inconclusive",
            Status::InputError => "input-error",
        }
    }
}

pub struct Report {
    pub command: String,
    pub seed: u64,
    pub status: Status,
    pub result: Value,
}

/// Entropy values with nine decimals; h(∅) prints as `-inf`.
pub fn fixed9(x: f64) -> Value {
    Value::String(if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:.9}")
    })
}

impl Report {
    fn envelope(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("status".into(), Value::String(self.status.tag().into()));
        m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        m.insert("result".into(), self.result.clone());
        Value::Object(m)
    }

    pub fn emit(&self, format: Format) -> String {
        let v = self.envelope();
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Format::Table => {
                let mut rows = Vec::new();
                flatten("", &v, &mut rows);
                let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                rows.iter().map(|(k, val)| format!("{k:<width$} = {val}\n")).collect()
            }
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(xs) if xs.iter().all(|x| scalar(x).is_some()) => {
            let items: Vec<String> = xs.iter().filter_map(scalar).collect();
            out.push((prefix.to_string(), format!("[{}]", items.join(", "))));
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other).unwrap_or_default())),
    }
}
