use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scenario::{FieldSpec, RingSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// A truncated computation did not stabilize.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub task: String,
    pub field: FieldSpec,
    pub ring: RingSpec,
    pub status: Status,
    pub results: Value,
    /// The only field allowed to differ between two runs.
    pub elapsed_ms: u64,
}

impl Report {
    /// The report without timing, as compared by `regress`.
    pub fn canonical(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        v.as_object_mut().expect("object").remove("elapsed_ms");
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(&self.canonical()).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("task:    {}\n", self.task));
        out.push_str(&format!("field:   F_{} (p = {}, e = {})\n", self.field.p.pow(self.field.e), self.field.p, self.field.e));
        let vars = self.ring.vars.as_ref().map(|v| format!(" [{}]", v.join(", "))).unwrap_or_default();
        out.push_str(&format!("ring:    d = {}{vars}\n", self.ring.d));
        let status = match self.status {
            Status::Ok => "ok",
            Status::Inconclusive => "inconclusive",
        };
        out.push_str(&format!("status:  {status}\n"));
        let mut rows = Vec::new();
        flatten("", &self.results, &mut rows);
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            out.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        out.push_str(&format!("elapsed: {} ms\n", self.elapsed_ms));
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Null => Some("-".into()),
        Value::Bool(_) | Value::Number(_) => Some(v.to_string()),
        _ => None,
    }
}

/// Dotted keys; arrays of scalars stay on one line.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(xs) => {
            let parts: Option<Vec<String>> = xs.iter().map(scalar).collect();
            match parts {
                Some(ps) => out.push((prefix.to_string(), format!("[{}]", ps.join(", ")))),
                None => {
                    for (i, x) in xs.iter().enumerate() {
                        flatten(&key(&i.to_string()), x, out);
                    }
                }
            }
        }
        _ => out.push((prefix.to_string(), scalar(v).unwrap_or_default())),
    }
}

/// Keys whose values differ between two canonical reports.
pub fn diff(expected: &Value, actual: &Value) -> Vec<String> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    flatten("", expected, &mut a);
    flatten("", actual, &mut b);
    let a: std::collections::BTreeMap<_, _> = a.into_iter().collect();
    let b: std::collections::BTreeMap<_, _> = b.into_iter().collect();
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter(|k| a.get(*k) != b.get(*k))
        .map(|k| {
            let show = |m: &std::collections::BTreeMap<String, String>| m.get(k).cloned().unwrap_or_else(|| "(absent)".into());
            format!("{k}: expected {}, got {}", show(&a), show(&b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_and_diff() {
        let a = json!({"x": {"y": 1, "z": [1, 2]}, "w": [{"k": "a"}]});
        let mut rows = Vec::new();
        flatten("", &a, &mut rows);
        assert_eq!(rows, vec![("w.0.k".into(), "a".into()), ("x.y".into(), "1".into()), ("x.z".into(), "[1, 2]".into())]);
        let b = json!({"x": {"y": 2, "z": [1, 2]}, "w": [{"k": "a"}]});
        assert_eq!(diff(&a, &b), vec!["x.y: expected 1, got 2".to_string()]);
        assert!(diff(&a, &a).is_empty());
    }
}
