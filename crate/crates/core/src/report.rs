use serde::Serialize;
use serde_json::{json, Value};

/// Self-contained record of one command run.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    /// Echo of every parameter that influences the results.
    pub inputs: Value,
    pub results: Vec<Value>,
    pub pass: bool,
    /// Wall-clock time; only included on request since it breaks
    /// byte-for-byte reproducibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Report {
        Report {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            results: Vec::new(),
            pass: true,
            timing_ms: None,
        }
    }

    pub fn push<T: Serialize>(&mut self, result: &T) {
        self.results.push(serde_json::to_value(result).expect("serializable result"));
    }

    /// Adds a verdict-shaped result and folds it into the overall status.
    pub fn push_check(&mut self, name: &str, pass: bool, details: Value) {
        self.pass &= pass;
        self.results.push(json!({"condition": name, "pass": pass, "details": details}));
    }

    pub fn push_verdict(&mut self, v: &crate::Verdict) {
        self.pass &= v.pass;
        self.push(v);
    }

    /// Pretty JSON with sorted keys; parsing and re-serializing it yields the
    /// same bytes.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("serializable report");
        let mut s = serde_json::to_string_pretty(&value).expect("serializable value");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_byte_identical() {
        let mut r = Report::new("demo", json!({"seed": 42, "model": "builtin:qm-data"}));
        r.push_check("x", true, json!({"fraction": 0.999, "ratio": 1.0 / 3.0}));
        r.push_verdict(&crate::Verdict::pass("spin", 1320));
        let text = r.to_json();
        let parsed: Value = serde_json::from_str(&text).unwrap();
        let mut again = serde_json::to_string_pretty(&parsed).unwrap();
        again.push('\n');
        assert_eq!(text, again);
        assert!(!text.contains("timing_ms"));
    }
}
