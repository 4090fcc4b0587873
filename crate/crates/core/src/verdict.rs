use std::collections::BTreeMap;

use serde::Serialize;

/// Location and exact values of the first violation found by a checker.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    /// The other choice of A that a comparison was made against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_alt: Option<usize>,
    /// The other choice of B that a comparison was made against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_alt: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<String>,
    pub detail: String,
    /// Offending exact values, keyed by what they are.
    pub values: BTreeMap<String, String>,
}

impl Witness {
    pub fn at(lambda: usize, a: usize, b: usize, detail: impl Into<String>) -> Witness {
        Witness { lambda: Some(lambda), a: Some(a), b: Some(b), detail: detail.into(), ..Witness::default() }
    }

    pub fn value(mut self, key: &str, v: impl ToString) -> Witness {
        self.values.insert(key.to_string(), v.to_string());
        self
    }

    pub fn cell(mut self, cell: impl ToString) -> Witness {
        self.cell = Some(cell.to_string());
        self
    }
}

/// Result of checking one condition.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Verdict {
    pub condition: String,
    pub pass: bool,
    pub checked: u64,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn from_scan(condition: &str, checked: u64, witness: Option<Witness>) -> Verdict {
        Verdict { condition: condition.to_string(), pass: witness.is_none(), checked, witness }
    }

    pub fn pass(condition: &str, checked: u64) -> Verdict {
        Verdict::from_scan(condition, checked, None)
    }

    pub fn fail(condition: &str, checked: u64, witness: Witness) -> Verdict {
        Verdict::from_scan(condition, checked, Some(witness))
    }

    pub fn summary(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let mut line = format!("{:<12} {status}  checked={}", self.condition, self.checked);
        if let Some(w) = &self.witness {
            line.push_str(&format!("  witness: {}", w.describe()));
        }
        line
    }
}

impl Witness {
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        let fields = [
            ("lambda", self.lambda),
            ("a", self.a),
            ("b", self.b),
            ("a'", self.a_alt),
            ("b'", self.b_alt),
        ];
        for (name, v) in fields {
            if let Some(v) = v {
                parts.push(format!("{name}={v}"));
            }
        }
        if let Some(c) = &self.cell {
            parts.push(format!("cell={c}"));
        }
        for (k, v) in &self.values {
            parts.push(format!("{k}={v}"));
        }
        format!("{} [{}]", self.detail, parts.join(" "))
    }
}
