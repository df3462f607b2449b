use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of one inequality or identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub slack: f64,
    pub pass: bool,
    /// False when the check does not apply to the input; such reports pass.
    #[serde(default = "yes")]
    pub applicable: bool,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub witnesses: BTreeMap<String, serde_json::Value>,
}

fn yes() -> bool {
    true
}

impl EstimateReport {
    /// Report for `lhs <= rhs + slack`.
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = rhs - lhs;
        EstimateReport {
            name: name.into(),
            lhs,
            rhs,
            margin,
            slack,
            pass: margin >= -slack,
            applicable: true,
            constants: BTreeMap::new(),
            witnesses: BTreeMap::new(),
        }
    }

    /// Report for `|value| <= slack`, stored as `lhs = |value|`, `rhs = 0`.
    pub fn residual(name: impl Into<String>, value: f64, slack: f64) -> Self {
        let mut r = Self::new(name, value.abs(), 0.0, slack);
        r.witnesses.insert("signed_value".into(), value.into());
        r
    }

    pub fn not_applicable(name: impl Into<String>, why: &str) -> Self {
        let mut r = Self::new(name, 0.0, 0.0, 0.0);
        r.applicable = false;
        r.witnesses.insert("reason".into(), why.into());
        r
    }

    pub fn constant(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.into(), value);
        self
    }

    pub fn witness(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.witnesses.insert(key.into(), value.into());
        self
    }

    /// Combines sub-checks: passes iff all pass; keeps the smallest margin.
    pub fn all(name: impl Into<String>, parts: Vec<EstimateReport>) -> Self {
        let name = name.into();
        let worst =
            parts.iter().filter(|p| p.applicable).min_by(|a, b| (a.margin + a.slack).total_cmp(&(b.margin + b.slack)));
        let mut r = match worst {
            Some(w) => EstimateReport { name: name.clone(), ..w.clone() },
            None => Self::not_applicable(name.clone(), "no applicable parts"),
        };
        r.pass = parts.iter().all(|p| p.pass);
        r.witnesses.insert("parts".into(), serde_json::to_value(&parts).expect("reports serialize"));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_margin_within_slack() {
        assert!(EstimateReport::new("a", 1.0, 1.0, 0.0).pass);
        assert!(!EstimateReport::new("a", 1.0 + 1e-6, 1.0, 1e-7).pass);
        assert!(EstimateReport::new("a", 1.0 + 1e-8, 1.0, 1e-7).pass);
        assert!(EstimateReport::residual("r", -0.5, 0.5).pass);
    }

    #[test]
    fn aggregate_keeps_worst_part() {
        let r = EstimateReport::all(
            "both",
            vec![EstimateReport::new("x", 0.0, 3.0, 0.0), EstimateReport::new("y", 2.0, 1.0, 0.0)],
        );
        assert!(!r.pass);
        assert_eq!(r.margin, -1.0);
    }
}
