//! Suite reports: named pass/fail checks with machine-readable JSON and CSV
//! renderings.
//!
//! A check records the measured value, the target it is compared against and
//! the tolerance of that comparison, so a report is auditable without rerun.
//! Exploratory checks (scaling laws with unknown constants) are reported but
//! never count toward the overall verdict.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version stamp embedded in every report file.
pub const SCHEMA_VERSION: u32 = 1;

/// How a check's value relates to its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Two-sided: `|value - target| <= tolerance`.
    Identity,
    /// One-sided: `value <= target`.
    Bound,
    /// KS distance `value` against critical value `target`.
    Ks,
    /// Reported with a wide tolerance, excluded from the overall verdict.
    Exploratory,
}

impl std::fmt::Display for CheckKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CheckKind::Identity => "identity",
            CheckKind::Bound => "bound",
            CheckKind::Ks => "ks",
            CheckKind::Exploratory => "exploratory",
        };
        f.write_str(name)
    }
}

/// One named verification inside a suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn validate(name: &str, numbers: &[f64]) {
        assert!(
            numbers.iter().all(|v| v.is_finite()),
            "check {name} carries a non-finite number; reports must round-trip through JSON"
        );
    }

    /// Two-sided comparison within `tolerance`.
    pub fn identity(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let name = name.into();
        Self::validate(&name, &[value, target, tolerance]);
        let pass = (value - target).abs() <= tolerance;
        Check { name, kind: CheckKind::Identity, value, target, tolerance, pass }
    }

    /// One-sided comparison `value <= target`.
    pub fn bound(name: impl Into<String>, value: f64, target: f64) -> Self {
        let name = name.into();
        Self::validate(&name, &[value, target]);
        Check { name, kind: CheckKind::Bound, value, target, tolerance: 0.0, pass: value <= target }
    }

    /// One-sided comparison after subtracting a Monte Carlo error margin:
    /// passes when `estimate - margin <= target`, i.e. the estimate does not
    /// exceed the bound by more than its own noise.
    pub fn bound_with_margin(
        name: impl Into<String>,
        estimate: f64,
        margin: f64,
        target: f64,
    ) -> Self {
        let name = name.into();
        Self::validate(&name, &[estimate, margin, target]);
        let value = estimate - margin;
        Check { name, kind: CheckKind::Bound, value, target, tolerance: margin, pass: value <= target }
    }

    /// KS distance against the critical value for the chosen level.
    pub fn ks(name: impl Into<String>, statistic: f64, critical: f64) -> Self {
        let name = name.into();
        Self::validate(&name, &[statistic, critical]);
        Check {
            name,
            kind: CheckKind::Ks,
            value: statistic,
            target: critical,
            tolerance: 0.0,
            pass: statistic <= critical,
        }
    }

    /// Reported-only comparison; the pass flag is informative but the check
    /// never gates a suite.
    pub fn exploratory(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let name = name.into();
        Self::validate(&name, &[value, target, tolerance]);
        let pass = (value - target).abs() <= tolerance;
        Check { name, kind: CheckKind::Exploratory, value, target, tolerance, pass }
    }
}

/// A suite's full output: parameters, checks, and optional sampled curves
/// (time series of Monte Carlo means) for external plotting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub params: serde_json::Value,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub curves: BTreeMap<String, Vec<[f64; 2]>>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, params: serde_json::Value) -> Self {
        SuiteReport {
            schema: SCHEMA_VERSION,
            suite: suite.into(),
            params,
            checks: Vec::new(),
            curves: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn add_curve(&mut self, name: impl Into<String>, points: Vec<[f64; 2]>) {
        self.curves.insert(name.into(), points);
    }

    /// All non-exploratory checks pass.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.kind == CheckKind::Exploratory || c.pass)
    }

    /// Failing gated checks.
    pub fn failing(&self) -> Vec<&Check> {
        self.checks
            .iter()
            .filter(|c| c.kind != CheckKind::Exploratory && !c.pass)
            .collect()
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::malformed(format!("bad report JSON: {e}")))
    }

    /// Flat CSV mirror of the checks (one line per check).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,check,kind,value,target,tolerance,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.suite, c.name, c.kind, c.value, c.target, c.tolerance, c.pass
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn check_constructors_decide_pass() {
        assert!(Check::identity("id", 1.001, 1.0, 0.01).pass);
        assert!(!Check::identity("id", 1.1, 1.0, 0.01).pass);
        assert!(Check::bound("b", 0.5, 1.0).pass);
        assert!(!Check::bound("b", 1.5, 1.0).pass);
        // Estimate above the bound, but within its error margin.
        let c = Check::bound_with_margin("bm", 1.02, 0.05, 1.0);
        assert!(c.pass);
        assert_eq!(c.tolerance, 0.05);
        assert!(!Check::bound_with_margin("bm", 1.2, 0.05, 1.0).pass);
        assert!(Check::ks("ks", 0.02, 0.05).pass);
        assert!(!Check::ks("ks", 0.08, 0.05).pass);
    }

    #[test]
    fn exploratory_checks_do_not_gate() {
        let mut report = SuiteReport::new("demo", json!({"n": 4}));
        report.push(Check::identity("ok", 1.0, 1.0, 0.0));
        report.push(Check::exploratory("scaling", -0.9, -2.0 / 3.0, 0.1));
        assert!(!report.find("scaling").unwrap().pass);
        assert!(report.passed(), "exploratory miss must not fail the suite");
        report.push(Check::bound("broken", 2.0, 1.0));
        assert!(!report.passed());
        assert_eq!(report.failing().len(), 1);
        assert_eq!(report.failing()[0].name, "broken");
    }

    #[test]
    fn json_round_trip_preserves_everything() {
        let mut report = SuiteReport::new("demo", json!({"replicas": 8}));
        report.push(Check::ks("half-shift", 0.031, 0.052));
        report.add_curve("mean", vec![[0.0, 0.5], [1.0, 0.75]]);
        let back = SuiteReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back.schema, SCHEMA_VERSION);
        assert_eq!(back.suite, "demo");
        assert_eq!(back.checks.len(), 1);
        assert_eq!(back.checks[0].kind, CheckKind::Ks);
        assert_eq!(back.curves["mean"].len(), 2);
        assert!(SuiteReport::from_json("not json").is_err());
    }

    #[test]
    fn csv_mirrors_checks() {
        let mut report = SuiteReport::new("demo", json!({}));
        report.push(Check::identity("a", 1.0, 1.0, 0.1));
        report.push(Check::bound("b", 0.1, 1.0));
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "suite,check,kind,value,target,tolerance,pass");
        assert!(lines[1].starts_with("demo,a,identity,"));
        assert!(lines[2].ends_with("true"));
    }

    #[test]
    #[should_panic(expected = "non-finite")]
    fn non_finite_values_are_refused() {
        let _ = Check::identity("bad", f64::NAN, 0.0, 0.1);
    }
}
