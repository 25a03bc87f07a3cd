use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

/// Collects named invariant checks; `value ≤ tolerance` passes.
#[derive(Debug, Default)]
pub struct Checks(Vec<Check>);

impl Checks {
    pub fn at_most(&mut self, name: &str, value: f64, tolerance: f64) -> &mut Self {
        self.0.push(Check { name: name.to_string(), pass: value <= tolerance, value, tolerance });
        self
    }

    pub fn holds(&mut self, name: &str, pass: bool) -> &mut Self {
        self.0.push(Check { name: name.to_string(), pass, value: if pass { 0.0 } else { 1.0 }, tolerance: 0.0 });
        self
    }

    pub fn into_vec(self) -> Vec<Check> {
        self.0
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub exact: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<Value>,
    pub checks: Vec<Check>,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str, config: Value, exact: Value, empirical: Option<Value>, checks: Checks) -> Self {
        let checks = checks.into_vec();
        let all_passed = checks.iter().all(|c| c.pass);
        Self { command: command.to_string(), config, exact, empirical, checks, all_passed, wall_time_ms: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.command);
        write_section(&mut out, "exact", &self.exact);
        if let Some(e) = &self.empirical {
            write_section(&mut out, "empirical", e);
        }
        let _ = writeln!(out, "checks");
        for c in &self.checks {
            let verdict = if c.pass { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "  {verdict} {:<36} {:.3e} (tol {:.1e})", c.name, c.value, c.tolerance);
        }
        if let Some(ms) = self.wall_time_ms {
            let _ = writeln!(out, "wall time {ms:.1} ms");
        }
        out
    }
}

fn write_section(out: &mut String, title: &str, value: &Value) {
    let _ = writeln!(out, "{title}");
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let _ = writeln!(out, "  {k:<24} {}", compact(v));
            }
        }
        other => {
            let _ = writeln!(out, "  {}", compact(other));
        }
    }
}

fn compact(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 100 {
        format!("{}…", &s[..s.char_indices().take_while(|(i, _)| *i < 97).last().map_or(0, |(i, c)| i + c.len_utf8())])
    } else {
        s
    }
}
