use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;

/// One named row of numbers; field order is kept for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub name: String,
    pub values: Vec<(String, f64)>,
}

impl Record {
    pub fn new(name: impl Into<String>) -> Self {
        Record {
            name: name.into(),
            values: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.values.push((key.to_string(), v));
        self
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when measured ≤ tolerance.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            pass: measured <= tolerance,
            measured,
            tolerance,
        }
    }

    /// Passes when measured ≥ tolerance (negative controls).
    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            pass: measured >= tolerance,
            measured,
            tolerance,
        }
    }

    /// A yes/no check: measured is 1 or 0, tolerance 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            pass: ok,
            measured: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub results: Vec<Record>,
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    name: &'a str,
    values: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    command: &'a str,
    params: &'a BTreeMap<String, String>,
    results: Vec<JsonRecord<'a>>,
    checks: &'a [Check],
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            command: command.into(),
            params: BTreeMap::new(),
            results: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, v: impl ToString) {
        self.params.insert(key.to_string(), v.to_string());
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Non-finite numbers would not survive JSON; they are reported as a
    /// failed check instead of being emitted.
    pub fn sanitize(&mut self) {
        let mut bad = Vec::new();
        for r in &mut self.results {
            r.values.retain(|(k, v)| {
                if v.is_finite() {
                    true
                } else {
                    bad.push(format!("{}.{k}", r.name));
                    false
                }
            });
        }
        for name in bad {
            self.checks.push(Check::holds(format!("{name} is finite"), false));
        }
    }

    pub fn to_json(&self) -> String {
        let results = self
            .results
            .iter()
            .map(|r| JsonRecord {
                name: &r.name,
                values: r.values.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect(),
            })
            .collect();
        let doc = JsonReport {
            command: &self.command,
            params: &self.params,
            results,
            checks: &self.checks,
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }

    /// A report with checks writes them as `check,pass,measured,tolerance`;
    /// otherwise results as `name` then the value columns of the first record.
    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if let (true, Some(first)) = (self.checks.is_empty(), self.results.first()) {
            let mut header = vec!["name".to_string()];
            header.extend(first.values.iter().map(|(k, _)| k.clone()));
            w.write_record(&header)?;
            for r in &self.results {
                let mut row = vec![r.name.clone()];
                for (k, _) in &first.values {
                    let v = r.values.iter().find(|(kk, _)| kk == k).map(|(_, v)| v.to_string());
                    row.push(v.unwrap_or_default());
                }
                w.write_record(&row)?;
            }
        } else {
            w.write_record(["check", "pass", "measured", "tolerance"])?;
            for c in &self.checks {
                w.write_record([
                    c.name.clone(),
                    c.pass.to_string(),
                    c.measured.to_string(),
                    c.tolerance.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.command);
        for (k, v) in &self.params {
            s += &format!("  {k} = {v}\n");
        }
        for r in &self.results {
            let vals: Vec<String> = r.values.iter().map(|(k, v)| format!("{k}={}", fmt_num(*v))).collect();
            s += &format!("{}: {}\n", r.name, vals.join("  "));
        }
        for c in &self.checks {
            s += &format!(
                "[{}] {}: measured {:.3e}, tolerance {:.1e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance
            );
        }
        if !self.checks.is_empty() {
            let failed = self.checks.iter().filter(|c| !c.pass).count();
            s += &format!("{} checks, {failed} failed\n", self.checks.len());
        }
        s
    }
}

fn fmt_num(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e12) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}
