//! Side-by-side comparison of two reports.

use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::run::{Constant, Report, Status, REPORT_SCHEMA_VERSION};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantChange {
    pub battery: String,
    pub key: String,
    pub a: Option<Constant>,
    pub b: Option<Constant>,
    /// `|b − a| / max(|a|, |b|)` when both sides exist.
    pub relative_change: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictChange {
    pub battery: String,
    pub key: String,
    pub a: Option<String>,
    pub b: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportDiff {
    pub status: Option<(Status, Status)>,
    pub constants: Vec<ConstantChange>,
    pub verdicts: Vec<VerdictChange>,
}

impl ReportDiff {
    pub fn is_empty(&self) -> bool {
        self.status.is_none() && self.constants.is_empty() && self.verdicts.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diff serializes")
    }
}

/// Reads a report, refusing other schema versions before parsing the rest.
pub fn load_report(path: impl AsRef<Path>) -> Result<Report> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_report(&text)
}

pub fn parse_report(text: &str) -> Result<Report> {
    let v: Value = serde_json::from_str(text)?;
    let version = v.get("schema_version").and_then(Value::as_u64);
    if version != Some(REPORT_SCHEMA_VERSION as u64) {
        return Err(Error::SchemaMismatch(format!(
            "report schema {} (supported: {REPORT_SCHEMA_VERSION})",
            version.map_or("missing".into(), |x| x.to_string())
        )));
    }
    Ok(serde_json::from_value(v)?)
}

fn battery_names(a: &Report, b: &Report) -> Vec<String> {
    let mut names: Vec<String> =
        a.batteries.iter().chain(&b.batteries).map(|r| r.battery.name().to_string()).collect();
    names.sort();
    names.dedup();
    names
}

/// Constants whose values differ and verdicts whose values differ, with
/// keys present on only one side reported against `None`.
pub fn compare(a: &Report, b: &Report) -> Result<ReportDiff> {
    if a.schema_version != b.schema_version {
        return Err(Error::SchemaMismatch(format!("report schemas {} and {}", a.schema_version, b.schema_version)));
    }
    let mut diff = ReportDiff::default();
    if a.status != b.status {
        diff.status = Some((a.status, b.status));
    }
    for name in battery_names(a, b) {
        let find = |r: &Report| r.batteries.iter().find(|x| x.battery.name() == name).cloned();
        let (ra, rb) = (find(a), find(b));
        let mut ckeys: Vec<&String> = ra.iter().chain(&rb).flat_map(|r| r.constants.keys()).collect();
        ckeys.sort();
        ckeys.dedup();
        for key in ckeys {
            let ca = ra.as_ref().and_then(|r| r.constants.get(key)).cloned();
            let cb = rb.as_ref().and_then(|r| r.constants.get(key)).cloned();
            let same = match (&ca, &cb) {
                (Some(x), Some(y)) => x.value.to_bits() == y.value.to_bits() || (x.value.is_nan() && y.value.is_nan()),
                _ => false,
            };
            if !same {
                let relative_change = match (&ca, &cb) {
                    (Some(x), Some(y)) => Some((y.value - x.value).abs() / x.value.abs().max(y.value.abs())),
                    _ => None,
                };
                diff.constants.push(ConstantChange { battery: name.clone(), key: key.clone(), a: ca, b: cb, relative_change });
            }
        }
        let mut vkeys: Vec<&String> = ra.iter().chain(&rb).flat_map(|r| r.verdicts.keys()).collect();
        vkeys.sort();
        vkeys.dedup();
        for key in vkeys {
            let va = ra.as_ref().and_then(|r| r.verdicts.get(key)).map(|v| v.value.clone());
            let vb = rb.as_ref().and_then(|r| r.verdicts.get(key)).map(|v| v.value.clone());
            if va != vb {
                diff.verdicts.push(VerdictChange { battery: name.clone(), key: key.clone(), a: va, b: vb });
            }
        }
    }
    Ok(diff)
}

impl fmt::Display for ReportDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return writeln!(f, "no differences");
        }
        let show = |x: &Option<String>| x.clone().unwrap_or_else(|| "-".into());
        if let Some((a, b)) = self.status {
            writeln!(f, "status: {a:?} -> {b:?}")?;
        }
        for v in &self.verdicts {
            writeln!(f, "verdict  {}/{}: {} -> {}", v.battery, v.key, show(&v.a), show(&v.b))?;
        }
        for c in &self.constants {
            let val = |x: &Option<Constant>| x.as_ref().map(|c| format!("{:.6e}", c.value));
            let rel = c.relative_change.map(|r| format!(" (rel {r:.2e})")).unwrap_or_default();
            writeln!(f, "constant {}/{}: {} -> {}{rel}", c.battery, c.key, show(&val(&c.a)), show(&val(&c.b)))?;
        }
        Ok(())
    }
}
