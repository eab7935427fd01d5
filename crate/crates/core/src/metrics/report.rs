use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::behavior::BehaviorKind;
use crate::error::{Error, Result};

use super::{MetricSpec, MetricValue};

const ABSENT: &str = "NA";

/// Metric values of one scope, aligned with [`MetricReport::specs`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScopeReport {
    pub times: Vec<f64>,
    pub values: Vec<MetricValue>,
}

impl ScopeReport {
    pub fn get(&self, specs: &[MetricSpec], name: &str) -> Option<&MetricValue> {
        specs.iter().position(|s| s.name == name).map(|i| &self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub scenario: String,
    pub planner: String,
    pub seed: u64,
    pub specs: Vec<MetricSpec>,
    pub overall: ScopeReport,
    pub groups: BTreeMap<BehaviorKind, ScopeReport>,
}

impl MetricReport {
    pub fn final_value(&self, name: &str) -> Option<f64> {
        self.overall.get(&self.specs, name).and_then(|v| v.final_value)
    }

    pub fn group_final(&self, kind: BehaviorKind, name: &str) -> Option<f64> {
        self.groups.get(&kind).and_then(|g| g.get(&self.specs, name)).and_then(|v| v.final_value)
    }
}

/// `%g`-style rendering with six significant digits.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| ABSENT.to_string(), format_value)
}

fn finals_text(specs: &[MetricSpec], scope: &ScopeReport) -> String {
    let cols: Vec<usize> = (0..specs.len()).filter(|&i| specs[i].kind.has_final()).collect();
    let header: Vec<&str> = cols.iter().map(|&i| specs[i].name.as_str()).collect();
    let values: Vec<String> = cols.iter().map(|&i| cell(scope.values[i].final_value)).collect();
    format!("{}\n{}\n", header.join("\t"), values.join("\t"))
}

fn steps_text(specs: &[MetricSpec], scope: &ScopeReport) -> String {
    let cols: Vec<usize> = (0..specs.len()).filter(|&i| specs[i].kind.has_series()).collect();
    let mut out = String::from("time");
    for &i in &cols {
        out.push('\t');
        out.push_str(&specs[i].name);
    }
    out.push('\n');
    for (k, t) in scope.times.iter().enumerate() {
        out.push_str(&format_value(*t));
        for &i in &cols {
            let v = scope.values[i].series.as_ref().and_then(|s| s.get(k).copied().flatten());
            let _ = write!(out, "\t{}", cell(v));
        }
        out.push('\n');
    }
    out
}

fn write_file(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the overall and per-group final and per-tick files into `dir`.
pub fn write_reports(report: &MetricReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = vec![
        write_file(dir.join("metrics.tsv"), &finals_text(&report.specs, &report.overall))?,
        write_file(dir.join("metrics_steps.tsv"), &steps_text(&report.specs, &report.overall))?,
    ];
    for (kind, scope) in &report.groups {
        written.push(write_file(dir.join(format!("metrics_{kind}.tsv")), &finals_text(&report.specs, scope))?);
        written.push(write_file(dir.join(format!("metrics_steps_{kind}.tsv")), &steps_text(&report.specs, scope))?);
    }
    Ok(written)
}
