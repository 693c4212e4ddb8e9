//! Text and JSON renderings of command results.
//!
//! Both formats carry the same numeric fields. Floats use Rust's shortest
//! round-trip representation, so output is reproducible bit for bit.

use std::fmt::Write;

use corrfix_core::{CheckReport, NormReport, RepairResult};
use serde_json::{Map, Value};

use crate::bench::{BenchSummary, Stat};

/// A flat list of named fields, rendered as `key: value` lines or a JSON object.
#[derive(Debug, Default, Clone)]
pub struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn num(self, key: &str, value: f64) -> Self {
        self.field(key, number(value))
    }

    pub fn nums(self, key: &str, values: &[f64]) -> Self {
        self.field(key, Value::Array(values.iter().map(|v| number(*v)).collect()))
    }

    pub fn norms(self, prefix: &str, n: &NormReport) -> Self {
        self.num(&format!("{prefix}frobenius"), n.frobenius)
            .num(&format!("{prefix}max"), n.max)
            .num(&format!("{prefix}scaled_max"), n.scaled_max)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.fields {
            let _ = writeln!(s, "{k}: {}", text_value(v));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.fields.iter().cloned().collect::<Map<_, _>>())
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
            s.push('\n');
            s
        } else {
            self.to_text()
        }
    }
}

/// Non-finite values have no JSON form; they become `null`.
fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn text_value(v: &Value) -> String {
    match v {
        Value::Array(xs) => xs.iter().map(text_value).collect::<Vec<_>>().join(", "),
        Value::String(s) => s.clone(),
        Value::Null => "inf".to_string(),
        other => other.to_string(),
    }
}

pub fn check_report(r: &CheckReport) -> Report {
    Report::new()
        .field("is_correlation", r.is_correlation)
        .field("is_symmetric", r.is_symmetric)
        .num("max_asymmetry", r.max_asymmetry)
        .field("unit_diagonal", r.unit_diagonal)
        .num("max_diagonal_deviation", r.max_diagonal_deviation)
        .num("min_eigenvalue", r.min_eigenvalue)
        .field("is_psd", r.is_psd)
        .field("offdiag_in_range", r.offdiag_in_range)
}

pub fn repair_report(r: &RepairResult) -> Report {
    Report::new()
        .field("method", r.method.as_str())
        .num("epsilon", r.epsilon)
        .field("clipped_count", r.clipped_count)
        .field("iterations", r.iterations)
        .nums("input_eigenvalues", &r.input_eigenvalues)
        .nums("shifts", &r.shifts)
        .num("repaired_min_eigenvalue", r.repaired.min_eigenvalue())
        .norms("distance_", &r.distance)
}

pub fn norm_report(n: &NormReport) -> Report {
    Report::new().norms("", n)
}

fn stat(report: Report, key: &str, s: &Stat) -> Report {
    report
        .num(&format!("{key}_mean"), s.mean)
        .num(&format!("{key}_max"), s.max)
}

pub fn bench_report(s: &BenchSummary) -> Report {
    let mut r = Report::new()
        .field("size", s.config.size)
        .field("trials", s.config.trials)
        .field("seed", s.config.seed)
        .num("noise", s.config.noise)
        .num("epsilon", s.config.epsilon);
    r = stat(r, "clip_frobenius_vs_perturbed", &s.clip_frobenius_vs_perturbed);
    r = stat(r, "apd_frobenius_vs_perturbed", &s.apd_frobenius_vs_perturbed);
    r = stat(r, "clip_max_vs_perturbed", &s.clip_max_vs_perturbed);
    r = stat(r, "apd_max_vs_perturbed", &s.apd_max_vs_perturbed);
    r = stat(r, "clip_frobenius_vs_original", &s.clip_frobenius_vs_original);
    r = stat(r, "apd_frobenius_vs_original", &s.apd_frobenius_vs_original);
    r = stat(r, "clip_max_vs_original", &s.clip_max_vs_original);
    r = stat(r, "apd_max_vs_original", &s.apd_max_vs_original);
    r.num("clip_apd_frobenius_ratio", s.clip_apd_frobenius_ratio)
}

/// One row per trial, for `bench --format text`.
pub fn bench_table(s: &BenchSummary) -> String {
    let mut out = String::from("trial  min_eig     clip_frob   apd_frob    clip_max    apd_max     apd_iter\n");
    for (k, t) in s.trials.iter().enumerate() {
        let _ = writeln!(
            out,
            "{k:<6} {:<11.4e} {:<11.4e} {:<11.4e} {:<11.4e} {:<11.4e} {}",
            t.min_eigenvalue,
            t.clip_vs_perturbed.frobenius,
            t.apd_vs_perturbed.frobenius,
            t.clip_vs_perturbed.max,
            t.apd_vs_perturbed.max,
            t.apd_iterations
        );
    }
    out
}
