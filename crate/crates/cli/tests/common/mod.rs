//! Helpers shared by the CLI test targets: reference implementations that
//! do not call into the library, and synthetic data files.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use doublesel::numerics::RngStream;
use doublesel::simulation::{DesignSampler, DesignSpec};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_doublesel"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// Standard normal CDF from the everywhere-positive series
/// `1/2 + phi(x) * sum x^(2k+1) / (1*3*...*(2k+1))`.
pub fn normal_cdf_series(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - normal_cdf_series(-x);
    }
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    while term > sum * 1e-18 {
        term *= x * x / (2.0 * k + 1.0);
        sum += term;
        k += 1.0;
    }
    0.5 + sum * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`normal_cdf_series`] by bisection.
pub fn normal_quantile_bisection(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf_series(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided Kolmogorov-Smirnov distance to N(0, 1).
pub fn ks_reference(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[i] {
            j += 1;
        }
        let f = normal_cdf_series(s[i]);
        worst = worst.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    worst
}

/// Writes replication `rep` of `spec` as `y,d,x1..xp`.
pub fn write_design_csv(path: &Path, spec: &DesignSpec, rep: u64) {
    let sampler = DesignSampler::new(spec).unwrap();
    let draw = sampler.draw(&mut RngStream::new(spec.seed, rep));
    let mut text = String::from("y,d");
    for j in 1..=spec.p {
        let _ = write!(text, ",x{j}");
    }
    text.push('\n');
    for i in 0..spec.n {
        let _ = write!(text, "{},{}", draw.y[i], draw.d[i]);
        for v in draw.x.row(i).iter() {
            let _ = write!(text, ",{v}");
        }
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

pub fn load_validator(file: &str) -> jsonschema::Validator {
    let text = fs::read_to_string(schema_dir().join(file)).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

/// Validation errors of `path` against the schema file, joined.
pub fn schema_errors(validator: &jsonschema::Validator, path: &Path) -> Vec<String> {
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    validator.iter_errors(&value).map(|e| format!("{}: {e}", e.instance_path)).collect()
}
