//! Verdict records, tables and deterministic file output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::lindblad::fmt_sig;
use crate::policy::NumericPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

/// One criterion of a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: Option<f64>,
    pub relation: &'static str,
    pub threshold: Option<f64>,
    /// Reported but not part of the verdict.
    pub informational: bool,
}

impl Check {
    fn cmp(name: &str, measured: f64, relation: &'static str, threshold: f64, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            passed: passed && measured.is_finite(),
            measured: Some(measured),
            relation,
            threshold: Some(threshold),
            informational: false,
        }
    }

    pub fn le(name: &str, measured: f64, threshold: f64) -> Self {
        Self::cmp(name, measured, "<=", threshold, measured <= threshold)
    }

    pub fn ge(name: &str, measured: f64, threshold: f64) -> Self {
        Self::cmp(name, measured, ">=", threshold, measured >= threshold)
    }

    pub fn gt(name: &str, measured: f64, threshold: f64) -> Self {
        Self::cmp(name, measured, ">", threshold, measured > threshold)
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        Self { name: name.to_string(), passed, measured: None, relation: "holds", threshold: None, informational: false }
    }

    pub fn eq_count(name: &str, measured: usize, expected: usize) -> Self {
        Self::cmp(name, measured as f64, "==", expected as f64, measured == expected)
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub scenario: String,
    pub verdict: Status,
    pub seed: u64,
    pub config_hash: String,
    pub policy: NumericPolicy,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
}

impl Verdict {
    pub fn new(config: &ScenarioConfig) -> Self {
        Self {
            scenario: config.id().to_string(),
            verdict: Status::Pass,
            seed: config.seed(),
            config_hash: config.hash(),
            policy: NumericPolicy::STANDARD,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn check(&mut self, check: Check) {
        if !check.passed && !check.informational {
            self.verdict = Status::Fail;
        }
        self.checks.push(check);
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        self.metrics.insert(key.to_string(), serde_json::to_value(value).expect("metric serializes"));
    }

    pub fn passed(&self) -> bool {
        self.verdict == Status::Pass
    }

    /// Pretty JSON with every float rounded to the policy's significant digits.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("verdict serializes");
        round_floats(&mut v, self.policy.output_significant_digits);
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }
}

/// Rounds every non-integer JSON number to `digits` significant digits.
pub fn round_floats(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = fmt_sig(x, digits).parse().expect("formatted float parses");
            *v = serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null);
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_floats(x, digits)),
        Value::Object(map) => map.values_mut().for_each(|x| round_floats(x, digits)),
        _ => {}
    }
}

/// A CSV table destined for `<out>/<file_name>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub csv: String,
}

impl Table {
    /// Builds a CSV table from a header and rows of numbers.
    pub fn numeric(file_name: &str, header: &[&str], rows: &[Vec<f64>], digits: usize) -> Self {
        let mut csv = header.join(",");
        csv.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_sig(x, digits)).collect();
            csv.push_str(&cells.join(","));
            csv.push('\n');
        }
        Self { file_name: file_name.to_string(), csv }
    }

    pub fn raw(file_name: &str, csv: String) -> Self {
        Self { file_name: file_name.to_string(), csv }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub verdict: Verdict,
    pub tables: Vec<Table>,
}

impl ScenarioOutput {
    /// Writes `verdict.json` and every table into `dir`, returning the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
        let mut written = vec![write_atomic(&dir.join("verdict.json"), self.verdict.to_json().as_bytes())?];
        for t in &self.tables {
            written.push(write_atomic(&dir.join(&t.file_name), t.csv.as_bytes())?);
        }
        Ok(written)
    }
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let file_name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)?;
    Ok(path.to_path_buf())
}
