use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One checked quantity of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub trial: usize,
    pub name: String,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub value: f64,
    /// The check passes iff `value <= bound` (or as noted by `pass`).
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub bound: f64,
    pub pass: bool,
}

impl Residual {
    pub fn at_most(trial: usize, name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            trial,
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }

    /// `|value| ≤ bound`.
    pub fn abs_at_most(trial: usize, name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            trial,
            name: name.into(),
            value,
            bound,
            pass: value.abs() <= bound,
        }
    }

    pub fn flag(trial: usize, name: impl Into<String>, pass: bool) -> Self {
        Self {
            trial,
            name: name.into(),
            value: if pass { 0.0 } else { 1.0 },
            bound: 0.0,
            pass,
        }
    }
}

/// Report of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    pub residuals: Vec<Residual>,
    pub pass: bool,
    pub runtime_ms: u64,
}

impl Report {
    pub fn new(check: &str, params: BTreeMap<String, serde_json::Value>, seed: Option<u64>, residuals: Vec<Residual>) -> Self {
        let pass = residuals.iter().all(|r| r.pass);
        Self {
            check: check.to_string(),
            params,
            seed,
            residuals,
            pass,
            runtime_ms: 0,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| !r.pass)
    }

    /// Largest `|value|` among residuals with the given name.
    pub fn max_abs(&self, name: &str) -> Option<f64> {
        self.residuals
            .iter()
            .filter(|r| r.name == name)
            .map(|r| r.value.abs())
            .reduce(f64::max)
    }

    pub fn count(&self, name: &str) -> usize {
        self.residuals.iter().filter(|r| r.name == name).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with `runtime_ms` zeroed, for reproducibility comparisons.
    pub fn to_json_without_timing(&self) -> String {
        Self {
            runtime_ms: 0,
            ..self.clone()
        }
        .to_json()
    }

    /// One row per residual: `check,seed,trial,name,value,bound,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,seed,trial,name,value,bound,pass\n");
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        for r in &self.residuals {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.check,
                seed,
                r.trial,
                r.name,
                fmt_f64(r.value),
                fmt_f64(r.bound),
                r.pass
            );
        }
        out
    }

    /// `check: N residuals, F failed` plus the worst failure, if any.
    pub fn summary(&self) -> String {
        let failed = self.failures().count();
        let mut s = format!(
            "{}: {} residuals, {} failed ({})",
            self.check,
            self.residuals.len(),
            failed,
            if self.pass { "PASS" } else { "FAIL" }
        );
        if let Some(r) = self.failures().next() {
            let _ = write!(s, "; first failure: trial {} {} = {} (bound {})", r.trial, r.name, fmt_f64(r.value), fmt_f64(r.bound));
        }
        s
    }
}

fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:e}")
    }
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else {
        s.serialize_str(&fmt_f64(*x))
    }
}

fn de_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(x) => Ok(x),
        Repr::Str(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(serde::de::Error::custom(format!("bad number {other:?}"))),
        },
    }
}
