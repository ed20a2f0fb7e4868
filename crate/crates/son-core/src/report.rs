//! Structured verification records shared by the checks and the CLI.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Datum {
    Bool(bool),
    Int(i64),
    Real(f64),
    Complex { re: f64, im: f64 },
    Text(String),
    Reals(Vec<f64>),
    Ints(Vec<i64>),
    /// `(value, multiplicity)` pairs.
    Spectrum(Vec<(f64, usize)>),
}

impl Datum {
    /// Non-finite reals become text so that every report survives JSON.
    pub fn real(x: f64) -> Self {
        if x.is_finite() {
            Datum::Real(x)
        } else {
            Datum::Text(format!("{x}"))
        }
    }

    pub fn complex(z: C64) -> Self {
        Datum::Complex { re: z.re, im: z.im }
    }

    pub fn int(x: usize) -> Self {
        Datum::Int(x as i64)
    }

    pub fn text(s: &str) -> Self {
        Datum::Text(s.to_string())
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Datum::Real(x) => Some(*x),
            Datum::Int(k) => Some(*k as f64),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub claim: String,
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub inputs: BTreeMap<String, Datum>,
    pub values: BTreeMap<String, Datum>,
    pub tolerance: Option<f64>,
    pub status: Status,
    pub detail: String,
}

impl VerificationReport {
    pub fn new(check: &str, claim: &str) -> Self {
        Self {
            check: check.to_string(),
            claim: claim.to_string(),
            n: None,
            l: None,
            inputs: BTreeMap::new(),
            values: BTreeMap::new(),
            tolerance: None,
            status: Status::Fail,
            detail: String::new(),
        }
    }

    pub fn shape(mut self, n: usize, l: Option<usize>) -> Self {
        self.n = Some(n);
        self.l = l;
        self
    }

    pub fn tol(mut self, t: f64) -> Self {
        self.tolerance = Some(t);
        self
    }

    pub fn input(mut self, key: &str, d: Datum) -> Self {
        self.inputs.insert(key.to_string(), d);
        self
    }

    pub fn value(&mut self, key: &str, d: Datum) {
        self.values.insert(key.to_string(), d);
    }

    pub fn verdict(&mut self, ok: bool, detail: impl Into<String>) {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self.detail = detail.into();
    }

    pub fn skipped(mut self, reason: &str) -> Self {
        self.status = Status::Skip;
        self.detail = reason.to_string();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}
