//! Pass/fail certificates for the inequalities of the radial algebra, the
//! set-search estimators and the truncation operators.
//!
//! Every verifier returns a [`VerificationReport`]: a parameter block, the
//! checked inequality in words, and one [`CheckRow`] per tested instance.
//! Margins are oriented so that `margin ≥ 1` means the inequality holds;
//! verdicts themselves come from exact comparisons wherever the inputs are
//! rational.

mod algebra;
mod battery;
mod sets;
mod theorems;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::surd::{ratio_to_f64, Surd};

pub use algebra::{verify_majorization, verify_oracle};
pub use battery::{
    criterion, criterion_names, determinism_report, function_suite, random_radial, set_families, thm1_families, Scale,
    FAMILY_SEED, R22_BAND_FLOOR, SUITE_SEED, THM3_BAND_MAX_SPREAD, THM3_SEED,
};
pub use sets::{r22_sphere_band, verify_lemma1, verify_pk, verify_qn, verify_r22};
pub use theorems::{conjecture_scan, thm3_equivalence_report, thm4_lower_chain, thm5_exponent_fit, verify_thm1};
pub use theorems::{THM1_LOWER_DIVISOR, THM4_REL_TOL, THM5_MIN_POINTS, THM5_SLOPE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Informational,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Informational => "informational",
        })
    }
}

/// A reported quantity. Exact values serialize as `"p/q"` strings, reals
/// with 12 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Num {
    Exact(BigRational),
    Surd(Surd),
    Real(f64),
    Text(String),
}

impl Num {
    pub fn to_f64(&self) -> Option<f64> {
        match self {
            Num::Exact(r) => Some(ratio_to_f64(r)),
            Num::Surd(s) => Some(s.to_f64()),
            Num::Real(x) => Some(*x),
            Num::Text(_) => None,
        }
    }

    pub fn int(v: impl Into<num_bigint::BigInt>) -> Num {
        Num::Exact(BigRational::from_integer(v.into()))
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(r) => write!(f, "{r}"),
            Num::Surd(s) => write!(f, "{s}"),
            Num::Real(x) => f.write_str(&crate::report::format_real(*x)),
            Num::Text(t) => f.write_str(t),
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Num::Real(x) => match crate::report::round_sig(*x) {
                Some(v) => ser.serialize_f64(v),
                None => ser.serialize_str(&crate::report::format_real(*x)),
            },
            other => ser.serialize_str(&other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub id: String,
    pub params: BTreeMap<String, String>,
    pub lhs: Num,
    pub rhs: Num,
    /// `None` when the inequality is vacuous (a zero left side in a `≤`).
    #[serde(serialize_with = "serialize_margin")]
    pub margin: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub cases: u64,
}

fn serialize_margin<S: Serializer>(m: &Option<f64>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match m.and_then(crate::report::round_sig) {
        Some(v) => ser.serialize_f64(v),
        None => ser.serialize_none(),
    }
}

impl CheckRow {
    pub fn new(id: impl Into<String>, lhs: Num, rhs: Num, margin: Option<f64>, status: Status) -> Self {
        CheckRow {
            id: id.into(),
            params: BTreeMap::new(),
            lhs,
            rhs,
            margin,
            status,
            witness: None,
            cases: 1,
        }
    }

    /// Row for `lhs ≤ rhs` with an externally decided verdict.
    pub fn at_most(id: impl Into<String>, lhs: Num, rhs: Num, holds: bool) -> Self {
        let margin = ratio_margin(&rhs, &lhs);
        CheckRow::new(id, lhs, rhs, margin, verdict(holds))
    }

    /// Row for `lhs ≥ rhs` with an externally decided verdict.
    pub fn at_least(id: impl Into<String>, lhs: Num, rhs: Num, holds: bool) -> Self {
        let margin = ratio_margin(&lhs, &rhs);
        CheckRow::new(id, lhs, rhs, margin, verdict(holds))
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }

    pub fn with_cases(mut self, n: u64) -> Self {
        self.cases = n;
        self
    }

    pub fn informational(mut self) -> Self {
        self.status = Status::Informational;
        self
    }
}

pub(crate) fn verdict(holds: bool) -> Status {
    if holds {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// `num / den` as a margin; `None` when `den` is zero.
pub(crate) fn ratio_margin(num: &Num, den: &Num) -> Option<f64> {
    let d = den.to_f64()?;
    let n = num.to_f64()?;
    if d == 0.0 {
        None
    } else {
        Some(n / d)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub params: BTreeMap<String, String>,
    pub inequality: String,
    pub rows: Vec<CheckRow>,
    pub summary: BTreeMap<String, Num>,
    pub status: Status,
}

impl VerificationReport {
    pub fn new(theorem: impl Into<String>, inequality: impl Into<String>) -> Self {
        VerificationReport {
            theorem: theorem.into(),
            params: BTreeMap::new(),
            inequality: inequality.into(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            status: Status::Informational,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: Num) {
        self.summary.insert(key.to_string(), value);
    }

    /// Sets the overall status from the rows: any failure fails the report,
    /// otherwise any pass passes it.
    pub fn finish(mut self) -> Self {
        self.status = if self.rows.iter().any(|r| r.status == Status::Fail) {
            Status::Fail
        } else if self.rows.iter().any(|r| r.status == Status::Pass) {
            Status::Pass
        } else {
            Status::Informational
        };
        self
    }

    /// Marks the whole report as exploratory.
    pub fn informational(mut self) -> Self {
        for r in &mut self.rows {
            r.status = Status::Informational;
        }
        self.status = Status::Informational;
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}
