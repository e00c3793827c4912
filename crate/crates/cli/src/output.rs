use std::collections::BTreeMap;

use fgw_core::operators::{EstimateReport, SetFamily};
use fgw_core::report::{format_real, round_sig};
use fgw_core::Result;
use serde::{Serialize, Serializer};

use crate::Format;

/// Non-report outputs that also have a flat CSV form.
pub trait Table: Serialize {
    const HEADER: &'static [&'static str];
    fn rows(&self) -> Vec<Vec<String>>;
}

pub fn render<T: Table>(format: Format, items: &[T]) -> Result<String> {
    match format {
        Format::Json => fgw_core::report::to_json(items),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let wrap = |e: csv::Error| fgw_core::Error::Domain(e.to_string());
            w.write_record(T::HEADER).map_err(wrap)?;
            for item in items {
                for row in item.rows() {
                    w.write_record(row).map_err(wrap)?;
                }
            }
            let bytes = w.into_inner().map_err(|e| fgw_core::Error::Domain(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| fgw_core::Error::Domain(e.to_string()))
        }
    }
}

fn real<S: Serializer>(x: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match round_sig(*x) {
        Some(v) => ser.serialize_f64(v),
        None => ser.serialize_str(&format_real(*x)),
    }
}

#[derive(Debug, Serialize)]
pub struct ConvolveOut {
    pub k: u32,
    pub f: String,
    pub g: String,
    /// Coefficient of `χ_l` in the product, keyed by `l`; zeros omitted.
    pub product: BTreeMap<usize, String>,
    pub mass_conserved: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_match: Option<bool>,
}

impl Table for ConvolveOut {
    const HEADER: &'static [&'static str] = &["k", "f", "g", "l", "coefficient", "mass_conserved", "oracle_match"];

    fn rows(&self) -> Vec<Vec<String>> {
        self.product
            .iter()
            .map(|(l, c)| {
                vec![
                    self.k.to_string(),
                    self.f.clone(),
                    self.g.clone(),
                    l.to_string(),
                    c.clone(),
                    self.mass_conserved.to_string(),
                    self.oracle_match.map(|b| b.to_string()).unwrap_or_default(),
                ]
            })
            .collect()
    }
}

#[derive(Debug, Serialize)]
pub struct NormsOut {
    pub k: u32,
    pub f: String,
    #[serde(serialize_with = "real")]
    pub p: f64,
    #[serde(serialize_with = "real")]
    pub s: f64,
    #[serde(serialize_with = "real")]
    pub norm: f64,
    #[serde(serialize_with = "real")]
    pub weak_norm: f64,
    pub support: String,
}

impl Table for NormsOut {
    const HEADER: &'static [&'static str] = &["k", "f", "p", "s", "norm", "weak_norm", "support"];

    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.k.to_string(),
            self.f.clone(),
            format_real(self.p),
            format_real(self.s),
            format_real(self.norm),
            format_real(self.weak_norm),
            self.support.clone(),
        ]]
    }
}

#[derive(Debug, Serialize)]
pub struct SearchOut {
    pub k: u32,
    pub f: String,
    pub estimator: String,
    #[serde(serialize_with = "real")]
    pub estimate: f64,
    #[serde(rename = "E")]
    pub argmax: String,
    #[serde(rename = "E_size")]
    pub argmax_size: String,
    pub j: String,
    pub family: SetFamily,
    pub evaluated: usize,
}

impl SearchOut {
    pub fn new(k: u32, f: String, est: EstimateReport) -> Self {
        SearchOut {
            k,
            f,
            estimator: est.estimator,
            estimate: est.estimate,
            argmax: est.argmax,
            argmax_size: est.argmax_size,
            j: est.j,
            family: est.family,
            evaluated: est.evaluated,
        }
    }
}

impl Table for SearchOut {
    const HEADER: &'static [&'static str] = &[
        "k",
        "f",
        "estimator",
        "estimate",
        "E",
        "E_size",
        "j",
        "family",
        "radius",
        "budget",
        "seed",
        "evaluated",
    ];

    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.k.to_string(),
            self.f.clone(),
            self.estimator.clone(),
            format_real(self.estimate),
            self.argmax.clone(),
            self.argmax_size.clone(),
            self.j.clone(),
            self.family.kind.to_string(),
            self.family.radius.to_string(),
            self.family.budget.to_string(),
            self.family.seed.to_string(),
            self.evaluated.to_string(),
        ]]
    }
}
