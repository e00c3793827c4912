//! Report emission: JSON (a top-level array of report objects) and CSV (one
//! row per checked instance, header included).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::verify::VerificationReport;

/// Significant digits kept for reals in every report.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits; `None` when not
/// finite.
pub fn round_sig(x: f64) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(0.0);
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().ok()
}

pub fn format_real(x: f64) -> String {
    match round_sig(x) {
        Some(v) if v != 0.0 && !(1e-6..1e15).contains(&v.abs()) => format!("{v:e}"),
        Some(v) => v.to_string(),
        None if x.is_nan() => "nan".into(),
        None if x > 0.0 => "inf".into(),
        None => "-inf".into(),
    }
}

/// Serializes items as a pretty-printed top-level JSON array.
pub fn to_json<T: Serialize>(items: &[T]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(items).map_err(|e| Error::domain(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub const CSV_HEADER: [&str; 9] = [
    "theorem", "id", "params", "lhs", "rhs", "margin", "status", "witness", "cases",
];

/// One CSV row per check row, header first.
pub fn to_csv(reports: &[VerificationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::domain(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for rep in reports {
        for row in &rep.rows {
            let params: Vec<String> = rep
                .params
                .iter()
                .chain(row.params.iter())
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            w.write_record([
                rep.theorem.clone(),
                row.id.clone(),
                params.join(";"),
                row.lhs.to_string(),
                row.rhs.to_string(),
                row.margin.map(format_real).unwrap_or_default(),
                row.status.to_string(),
                row.witness.clone().unwrap_or_default(),
                row.cases.to_string(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::domain(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::domain(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{CheckRow, Num, Status};

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(5f64.sqrt()), Some(2.2360679775));
        assert_eq!(round_sig(1.0 / 3.0), Some(0.333333333333));
        assert_eq!(round_sig(f64::INFINITY), None);
        assert_eq!(format_real(f64::MAX * 2.0), "inf");
        assert_eq!(format_real(123456789012345.0), "123456789012000");
        assert_eq!(format_real(1.5e301), "1.5e301");
        assert_eq!(format_real(-2.5e-9), "-2.5e-9");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut r = VerificationReport::new("demo", "a <= b").param("k", 2);
        r.push(CheckRow::at_most("x", Num::int(8), Num::int(10), true).with_witness("{1 a}"));
        let r = r.finish();
        assert_eq!(r.status, Status::Pass);
        let csv = to_csv(std::slice::from_ref(&r)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "theorem,id,params,lhs,rhs,margin,status,witness,cases");
        assert_eq!(lines[1], "demo,x,k=2,8,10,1.25,pass,{1 a},1");
        let json = to_json(&[r]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v.is_array());
        assert_eq!(v[0]["rows"][0]["lhs"], "8");
        assert_eq!(v[0]["rows"][0]["margin"], 1.25);
    }
}
