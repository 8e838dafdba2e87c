//! JSON and CSV forms of evaluation results.
//!
//! CSV floats carry 17 significant digits so every value round-trips to the
//! same bits; an infinite variance is written `inf` in CSV and `null` in JSON.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::fitness::SharpnessReport;
use crate::{Error, Result};

/// Formats `x` with 17 significant digits, or `inf` / `-inf` / `nan`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(field: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {field:?}")))
}

pub(crate) fn serialize_variance<S: Serializer>(v: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        serializer.serialize_f64(*v)
    } else {
        serializer.serialize_none()
    }
}

fn deserialize_variance<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(deserializer)?.unwrap_or(f64::INFINITY))
}

/// A sharpness report tagged with its photon number and loss rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub n: usize,
    pub eta: f64,
    pub sharpness: f64,
    #[serde(serialize_with = "serialize_variance", deserialize_with = "deserialize_variance")]
    pub holevo_variance: f64,
}

impl EvaluationRow {
    pub const CSV_HEADER: &'static str = "n,eta,sharpness,holevo_variance";

    pub fn new(n: usize, eta: f64, report: SharpnessReport) -> Self {
        EvaluationRow { n, eta, sharpness: report.sharpness, holevo_variance: report.holevo_variance }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.n,
            format_float(self.eta),
            format_float(self.sharpness),
            format_float(self.holevo_variance)
        )
    }
}

/// Writes rows as CSV text with a header line.
pub fn rows_to_csv(rows: &[EvaluationRow]) -> String {
    let mut out = String::from(EvaluationRow::CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<EvaluationRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if headers != EvaluationRow::CSV_HEADER {
        return Err(Error::Parse(format!(
            "expected header {:?}, got {headers:?}",
            EvaluationRow::CSV_HEADER
        )));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != 4 {
            return Err(Error::Parse(format!("expected 4 fields, got {}", record.len())));
        }
        rows.push(EvaluationRow {
            n: record[0].trim().parse().map_err(|_| Error::Parse(format!("bad n {:?}", &record[0])))?,
            eta: parse_float(&record[1])?,
            sharpness: parse_float(&record[2])?,
            holevo_variance: parse_float(&record[3])?,
        });
    }
    Ok(rows)
}
