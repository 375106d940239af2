//! Tabular output: one row per (pair, function, bound) in CSV or JSON.
//!
//! CSV numbers use 17 significant digits in scientific notation; infinities
//! and NaN are written as `inf`, `-inf` and `nan`. JSON uses the same field
//! names and the same spellings for non-finite values.

use std::io::Write;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bounds::{BoundReport, ChainCheck};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Formats a float with 17 significant digits, `inf`/`-inf`/`nan` otherwise.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn extended_real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&format_f64(*x))
    }
}

fn optional_real<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => extended_real(v, s),
        None => s.serialize_none(),
    }
}

/// One bound evaluated on one pair.
///
/// For chain rows (`bound_name` starting with `chain:`) `bound_value` is the
/// bound expected to be smaller and `divergence` the one expected to be larger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub dim: usize,
    pub seed: u64,
    pub pair_tag: String,
    pub f_name: String,
    #[serde(serialize_with = "optional_real")]
    pub q: Option<f64>,
    pub bound_name: String,
    #[serde(serialize_with = "extended_real")]
    pub bound_value: f64,
    #[serde(serialize_with = "extended_real")]
    pub divergence: f64,
    #[serde(serialize_with = "optional_real")]
    pub slack: Option<f64>,
    pub applicable: bool,
    #[serde(skip)]
    pub trial: u64,
}

pub const CSV_HEADER: [&str; 10] = [
    "dim",
    "seed",
    "pair_tag",
    "f_name",
    "q",
    "bound_name",
    "bound_value",
    "divergence",
    "slack",
    "applicable",
];

impl SweepRow {
    pub fn from_report(
        dim: usize,
        trial: u64,
        seed: u64,
        tag: &str,
        divergence: f64,
        r: &BoundReport,
    ) -> Self {
        Self {
            dim,
            seed,
            pair_tag: tag.to_string(),
            f_name: r.inputs.f_name.clone().unwrap_or_default(),
            q: r.inputs.q,
            bound_name: r.bound_name.clone(),
            bound_value: r.value,
            divergence,
            slack: r.slack,
            applicable: r.applicable,
            trial,
        }
    }

    pub fn from_chain(
        dim: usize,
        trial: u64,
        seed: u64,
        tag: &str,
        f_name: &str,
        q: Option<f64>,
        c: &ChainCheck,
    ) -> Self {
        Self {
            dim,
            seed,
            pair_tag: tag.to_string(),
            f_name: f_name.to_string(),
            q,
            bound_name: format!("chain:{}", c.name),
            bound_value: c.smaller_value,
            divergence: c.larger_value,
            slack: Some(c.slack),
            applicable: true,
            trial,
        }
    }

    pub fn is_violation(&self) -> bool {
        self.applicable
            && self.divergence.is_finite()
            && self
                .slack
                .is_some_and(|s| s.is_nan() || s < -crate::bounds::SLACK_TOL)
    }

    fn csv_record(&self) -> [String; 10] {
        [
            self.dim.to_string(),
            self.seed.to_string(),
            self.pair_tag.clone(),
            self.f_name.clone(),
            self.q.map(format_f64).unwrap_or_default(),
            self.bound_name.clone(),
            format_f64(self.bound_value),
            format_f64(self.divergence),
            self.slack.map(format_f64).unwrap_or_default(),
            self.applicable.to_string(),
        ]
    }
}

pub fn write_rows<W: Write>(rows: &[SweepRow], format: Format, out: W) -> Result<(), ReportError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in rows {
                w.write_record(r.csv_record())?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> SweepRow {
        SweepRow {
            dim: 2,
            seed: 7,
            pair_tag: "random".into(),
            f_name: "neg-log".into(),
            q: None,
            bound_name: "pinsker".into(),
            bound_value: 0.125,
            divergence: f64::INFINITY,
            slack: Some(f64::INFINITY),
            applicable: true,
            trial: 0,
        }
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(f64::INFINITY), "inf");
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_f64(f64::NAN), "nan");
        let x = 0.143841036225890;
        assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_and_json_share_fields() {
        let mut csv_out = Vec::new();
        write_rows(&[row()], Format::Csv, &mut csv_out).unwrap();
        let text = String::from_utf8(csv_out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "2,7,random,neg-log,,pinsker,1.2500000000000000e-1,inf,inf,true"
        );

        let mut json_out = Vec::new();
        write_rows(&[row()], Format::Json, &mut json_out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json_out).unwrap();
        let obj = v[0].as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        let mut expected = CSV_HEADER.to_vec();
        expected.sort_unstable();
        let mut keys_sorted = keys.clone();
        keys_sorted.sort_unstable();
        assert_eq!(keys_sorted, expected);
        assert_eq!(obj["divergence"], "inf");
    }
}
