//! New versus prior Umegaki upper bound on the mixed-vs-rank-two family.
//!
//! ρ = I/d and σ = (1/d)|1⟩⟨1| + (1−1/d)|2⟩⟨2|, so `‖ρ−σ‖₁ = 2 − 4/d`, the
//! new bound equals the trace distance and the prior bound is
//! `½‖ρ−σ‖₁ log(d−1)`. Which one wins depends on the logarithm base.

use serde::Serialize;

use crate::bounds::{ae11_upper, relative_entropy_upper, LogBase};
use crate::states::{remark42_pair, StateError};

/// Values closer than this (relative to their size) are a tie.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    New,
    Old,
    Tie,
}

impl Winner {
    /// The smaller upper bound wins.
    pub fn between(new: f64, old: f64) -> Self {
        let tol = TIE_TOL * new.abs().max(old.abs()).max(1.0);
        if (new - old).abs() <= tol {
            Winner::Tie
        } else if new < old {
            Winner::New
        } else {
            Winner::Old
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Winner::New => "new",
            Winner::Old => "old",
            Winner::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub d: usize,
    pub trace_dist: f64,
    pub new_bound: f64,
    pub ae11_natural: f64,
    pub ae11_base2: f64,
    pub winner_natural: Winner,
    pub winner_base2: Winner,
}

pub const COMPARISON_HEADER: [&str; 7] = [
    "d",
    "trace_dist",
    "new_bound",
    "ae11_natural",
    "ae11_base2",
    "winner_natural",
    "winner_base2",
];

impl ComparisonRow {
    pub fn csv_record(&self) -> [String; 7] {
        use crate::report::format_f64;
        [
            self.d.to_string(),
            format_f64(self.trace_dist),
            format_f64(self.new_bound),
            format_f64(self.ae11_natural),
            format_f64(self.ae11_base2),
            self.winner_natural.as_str().into(),
            self.winner_base2.as_str().into(),
        ]
    }
}

pub fn comparison_row(d: usize) -> Result<ComparisonRow, StateError> {
    let pair = remark42_pair(d)?;
    let s = pair.summary();
    let [tight, _] = relative_entropy_upper(s);
    let natural = ae11_upper(s, LogBase::E).value;
    let base2 = ae11_upper(s, LogBase::Two).value;
    Ok(ComparisonRow {
        d,
        trace_dist: s.trace_distance_1,
        new_bound: tight.value,
        ae11_natural: natural,
        ae11_base2: base2,
        winner_natural: Winner::between(tight.value, natural),
        winner_base2: Winner::between(tight.value, base2),
    })
}

pub fn comparison_table(dims: &[usize]) -> Result<Vec<ComparisonRow>, StateError> {
    dims.iter().map(|&d| comparison_row(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        for d in 3..=16 {
            let r = comparison_row(d).unwrap();
            let df = d as f64;
            let td = 2.0 - 4.0 / df;
            assert!((r.trace_dist - td).abs() < 1e-12);
            assert!((r.new_bound - td).abs() < 1e-12);
            assert!((r.ae11_natural - 0.5 * td * (df - 1.0).ln()).abs() < 1e-12);
            assert!((r.ae11_base2 - 0.5 * td * (df - 1.0).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn winners() {
        let r5 = comparison_row(5).unwrap();
        assert!((r5.new_bound - 1.2).abs() < 1e-12 && (r5.ae11_base2 - 1.2).abs() < 1e-12);
        assert!((r5.ae11_natural - 0.6 * 4f64.ln()).abs() < 1e-12);
        assert_eq!(r5.winner_base2, Winner::Tie);
        assert_eq!(r5.winner_natural, Winner::Old);
        let r10 = comparison_row(10).unwrap();
        assert!((r10.new_bound - 1.6).abs() < 1e-12);
        assert!((r10.ae11_base2 - 0.8 * 9f64.log2()).abs() < 1e-12);
        assert_eq!(r10.winner_base2, Winner::New);
        // Natural log needs d − 1 ≥ e², i.e. d ≥ 9, before the new bound wins.
        assert_eq!(comparison_row(8).unwrap().winner_natural, Winner::Old);
        assert_eq!(comparison_row(9).unwrap().winner_natural, Winner::New);
        assert_eq!(comparison_row(4).unwrap().winner_base2, Winner::Old);
        assert!(comparison_row(2).is_err());
    }
}
