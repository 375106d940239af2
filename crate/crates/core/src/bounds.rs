//! Lower and upper continuity bounds in terms of the trace norm `‖ρ−σ‖₁`.
//!
//! Every evaluator takes the spectral summary of a pair and returns a
//! [`BoundReport`]. Reports whose hypotheses fail carry `applicable = false`,
//! a reason, and a NaN value. [`sandwich`] evaluates a divergence together
//! with all bounds that apply to it and fills in the slacks.
//!
//! Slack is oriented so that a non-negative slack means the inequality holds:
//! `bound − S` for upper bounds, `S − bound` for lower bounds.
//!
//! Divided differences `(g(x) − g(y))/(x − y)` switch to their analytic limit
//! when `|x − y| < GAP_THRESHOLD`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::divergence::{direct, quasi_entropy_spectral, DivergenceError, DivergenceResult};
use crate::omd::{OmdFunction, OmdKind};
use crate::states::{ScalarSummary, StatePair};

pub const GAP_THRESHOLD: f64 = 1e-8;
/// A slack below `-SLACK_TOL` counts as a violation.
pub const SLACK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "e")]
    E,
    #[serde(rename = "2")]
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::E => "e",
            LogBase::Two => "2",
        })
    }
}

impl FromStr for LogBase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" | "ln" | "natural" => Ok(LogBase::E),
            "2" | "log2" => Ok(LogBase::Two),
            other => Err(format!("unknown log base '{other}' (expected 'e' or '2')")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundInputs {
    pub summary: ScalarSummary,
    pub f_name: Option<String>,
    pub q: Option<f64>,
    pub log_base: Option<LogBase>,
}

impl BoundInputs {
    fn new(summary: &ScalarSummary) -> Self {
        Self {
            summary: *summary,
            f_name: None,
            q: None,
            log_base: None,
        }
    }

    fn with_f(mut self, f: &OmdFunction) -> Self {
        self.f_name = Some(f.name().to_string());
        self
    }

    fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self.f_name = Some(format!("tsallis:q={q}"));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub kind: BoundKind,
    /// NaN when not applicable.
    pub value: f64,
    pub inputs: BoundInputs,
    pub applicable: bool,
    pub reason: Option<String>,
    pub note: Option<String>,
    /// Set once compared against a divergence; non-negative means the bound holds.
    pub slack: Option<f64>,
    /// The divergence is `+∞`, so the comparison carries no information.
    pub vacuous: bool,
}

impl BoundReport {
    fn new(name: &str, kind: BoundKind, value: f64, inputs: BoundInputs) -> Self {
        Self {
            bound_name: name.to_string(),
            kind,
            value,
            inputs,
            applicable: true,
            reason: None,
            note: None,
            slack: None,
            vacuous: false,
        }
    }

    fn upper(name: &str, value: f64, inputs: BoundInputs) -> Self {
        Self::new(name, BoundKind::Upper, value, inputs)
    }

    fn inapplicable(
        name: &str,
        kind: BoundKind,
        inputs: BoundInputs,
        reason: impl Into<String>,
    ) -> Self {
        let mut r = Self::new(name, kind, f64::NAN, inputs);
        r.applicable = false;
        r.reason = Some(reason.into());
        r
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Fills in the slack against `divergence`.
    pub fn compare(mut self, divergence: f64) -> Self {
        if !self.applicable {
            return self;
        }
        self.vacuous = divergence.is_infinite();
        self.slack = Some(match self.kind {
            BoundKind::Upper => self.value - divergence,
            BoundKind::Lower => divergence - self.value,
        });
        self
    }

    pub fn is_violation(&self) -> bool {
        self.applicable && !self.vacuous && self.slack.is_some_and(|s| s.is_nan() || s < -SLACK_TOL)
    }
}

/// Ordering between two bound values, e.g. a tight form and its relaxation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub name: String,
    pub smaller: String,
    pub larger: String,
    pub smaller_value: f64,
    pub larger_value: f64,
    pub slack: f64,
}

impl ChainCheck {
    pub fn between(name: &str, smaller: &BoundReport, larger: &BoundReport) -> Option<Self> {
        if !smaller.applicable || !larger.applicable {
            return None;
        }
        Some(Self {
            name: name.to_string(),
            smaller: smaller.bound_name.clone(),
            larger: larger.bound_name.clone(),
            smaller_value: smaller.value,
            larger_value: larger.value,
            slack: larger.value - smaller.value,
        })
    }

    pub fn is_violation(&self) -> bool {
        self.slack.is_nan() || self.slack < -SLACK_TOL
    }
}

// ---------------------------------------------------------------------------
// Divided differences

/// `(ln x − ln y)/(x − y)` without the guard.
pub fn log_divided_difference_formula(x: f64, y: f64) -> f64 {
    (x.ln() - y.ln()) / (x - y)
}

/// Limit of the log divided difference: `1/c` at the midpoint `c`.
pub fn log_divided_difference_limit(x: f64, y: f64) -> f64 {
    2.0 / (x + y)
}

pub fn log_divided_difference(x: f64, y: f64) -> f64 {
    if (x - y).abs() < GAP_THRESHOLD {
        log_divided_difference_limit(x, y)
    } else {
        log_divided_difference_formula(x, y)
    }
}

/// `(x^{1−q} − y^{1−q})/(x − y)` without the guard.
pub fn power_divided_difference_formula(x: f64, y: f64, q: f64) -> f64 {
    (x.powf(1.0 - q) - y.powf(1.0 - q)) / (x - y)
}

/// Limit of the power divided difference: `(1−q) c^{−q}` at the midpoint `c`.
pub fn power_divided_difference_limit(x: f64, y: f64, q: f64) -> f64 {
    (1.0 - q) * (0.5 * (x + y)).powf(-q)
}

pub fn power_divided_difference(x: f64, y: f64, q: f64) -> f64 {
    if (x - y).abs() < GAP_THRESHOLD {
        power_divided_difference_limit(x, y, q)
    } else {
        power_divided_difference_formula(x, y, q)
    }
}

/// `λ/(λ−α) f(α/λ)` without the guard.
pub fn bracket_formula(f: &OmdFunction, lambda: f64, alpha: f64) -> f64 {
    lambda / (lambda - alpha) * f.eval(alpha / lambda)
}

/// Limit of `λ/(λ−α) f(α/λ)` as `α → λ`: `−f′(1)`.
pub fn bracket_limit(f: &OmdFunction) -> f64 {
    -f.d1_at_1()
}

pub fn bracket(f: &OmdFunction, lambda: f64, alpha: f64) -> f64 {
    if (lambda - alpha).abs() < GAP_THRESHOLD {
        bracket_limit(f)
    } else {
        bracket_formula(f, lambda, alpha)
    }
}

// ---------------------------------------------------------------------------
// Evaluators

const NEEDS_POSITIVE: &str = "requires strictly positive states";

fn strictly_positive(s: &ScalarSummary) -> bool {
    s.both_strictly_positive()
}

/// `f″(1)/2 · ‖ρ−σ‖₁²`.
pub fn pinsker_lower(s: &ScalarSummary, f: &OmdFunction) -> BoundReport {
    let value = 0.5 * f.d2_at_1() * s.trace_distance_1 * s.trace_distance_1;
    BoundReport::new(
        "pinsker",
        BoundKind::Lower,
        value,
        BoundInputs::new(s).with_f(f),
    )
}

fn qubit_classical_value(s: &ScalarSummary, f: &OmdFunction) -> (f64, Option<String>) {
    let lam = s.lambda_rho;
    let alpha = s.alpha_sigma;
    let value = s.trace_distance_1 * (bracket(f, lam, alpha) - f.a());
    let note = (f.a() != 0.0 && (lam - alpha).abs() >= GAP_THRESHOLD).then(|| {
        let x = alpha / lam;
        let proof_form = s.trace_distance_1 * lam / (lam - alpha) * (f.eval(x) - f.a() * (1.0 - x));
        format!("bracket with a(1 - alpha/lambda) inside: {proof_form:e}")
    });
    (value, note)
}

/// `‖ρ−σ‖₁ [λ_ρ/(λ_ρ−α_σ) f(α_σ/λ_ρ) − a]` for qubits or commuting pairs.
pub fn qubit_classical_upper(s: &ScalarSummary, f: &OmdFunction) -> BoundReport {
    let name = "qubit-classical";
    let inputs = BoundInputs::new(s).with_f(f);
    if !(s.is_qubit() || s.is_commuting()) {
        return BoundReport::inapplicable(
            name,
            BoundKind::Upper,
            inputs,
            "requires qubit or commuting pair",
        );
    }
    if !strictly_positive(s) {
        return BoundReport::inapplicable(name, BoundKind::Upper, inputs, NEEDS_POSITIVE);
    }
    let (value, note) = qubit_classical_value(s, f);
    let r = BoundReport::upper(name, value, inputs);
    match note {
        Some(n) => r.with_note(n),
        None => r,
    }
}

/// The qubit/commuting bound multiplied by `√d`, for any pair.
pub fn general_sqrt_d_upper(s: &ScalarSummary, f: &OmdFunction) -> BoundReport {
    let name = "sqrt-d";
    let inputs = BoundInputs::new(s).with_f(f);
    if !strictly_positive(s) {
        return BoundReport::inapplicable(name, BoundKind::Upper, inputs, NEEDS_POSITIVE);
    }
    let (value, _) = qubit_classical_value(s, f);
    BoundReport::upper(name, (s.dim as f64).sqrt() * value, inputs)
}

/// Umegaki bound `‖ρ−σ‖₁ λ_ρ (ln α_ρ − ln α_σ)/(α_ρ − α_σ)` and its
/// relaxation `‖ρ−σ‖₁ λ_ρ/α`. Uses minimal non-zero eigenvalues, so it
/// evaluates for rank-deficient states too.
pub fn relative_entropy_upper(s: &ScalarSummary) -> [BoundReport; 2] {
    let inputs = BoundInputs {
        f_name: Some("neg-log".into()),
        ..BoundInputs::new(s)
    };
    let tight =
        s.trace_distance_1 * s.lambda_rho * log_divided_difference(s.alpha_rho, s.alpha_sigma);
    let loose = s.trace_distance_1 * s.lambda_rho / s.alpha;
    [
        BoundReport::upper("relative-entropy-tight", tight, inputs.clone()),
        BoundReport::upper("relative-entropy-loose", loose, inputs),
    ]
}

/// Earlier Umegaki bound `(α_σ+T) log(1+T/α_σ) − α_ρ log(1+T/α_ρ)`, `T = ‖ρ−σ‖₁/2`.
pub fn ae11_upper(s: &ScalarSummary, base: LogBase) -> BoundReport {
    let t = s.t;
    let value = (s.alpha_sigma + t) * base.log(1.0 + t / s.alpha_sigma)
        - s.alpha_rho * base.log(1.0 + t / s.alpha_rho);
    let name = match base {
        LogBase::E => "prior-relative-entropy",
        LogBase::Two => "prior-relative-entropy-base2",
    };
    let inputs = BoundInputs {
        f_name: Some("neg-log".into()),
        log_base: Some(base),
        ..BoundInputs::new(s)
    };
    BoundReport::upper(name, value, inputs)
}

/// Qubit Umegaki bound `‖ρ−σ‖₁ λ_ρ (ln λ_ρ − ln α_σ)/(λ_ρ − α_σ)` and `‖ρ−σ‖₁ λ_ρ/α_σ`.
pub fn qubit_relative_upper(s: &ScalarSummary) -> [BoundReport; 2] {
    let inputs = BoundInputs {
        f_name: Some("neg-log".into()),
        ..BoundInputs::new(s)
    };
    let names = ["qubit-relative-tight", "qubit-relative-loose"];
    if !s.is_qubit() || !strictly_positive(s) {
        let reason = if s.is_qubit() {
            NEEDS_POSITIVE
        } else {
            "requires a qubit pair"
        };
        return names
            .map(|n| BoundReport::inapplicable(n, BoundKind::Upper, inputs.clone(), reason));
    }
    let tight =
        s.trace_distance_1 * s.lambda_rho * log_divided_difference(s.lambda_rho, s.alpha_sigma);
    let loose = s.trace_distance_1 * s.lambda_rho / s.alpha_sigma;
    [
        BoundReport::upper(names[0], tight, inputs.clone()),
        BoundReport::upper(names[1], loose, inputs),
    ]
}

/// Smallest integer strictly larger than `q`.
fn next_integer_above(q: f64) -> f64 {
    q.floor() + 1.0
}

/// All Tsallis bounds, applicable or not, for parameter `q`.
pub fn tsallis_bounds(s: &ScalarSummary, q: f64) -> Vec<BoundReport> {
    let inputs = BoundInputs::new(s).with_q(q);
    let up = |name: &str, v: f64| BoundReport::upper(name, v, inputs.clone());
    let na = |name: &str, reason: &str| {
        BoundReport::inapplicable(name, BoundKind::Upper, inputs.clone(), reason)
    };
    let td = s.trace_distance_1;
    let lam = s.lambda_rho;
    let positive = strictly_positive(s);
    let mut out = Vec::new();

    // q > 1
    let above_names = [
        "prior-tsallis-ceil",
        "prior-tsallis-above1",
        "tsallis-above1",
    ];
    if !(q > 1.0) {
        out.extend(above_names.map(|n| na(n, "requires q > 1")));
    } else if !positive {
        out.extend(above_names.map(|n| na(n, NEEDS_POSITIVE)));
    } else {
        let joint = s.lambda_rho.max(s.lambda_sigma);
        let r = q - 1.0;
        out.push(up(
            above_names[0],
            (next_integer_above(q) - 1.0) / r * (joint / s.alpha_sigma).powf(r) * td,
        ));
        if q <= 2.0 {
            let base = (lam / s.alpha).powf(q) * td;
            out.push(up(above_names[1], base / r));
            out.push(up(above_names[2], base));
        } else {
            out.push(na(above_names[1], "requires 1 < q <= 2"));
            out.push(na(above_names[2], "requires 1 < q <= 2"));
        }
    }

    // 0 < q < 1
    let below_names = [
        "prior-tsallis-below1",
        "tsallis-below1-tight",
        "tsallis-below1-loose",
    ];
    if !(q > 0.0 && q < 1.0) {
        out.extend(below_names.map(|n| na(n, "requires 0 < q < 1")));
    } else if !positive {
        out.extend(below_names.map(|n| na(n, NEEDS_POSITIVE)));
    } else {
        let lq = lam.powf(q);
        out.push(up(
            below_names[0],
            lq / s.alpha_sigma.powf(q) * td / (1.0 - q),
        ));
        out.push(up(
            below_names[1],
            td * lq * power_divided_difference(s.alpha_rho, s.alpha_sigma, q) / (1.0 - q),
        ));
        out.push(up(below_names[2], td * lq / s.alpha.powf(q)));
    }

    // qubits, 0 < q < 2
    let qubit_names = ["qubit-tsallis-tight", "qubit-tsallis-loose"];
    if !(q > 0.0 && q < 2.0 && q != 1.0) {
        out.extend(qubit_names.map(|n| na(n, "requires q in (0, 2), q != 1")));
    } else if !s.is_qubit() {
        out.extend(qubit_names.map(|n| na(n, "requires a qubit pair")));
    } else if !positive {
        out.extend(qubit_names.map(|n| na(n, NEEDS_POSITIVE)));
    } else {
        let lq = lam.powf(q);
        out.push(up(
            qubit_names[0],
            td * lq * power_divided_difference(lam, s.alpha_sigma, q) / (1.0 - q),
        ));
        out.push(up(qubit_names[1], td * lq / s.alpha_sigma.powf(q)));
    }
    out
}

/// Bound orderings among the reports of one pair.
pub fn chain_checks(reports: &[BoundReport]) -> Vec<ChainCheck> {
    let find = |n: &str| reports.iter().find(|r| r.bound_name == n);
    let pairs = [
        (
            "relative-entropy-tight<=loose",
            "relative-entropy-tight",
            "relative-entropy-loose",
        ),
        (
            "qubit-relative-tight<=loose",
            "qubit-relative-tight",
            "qubit-relative-loose",
        ),
        (
            "tsallis-above1-improved<=prior",
            "tsallis-above1",
            "prior-tsallis-above1",
        ),
        (
            "tsallis-below1-tight<=loose",
            "tsallis-below1-tight",
            "tsallis-below1-loose",
        ),
        (
            "tsallis-below1-tight<=prior",
            "tsallis-below1-tight",
            "prior-tsallis-below1",
        ),
        (
            "qubit-tsallis-tight<=loose",
            "qubit-tsallis-tight",
            "qubit-tsallis-loose",
        ),
    ];
    pairs
        .iter()
        .filter_map(|(name, a, b)| ChainCheck::between(name, find(a)?, find(b)?))
        .collect()
}

/// Divergence together with every bound that applies to `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub divergence: DivergenceResult,
    pub reports: Vec<BoundReport>,
    pub chains: Vec<ChainCheck>,
}

impl SandwichReport {
    pub fn violations(&self) -> impl Iterator<Item = &BoundReport> {
        self.reports.iter().filter(|r| r.is_violation())
    }

    pub fn chain_violations(&self) -> impl Iterator<Item = &ChainCheck> {
        self.chains.iter().filter(|c| c.is_violation())
    }

    pub fn is_clean(&self) -> bool {
        self.violations().next().is_none() && self.chain_violations().next().is_none()
    }
}

/// `S_f` by the spectral sum when ρ is strictly positive, else by the direct
/// trace formula.
pub fn evaluate_divergence(
    pair: &StatePair,
    f: &OmdFunction,
) -> Result<DivergenceResult, DivergenceError> {
    if pair.rho.is_strictly_positive() {
        return quasi_entropy_spectral(pair, f);
    }
    match direct(pair, f) {
        Some(r) => r,
        None => quasi_entropy_spectral(pair, f),
    }
}

/// Bound reports for `f` without divergence comparison.
pub fn bounds_for(s: &ScalarSummary, f: &OmdFunction) -> Vec<BoundReport> {
    bounds_for_base(s, f, LogBase::E)
}

/// As [`bounds_for`], with the prior Umegaki bound read in `base`.
pub fn bounds_for_base(s: &ScalarSummary, f: &OmdFunction, base: LogBase) -> Vec<BoundReport> {
    let mut reports = vec![
        pinsker_lower(s, f),
        qubit_classical_upper(s, f),
        general_sqrt_d_upper(s, f),
    ];
    match f.kind() {
        OmdKind::NegLog => {
            reports.extend(relative_entropy_upper(s));
            reports.push(ae11_upper(s, base));
            reports.extend(qubit_relative_upper(s));
        }
        OmdKind::Tsallis { q } => reports.extend(tsallis_bounds(s, q)),
        OmdKind::NegPower { .. } | OmdKind::Custom => {}
    }
    reports
}

pub fn sandwich(pair: &StatePair, f: &OmdFunction) -> Result<SandwichReport, DivergenceError> {
    sandwich_with_base(pair, f, LogBase::E)
}

/// A base-2 bound is compared with the divergence converted to bits.
pub fn sandwich_with_base(
    pair: &StatePair,
    f: &OmdFunction,
    base: LogBase,
) -> Result<SandwichReport, DivergenceError> {
    let divergence = evaluate_divergence(pair, f)?;
    let reports: Vec<_> = bounds_for_base(pair.summary(), f, base)
        .into_iter()
        .map(|r| {
            let s = match r.inputs.log_base {
                Some(LogBase::Two) => divergence.value / std::f64::consts::LN_2,
                _ => divergence.value,
            };
            r.compare(s)
        })
        .collect();
    let chains = chain_checks(&reports);
    Ok(SandwichReport {
        divergence,
        reports,
        chains,
    })
}
