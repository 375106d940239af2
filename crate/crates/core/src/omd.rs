//! Operator monotone decreasing functions normalized to `f(1) = 0`.
//!
//! Every such `f` has the integral representation
//!
//! ```text
//! f(x) = a(1 − x) + ∫₀^∞ (1/(t + x) − 1/(t + 1)) w(t) dt,     a ≥ 0, w ≥ 0,
//! ```
//!
//! and its coefficients satisfy `a + b = ∫₀^∞ (1/(t+1) − t/(t²+1)) w(t) dt`
//! with `b = −Re f(i)`. An [`OmdFunction`] stores the pointwise evaluator next
//! to `a`, `b`, the measure density `w` and the first two derivatives at 1,
//! so every part of the descriptor can be checked against the others.
//!
//! Builtins:
//!
//! | name | f(x) | w(t) | f′(1) | f″(1) |
//! |---|---|---|---|---|
//! | `neg-log` | `−ln x` | `1` | `−1` | `1` |
//! | `neg-power:p` | `1 − x^p`, `0<p<1` | `sin(pπ)/π · t^p` | `−p` | `p(1−p)` |
//! | `tsallis:q`, `0<q<1` | `(1 − x^{1−q})/(1−q)` | `sin((1−q)π)/(π(1−q)) · t^{1−q}` | `−1` | `q` |
//! | `tsallis:q`, `1<q<2` | same | `sin(rπ)/(π r) · t^{−r}`, `r = q−1` | `−1` | `q` |
//!
//! `neg-power` is `−x^p` shifted by `+1`; [`OmdFunction::unshifted_b`] gives
//! the `b` of the unshifted `−x^p`, which is `cos(pπ/2)`. The density used for
//! `tsallis:q` with `q > 1` is derived here (from the Stieltjes form of
//! `x^{−r}`) rather than taken from a table; the round-trip tests are what
//! vouch for it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::linalg::{eigh, mat_func, CMatrix, HermitianMatrix, LinalgError, C64};
use crate::quadrature::{Integrator, QuadratureError};
use crate::states::ginibre;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OmdError {
    #[error("parameter {name} = {value} is outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("unknown function spec {0:?} (expected neg-log, neg-power:p=<p>, tsallis:q=<q>)")]
    Parse(String),
    #[error("inconsistent descriptor {name}: {reason}")]
    Inconsistent { name: String, reason: String },
    #[error("x = {0} is not in (0, ∞)")]
    Domain(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// A real function on `(0, ∞)` fed to divergence computations.
pub trait ScalarFn: Send + Sync {
    fn eval(&self, x: f64) -> f64;

    /// `lim_{x→0⁺} f(x)` when finite; `None` means the limit is `+∞`.
    fn value_at_zero(&self) -> Option<f64> {
        None
    }

    /// `lim_{x→∞} f(x)/x` when known.
    fn slope_at_infinity(&self) -> Option<f64> {
        None
    }

    fn label(&self) -> String {
        "custom".to_string()
    }
}

type RealMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A plain scalar function with a name and optional boundary behavior.
#[derive(Clone)]
pub struct ScalarMap {
    pub name: String,
    f: RealMap,
    pub at_zero: Option<f64>,
    pub slope: Option<f64>,
}

impl ScalarMap {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            at_zero: None,
            slope: None,
        }
    }

    pub fn with_value_at_zero(mut self, v: f64) -> Self {
        self.at_zero = Some(v);
        self
    }
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarMap")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl ScalarFn for ScalarMap {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn value_at_zero(&self) -> Option<f64> {
        self.at_zero
    }
    fn slope_at_infinity(&self) -> Option<f64> {
        self.slope
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// `g(x) = x f(1/x)`.
///
/// `S_g(ρ‖σ) = S_f(σ‖ρ)`, and `dual(dual(f)) = f`.
pub fn dual_function<F: ScalarFn + Clone + 'static>(f: F) -> ScalarMap {
    let at_zero = f.slope_at_infinity();
    let slope = f.value_at_zero();
    let name = format!("dual({})", f.label());
    ScalarMap {
        name,
        f: Arc::new(move |x| x * f.eval(1.0 / x)),
        at_zero,
        slope,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmdKind {
    NegLog,
    NegPower { p: f64 },
    Tsallis { q: f64 },
    Custom,
}

/// Descriptor of an operator monotone decreasing `f` with `f(1) = 0`.
#[derive(Clone)]
pub struct OmdFunction {
    name: String,
    kind: OmdKind,
    a: f64,
    b: f64,
    shift: f64,
    d1_at_1: f64,
    d2_at_1: f64,
    at_zero: Option<f64>,
    eval: RealMap,
    density: RealMap,
}

impl fmt::Debug for OmdFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OmdFunction")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("shift", &self.shift)
            .field("d1_at_1", &self.d1_at_1)
            .field("d2_at_1", &self.d2_at_1)
            .finish_non_exhaustive()
    }
}

fn check_open_unit(name: &'static str, value: f64) -> Result<(), OmdError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(OmdError::Parameter {
            name,
            value,
            range: "(0, 1)",
        })
    }
}

impl OmdFunction {
    pub fn neg_log() -> Self {
        Self {
            name: "neg-log".into(),
            kind: OmdKind::NegLog,
            a: 0.0,
            b: 0.0,
            shift: 0.0,
            d1_at_1: -1.0,
            d2_at_1: 1.0,
            at_zero: None,
            eval: Arc::new(|x: f64| -x.ln()),
            density: Arc::new(|_| 1.0),
        }
    }

    /// `1 − x^p` for `p ∈ (0, 1)`.
    pub fn neg_power(p: f64) -> Result<Self, OmdError> {
        check_open_unit("p", p)?;
        let c = (p * PI).sin() / PI;
        Ok(Self {
            name: format!("neg-power:p={p}"),
            kind: OmdKind::NegPower { p },
            a: 0.0,
            b: (p * PI / 2.0).cos() - 1.0,
            shift: 1.0,
            d1_at_1: -p,
            d2_at_1: p * (1.0 - p),
            at_zero: Some(1.0),
            eval: Arc::new(move |x: f64| 1.0 - x.powf(p)),
            density: Arc::new(move |t: f64| c * t.powf(p)),
        })
    }

    /// `(1 − x^{1−q})/(1 − q)` for `q ∈ (0, 2) \ {1}`.
    pub fn tsallis(q: f64) -> Result<Self, OmdError> {
        if !(q > 0.0 && q < 2.0) || q == 1.0 {
            return Err(OmdError::Parameter {
                name: "q",
                value: q,
                range: "(0, 2) \\ {1}",
            });
        }
        let e = 1.0 - q;
        let (b, at_zero, density): (f64, Option<f64>, RealMap) = if q < 1.0 {
            let c = (e * PI).sin() / (PI * e);
            (
                ((e * PI / 2.0).cos() - 1.0) / e,
                Some(1.0 / e),
                Arc::new(move |t: f64| c * t.powf(e)),
            )
        } else {
            let r = q - 1.0;
            let c = (r * PI).sin() / (PI * r);
            (
                (1.0 - (r * PI / 2.0).cos()) / r,
                None,
                Arc::new(move |t: f64| c * t.powf(-r)),
            )
        };
        Ok(Self {
            name: format!("tsallis:q={q}"),
            kind: OmdKind::Tsallis { q },
            a: 0.0,
            b,
            shift: 0.0,
            d1_at_1: -1.0,
            d2_at_1: q,
            at_zero,
            eval: Arc::new(move |x: f64| (1.0 - x.powf(e)) / e),
            density,
        })
    }

    /// A user-supplied descriptor.
    ///
    /// `b` is derived from the normalization identity; registration fails
    /// unless `f(1) = 0`, `a ≥ 0`, `w ≥ 0` on a log grid and the integral
    /// representation reproduces `f` at a handful of points.
    pub fn custom(spec: CustomSpec) -> Result<Self, OmdError> {
        let CustomSpec {
            name,
            eval,
            a,
            density,
            d1_at_1,
            d2_at_1,
            value_at_zero,
        } = spec;
        let fail = |reason: String| OmdError::Inconsistent {
            name: name.clone(),
            reason,
        };
        if eval(1.0).abs() > 1e-12 {
            return Err(fail(format!("f(1) = {} is not 0", eval(1.0))));
        }
        if a < 0.0 || !a.is_finite() {
            return Err(fail(format!("a = {a} must be finite and nonnegative")));
        }
        for i in 0..=120 {
            let t = 10f64.powf(-6.0 + 0.1 * i as f64);
            let w = density(t);
            if !(w >= 0.0) {
                return Err(fail(format!("w({t:e}) = {w} is negative")));
            }
        }
        let mut f = Self {
            name: name.clone(),
            kind: OmdKind::Custom,
            a,
            b: 0.0,
            shift: 0.0,
            d1_at_1,
            d2_at_1,
            at_zero: value_at_zero,
            eval,
            density,
        };
        f.b = normalization_integral(&f, &Integrator::default())? - a;
        for x in [0.05, 0.5, 2.0, 20.0] {
            let direct = f.eval(x);
            let repr = eval_via_representation(&f, x)?;
            if (direct - repr).abs() > 1e-6 * direct.abs().max(1.0) {
                return Err(fail(format!(
                    "representation gives {repr} at x = {x}, f gives {direct}"
                )));
            }
        }
        Ok(f)
    }

    /// Parses `neg-log`, `neg-power:p=0.5` (or `neg-power:0.5`), `tsallis:q=0.3` (or `tsallis:0.3`).
    pub fn parse(spec: &str) -> Result<Self, OmdError> {
        let spec = spec.trim();
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (spec, None),
        };
        let number = |key: &str| -> Result<f64, OmdError> {
            let raw = arg.ok_or_else(|| OmdError::Parse(spec.to_string()))?;
            let raw = raw
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .unwrap_or(raw);
            raw.trim()
                .parse::<f64>()
                .map_err(|_| OmdError::Parse(spec.to_string()))
        };
        match head {
            "neg-log" if arg.is_none() => Ok(Self::neg_log()),
            "neg-power" => Self::neg_power(number("p")?),
            "tsallis" => Self::tsallis(number("q")?),
            _ => Err(OmdError::Parse(spec.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> OmdKind {
        self.kind
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// `a_f = −lim_{y→∞} f(iy)/(iy)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `b_f = −Re f(i)` of the stored (normalized) function.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Constant added to the textbook form to reach `f(1) = 0`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `b` of the function before the normalizing shift.
    pub fn unshifted_b(&self) -> f64 {
        self.b + self.shift
    }

    pub fn density(&self, t: f64) -> f64 {
        (self.density)(t)
    }

    pub fn d1_at_1(&self) -> f64 {
        self.d1_at_1
    }

    pub fn d2_at_1(&self) -> f64 {
        self.d2_at_1
    }

    /// Tsallis parameter, if this is a Tsallis function.
    pub fn tsallis_q(&self) -> Option<f64> {
        match self.kind {
            OmdKind::Tsallis { q } => Some(q),
            _ => None,
        }
    }

    /// Analytic continuation to the upper half plane (principal branches),
    /// available for builtins.
    pub fn eval_complex(&self, z: C64) -> Option<C64> {
        let one = C64::new(1.0, 0.0);
        match self.kind {
            OmdKind::NegLog => Some(-z.ln()),
            OmdKind::NegPower { p } => Some(one - z.powf(p)),
            OmdKind::Tsallis { q } => Some((one - z.powf(1.0 - q)) / (1.0 - q)),
            OmdKind::Custom => None,
        }
    }
}

/// Parameters for [`OmdFunction::custom`].
pub struct CustomSpec {
    pub name: String,
    pub eval: RealMap,
    pub a: f64,
    pub density: RealMap,
    pub d1_at_1: f64,
    pub d2_at_1: f64,
    pub value_at_zero: Option<f64>,
}

impl ScalarFn for OmdFunction {
    fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }
    fn value_at_zero(&self) -> Option<f64> {
        self.at_zero
    }
    fn slope_at_infinity(&self) -> Option<f64> {
        Some(-self.a)
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// The builtin family used by sweeps.
pub fn builtins() -> Vec<OmdFunction> {
    let mut v = vec![OmdFunction::neg_log()];
    v.extend([0.25, 0.5, 0.75].map(|p| OmdFunction::neg_power(p).unwrap()));
    v.extend([0.3, 0.5, 1.5].map(|q| OmdFunction::tsallis(q).unwrap()));
    v
}

// The half line is split at t = 1 and the tail mapped by t = 1/s, so both
// pieces live on (0, 1] with any singularity at 0, where floating point has
// full resolution.
fn split_integral<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(
    integrator: &Integrator,
    lower: F,
    upper: G,
) -> Result<f64, QuadratureError> {
    Ok(integrator.integrate(lower, 0.0, 1.0)?.value + integrator.integrate(upper, 0.0, 1.0)?.value)
}

/// `f(x)` evaluated through the integral representation.
pub fn eval_via_representation(f: &OmdFunction, x: f64) -> Result<f64, OmdError> {
    eval_via_representation_with(f, x, &Integrator::default())
}

pub fn eval_via_representation_with(
    f: &OmdFunction,
    x: f64,
    integrator: &Integrator,
) -> Result<f64, OmdError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(OmdError::Domain(x));
    }
    // 1/(t+x) − 1/(t+1) = (1−x)/((t+x)(t+1)); the (1−x) factor is pulled out.
    let integral = split_integral(
        integrator,
        |t| f.density(t) / ((t + x) * (t + 1.0)),
        |s| f.density(1.0 / s) / ((1.0 + x * s) * (1.0 + s)),
    )?;
    Ok((1.0 - x) * (f.a + integral))
}

/// `∫₀^∞ (1/(t+1) − t/(t²+1)) w(t) dt`.
pub fn normalization_integral(f: &OmdFunction, integrator: &Integrator) -> Result<f64, OmdError> {
    Ok(split_integral(
        integrator,
        |t| f.density(t) * (1.0 - t) / ((t + 1.0) * (t * t + 1.0)),
        |s| f.density(1.0 / s) * (s - 1.0) / ((1.0 + s) * (1.0 + s * s)),
    )?)
}

/// `a + b − ∫(1/(t+1) − t/(t²+1)) w(t) dt`; zero for a consistent descriptor.
pub fn normalization_residual(f: &OmdFunction) -> Result<f64, OmdError> {
    Ok(f.a + f.b - normalization_integral(f, &Integrator::default())?)
}

/// `n` points log-spaced on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// One row of a representation round-trip table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTrip {
    pub x: f64,
    pub direct: f64,
    pub representation: f64,
    pub rel_error: f64,
}

/// Compares `f.eval` with the integral representation on `grid`.
pub fn round_trip(f: &OmdFunction, grid: &[f64]) -> Result<Vec<RoundTrip>, OmdError> {
    grid.iter()
        .map(|&x| {
            let direct = f.eval(x);
            let representation = eval_via_representation(f, x)?;
            let rel_error = (direct - representation).abs() / direct.abs().max(1.0);
            Ok(RoundTrip {
                x,
                direct,
                representation,
                rel_error,
            })
        })
        .collect()
}

/// Outcome of [`monotonicity_spot_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest eigenvalue of `f(B) − f(A)` seen over all trials.
    pub worst_eigenvalue: f64,
}

/// Draws random `A ≥ B > 0` and checks `f(B) − f(A) ⪰ −1e-10·I`.
pub fn monotonicity_spot_check<F: ScalarFn + ?Sized, R: Rng + ?Sized>(
    f: &F,
    dim: usize,
    trials: usize,
    rng: &mut R,
) -> Result<MonotonicityReport, LinalgError> {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let b = random_positive(dim, 0.05, rng);
        let p = random_positive(dim, 0.0, rng);
        let a = b.add(&p)?;
        let fb = mat_func(&b, |x| f.eval(x))?;
        let fa = mat_func(&a, |x| f.eval(x))?;
        let diff = fb.sub(&fa)?;
        let min = *eigh(&diff)?.values.last().unwrap();
        worst = worst.min(min);
        if min < -1e-10 {
            violations += 1;
        }
    }
    Ok(MonotonicityReport {
        trials,
        violations,
        worst_eigenvalue: worst,
    })
}

fn random_positive<R: Rng + ?Sized>(dim: usize, floor: f64, rng: &mut R) -> HermitianMatrix {
    let g: CMatrix = ginibre(dim, rng);
    let scale = rng.random_range(0.1..2.0) / dim as f64;
    HermitianMatrix::symmetrized(&g * g.adjoint() * C64::new(scale, 0.0)).shift(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn builtins_vanish_at_one() {
        for f in builtins() {
            assert_eq!(f.eval(1.0), 0.0, "{}", f.name());
            assert_eq!(eval_via_representation(&f, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn representation_examples() {
        let v = eval_via_representation(&OmdFunction::neg_log(), 2.0).unwrap();
        assert!((v + 2f64.ln()).abs() < 1e-8, "{v}");
        let v = eval_via_representation(&OmdFunction::tsallis(0.5).unwrap(), 4.0).unwrap();
        assert!((v + 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn b_matches_complex_evaluation() {
        for f in builtins() {
            let fi = f.eval_complex(C64::new(0.0, 1.0)).unwrap();
            assert!(
                (f.b() + fi.re).abs() < 1e-12,
                "{}: b={} vs {}",
                f.name(),
                f.b(),
                -fi.re
            );
            let y = 1e40;
            let a = -(f.eval_complex(C64::new(0.0, y)).unwrap() / C64::new(0.0, y)).re;
            assert!(a.abs() < 1e-6, "{}", f.name());
        }
        for p in [0.25, 0.5, 0.75] {
            let f = OmdFunction::neg_power(p).unwrap();
            assert!((f.unshifted_b() - (p * PI / 2.0).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn tsallis_second_derivative() {
        for q in [0.1, 0.3, 0.9, 1.2, 1.7] {
            let f = OmdFunction::tsallis(q).unwrap();
            assert!((f.d2_at_1() - q).abs() < 1e-12);
            // Central difference sanity check on the stored value.
            let h = 1e-4;
            let fd = (f.eval(1.0 + h) - 2.0 * f.eval(1.0) + f.eval(1.0 - h)) / (h * h);
            assert!((fd - q).abs() < 1e-5);
        }
    }

    #[test]
    fn parameter_ranges() {
        assert!(OmdFunction::tsallis(1.0).is_err());
        assert!(OmdFunction::tsallis(2.0).is_err());
        assert!(OmdFunction::neg_power(1.0).is_err());
        assert!(OmdFunction::neg_power(0.0).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(
            OmdFunction::parse("neg-log").unwrap().kind(),
            OmdKind::NegLog
        );
        assert_eq!(
            OmdFunction::parse("neg-power:p=0.5").unwrap().kind(),
            OmdKind::NegPower { p: 0.5 }
        );
        assert_eq!(
            OmdFunction::parse("neg-power:0.5").unwrap().kind(),
            OmdKind::NegPower { p: 0.5 }
        );
        assert_eq!(
            OmdFunction::parse("tsallis:q=0.3").unwrap().kind(),
            OmdKind::Tsallis { q: 0.3 }
        );
        assert_eq!(
            OmdFunction::parse("tsallis:1.5").unwrap().kind(),
            OmdKind::Tsallis { q: 1.5 }
        );
        assert!(matches!(OmdFunction::parse("log"), Err(OmdError::Parse(_))));
        assert!(matches!(
            OmdFunction::parse("tsallis:q=abc"),
            Err(OmdError::Parse(_))
        ));
        assert!(matches!(
            OmdFunction::parse("tsallis:q=1"),
            Err(OmdError::Parameter { .. })
        ));
    }

    #[test]
    fn dual_examples() {
        let g = dual_function(OmdFunction::neg_log());
        for x in [0.1, 0.7, 3.0] {
            assert!((g.eval(x) - x * x.ln()).abs() < 1e-14);
        }
        assert_eq!(g.value_at_zero(), Some(0.0));
        let lin = ScalarMap::new("1-x", |x| 1.0 - x);
        let g = dual_function(lin.clone());
        assert!((g.eval(2.5) - 1.5).abs() < 1e-15);
        let gg = dual_function(g);
        for x in log_grid(1e-2, 1e2, 25) {
            assert!((gg.eval(x) - lin.eval(x)).abs() < 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn custom_descriptor_checks() {
        // 2·(−ln x) is a valid descriptor.
        let ok = OmdFunction::custom(CustomSpec {
            name: "two-neg-log".into(),
            eval: Arc::new(|x: f64| -2.0 * x.ln()),
            a: 0.0,
            density: Arc::new(|_| 2.0),
            d1_at_1: -2.0,
            d2_at_1: 2.0,
            value_at_zero: None,
        })
        .unwrap();
        assert!(ok.b().abs() < 1e-8);
        // Wrong density.
        let bad = OmdFunction::custom(CustomSpec {
            name: "mismatch".into(),
            eval: Arc::new(|x: f64| -x.ln()),
            a: 0.0,
            density: Arc::new(|_| 3.0),
            d1_at_1: -1.0,
            d2_at_1: 1.0,
            value_at_zero: None,
        });
        assert!(matches!(bad, Err(OmdError::Inconsistent { .. })));
        let not_normalized = OmdFunction::custom(CustomSpec {
            name: "shifted".into(),
            eval: Arc::new(|x: f64| 1.0 - x.ln()),
            a: 0.0,
            density: Arc::new(|_| 1.0),
            d1_at_1: -1.0,
            d2_at_1: 1.0,
            value_at_zero: None,
        });
        assert!(matches!(not_normalized, Err(OmdError::Inconsistent { .. })));
    }

    #[test]
    fn monotonicity_examples() {
        let mut rng = rng_from_seed(21);
        let r = monotonicity_spot_check(&OmdFunction::neg_log(), 3, 100, &mut rng).unwrap();
        assert_eq!(r.violations, 0);
        let square = ScalarMap::new("x^2", |x| x * x);
        let r = monotonicity_spot_check(&square, 2, 50, &mut rng).unwrap();
        assert!(r.violations > 0);
        let dec = ScalarMap::new("exp(-x)", |x: f64| (-x).exp());
        let r = monotonicity_spot_check(&dec, 1, 200, &mut rng).unwrap();
        assert_eq!(r.violations, 0);
    }
}
