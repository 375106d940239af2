//! Quasi-relative entropies `S_f(ρ‖σ) = Tr(f(Δ_{σ,ρ}) ρ)`.
//!
//! Three independent evaluation routes:
//!
//! - [`quasi_entropy_spectral`]: the double sum `Σ_{j,k} λ_j f(μ_k/λ_j) |⟨φ_k|ψ_j⟩|²`
//!   over the eigen-decompositions of ρ and σ;
//! - direct trace formulas ([`umegaki`], [`tsallis_direct`], [`power_direct`])
//!   built from matrix functions of ρ and σ;
//! - [`quasi_entropy_superoperator`]: the `d²×d²` matrix of `X ↦ σXρ⁻¹`,
//!   diagonalized on its own and paired with `vec(ρ^{1/2})`.
//!
//! A kernel violation (`ker σ ⊄ ker ρ` for an `f` unbounded at `0⁺`) yields
//! an infinite value, not an error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_complex::Complex;
use twofloat::TwoFloat;

use crate::extended;
use crate::linalg::{EigenSystem, HermitianMatrix, LinalgError};
use crate::omd::{OmdFunction, OmdKind, ScalarFn};
use crate::states::{ScalarSummary, StateError, StatePair, ZERO_EIGENVALUE};

/// Overlap weights below this are skipped in the spectral sum.
pub const OVERLAP_FLOOR: f64 = 1e-16;
/// Largest dimension accepted by the superoperator route.
pub const SUPEROPERATOR_MAX_DIM: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DivergenceError {
    #[error("{0} is not strictly positive")]
    NotStrictlyPositive(&'static str),
    #[error("dimension {dim} exceeds the superoperator cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("Tsallis parameter q = {0} is outside (0, 2) \\ {{1}}")]
    Parameter(f64),
    #[error("superoperator eigenvalue {0:e} is not positive")]
    Spectrum(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spectral,
    Direct,
    Superoperator,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Direct => "direct",
            Method::Superoperator => "superoperator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceResult {
    /// Finite or `+∞`.
    pub value: f64,
    pub method: Method,
    pub f_name: String,
    pub pair_summary: ScalarSummary,
}

impl DivergenceResult {
    fn new(value: f64, method: Method, f_name: impl Into<String>, pair: &StatePair) -> Self {
        Self {
            value,
            method,
            f_name: f_name.into(),
            pair_summary: *pair.summary(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Double-sum evaluation over the two eigen-decompositions.
///
/// Requires ρ strictly positive. An eigenvalue `μ_k` of σ at or below the zero
/// threshold contributes `λ_j f(0⁺)` per unit overlap when that limit is
/// finite, and makes the result `+∞` otherwise.
pub fn quasi_entropy_spectral<F: ScalarFn + ?Sized>(
    pair: &StatePair,
    f: &F,
) -> Result<DivergenceResult, DivergenceError> {
    if !pair.rho.is_strictly_positive() {
        return Err(DivergenceError::NotStrictlyPositive("rho"));
    }
    let value = spectral_sum(pair, f);
    Ok(DivergenceResult::new(
        value,
        Method::Spectral,
        f.label(),
        pair,
    ))
}

fn spectral_sum<F: ScalarFn + ?Sized>(pair: &StatePair, f: &F) -> f64 {
    let lam = pair.rho.eigenvalues();
    let mu = pair.sigma.eigenvalues();
    let d = lam.len();
    let mut sum = 0.0;
    for j in 0..d {
        for k in 0..d {
            let w = pair.overlaps[(k, j)];
            if w < OVERLAP_FLOOR {
                continue;
            }
            if mu[k] <= ZERO_EIGENVALUE {
                match f.value_at_zero() {
                    Some(v) => sum += lam[j] * v * w,
                    None => return f64::INFINITY,
                }
            } else {
                sum += lam[j] * f.eval(mu[k] / lam[j]) * w;
            }
        }
    }
    sum
}

/// `S_f(σ‖ρ)`, the quasi-entropy with the roles of the states exchanged.
pub fn swapped_entropy<F: ScalarFn + ?Sized>(
    pair: &StatePair,
    f: &F,
) -> Result<DivergenceResult, DivergenceError> {
    let swapped = pair.swapped()?;
    if !swapped.rho.is_strictly_positive() {
        return Err(DivergenceError::NotStrictlyPositive("sigma"));
    }
    let value = spectral_sum(&swapped, f);
    Ok(DivergenceResult::new(
        value,
        Method::Spectral,
        format!("swapped({})", f.label()),
        pair,
    ))
}

/// True when some eigenvector of σ with zero eigenvalue has weight under ρ.
fn kernel_violated(pair: &StatePair) -> bool {
    let phi = pair.sigma.eigenvectors();
    let rho = pair.rho.matrix().matrix();
    pair.sigma.eigenvalues().iter().enumerate().any(|(k, &mu)| {
        if mu > ZERO_EIGENVALUE {
            return false;
        }
        let v = phi.column(k);
        let weight = (v.adjoint() * rho * v)[(0, 0)].re;
        weight > ZERO_EIGENVALUE
    })
}

/// `f` on the support of the spectrum, 0 on eigenvalues at or below the zero threshold.
fn on_support(es: &EigenSystem, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix, LinalgError> {
    es.apply(|x| if x > ZERO_EIGENVALUE { f(x) } else { 0.0 })
}

fn trace_product(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    (a.matrix() * b.matrix()).trace().re
}

/// Umegaki relative entropy `Tr ρ(log ρ − log σ)`, natural log.
pub fn umegaki(pair: &StatePair) -> Result<DivergenceResult, DivergenceError> {
    let name = "neg-log";
    if kernel_violated(pair) {
        return Ok(DivergenceResult::new(
            f64::INFINITY,
            Method::Direct,
            name,
            pair,
        ));
    }
    let rho = pair.rho.matrix();
    let log_rho = on_support(pair.rho.spectral(), f64::ln)?;
    let log_sigma = on_support(pair.sigma.spectral(), f64::ln)?;
    let value = trace_product(rho, &log_rho) - trace_product(rho, &log_sigma);
    Ok(DivergenceResult::new(value, Method::Direct, name, pair))
}

fn power_trace(pair: &StatePair, rho_exp: f64, sigma_exp: f64) -> Result<f64, LinalgError> {
    let a = on_support(pair.rho.spectral(), |x| x.powf(rho_exp))?;
    let b = on_support(pair.sigma.spectral(), |x| x.powf(sigma_exp))?;
    Ok(trace_product(&a, &b))
}

/// Tsallis relative entropy `(1 − Tr ρ^q σ^{1−q})/(1 − q)`.
pub fn tsallis_direct(pair: &StatePair, q: f64) -> Result<DivergenceResult, DivergenceError> {
    if !(q > 0.0 && q < 2.0) || q == 1.0 {
        return Err(DivergenceError::Parameter(q));
    }
    let name = format!("tsallis:q={q}");
    if q > 1.0 && kernel_violated(pair) {
        return Ok(DivergenceResult::new(
            f64::INFINITY,
            Method::Direct,
            name,
            pair,
        ));
    }
    let tr = power_trace(pair, q, 1.0 - q)?;
    Ok(DivergenceResult::new(
        (1.0 - tr) / (1.0 - q),
        Method::Direct,
        name,
        pair,
    ))
}

/// `S_f` for `f(x) = 1 − x^p`: `1 − Tr ρ^{1−p} σ^p`.
pub fn power_direct(pair: &StatePair, p: f64) -> Result<DivergenceResult, DivergenceError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DivergenceError::Parameter(1.0 - p));
    }
    let tr = power_trace(pair, 1.0 - p, p)?;
    Ok(DivergenceResult::new(
        1.0 - tr,
        Method::Direct,
        format!("neg-power:p={p}"),
        pair,
    ))
}

/// Direct trace formula for a builtin, `None` for custom functions.
pub fn direct(
    pair: &StatePair,
    f: &OmdFunction,
) -> Option<Result<DivergenceResult, DivergenceError>> {
    match f.kind() {
        OmdKind::NegLog => Some(umegaki(pair)),
        OmdKind::NegPower { p } => Some(power_direct(pair, p)),
        OmdKind::Tsallis { q } => Some(tsallis_direct(pair, q)),
        OmdKind::Custom => None,
    }
}

/// Matrix of `Δ_{σ,ρ}: X ↦ σ X ρ⁻¹` under column stacking, `(ρ⁻¹)ᵀ ⊗ σ`.
pub fn superoperator_matrix(pair: &StatePair) -> Result<HermitianMatrix, DivergenceError> {
    let d = pair.dim();
    if d > SUPEROPERATOR_MAX_DIM {
        return Err(DivergenceError::DimensionCap {
            dim: d,
            cap: SUPEROPERATOR_MAX_DIM,
        });
    }
    if !pair.rho.is_strictly_positive() {
        return Err(DivergenceError::NotStrictlyPositive("rho"));
    }
    if !pair.sigma.is_strictly_positive() {
        return Err(DivergenceError::NotStrictlyPositive("sigma"));
    }
    let rho_inv = pair.rho.spectral().apply(|x| 1.0 / x)?;
    let m = rho_inv
        .matrix()
        .transpose()
        .kronecker(pair.sigma.matrix().matrix());
    Ok(HermitianMatrix::new(m)?)
}

/// `⟨vec ρ^{1/2}, f(Δ_{σ,ρ}) vec ρ^{1/2}⟩` from an eigendecomposition of the
/// superoperator matrix. Never touches the eigenbasis overlaps.
pub fn quasi_entropy_superoperator<F: ScalarFn + ?Sized>(
    pair: &StatePair,
    f: &F,
) -> Result<DivergenceResult, DivergenceError> {
    let value = SuperoperatorSpectrum::new(pair)?.expectation(f)?;
    Ok(DivergenceResult::new(
        value,
        Method::Superoperator,
        f.label(),
        pair,
    ))
}

/// Eigendecomposition of `Δ_{σ,ρ}` with the weights of `vec ρ^{1/2}` on each
/// eigenvector, reusable across functions.
#[derive(Debug, Clone)]
pub struct SuperoperatorSpectrum {
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SuperoperatorSpectrum {
    /// Builds `(ρ⁻¹)ᵀ ⊗ σ` and `vec ρ^{1/2}` in double-double precision.
    /// `ρ⁻¹` comes from an LU solve refined by Newton–Schulz, not from the
    /// eigendecomposition of ρ.
    pub fn new(pair: &StatePair) -> Result<Self, DivergenceError> {
        // Validates dimension and positivity.
        superoperator_matrix(pair)?;
        let rho_inv = extended::inverse(pair.rho.matrix().matrix())?;
        let delta = extended::kronecker(
            &extended::transpose(&rho_inv),
            &extended::lift(pair.sigma.matrix().matrix()),
        );
        let es = extended::eigh_dd(&delta)?;

        let rho_es = extended::eigh_dd(&extended::lift(pair.rho.matrix().matrix()))?;
        let d = pair.dim();
        let roots: Vec<_> = rho_es
            .values
            .iter()
            .map(|&l| l.max(TwoFloat::from(0.0)).sqrt())
            .collect();
        // vec(ρ^{1/2}) with column stacking: entry (i, j) at index j·d + i.
        let x: Vec<extended::CDD> = (0..d * d)
            .map(|idx| {
                let (i, j) = (idx % d, idx / d);
                (0..d).fold(
                    Complex::new(TwoFloat::from(0.0), TwoFloat::from(0.0)),
                    |acc, k| {
                        acc + rho_es.vectors[(i, k)] * rho_es.vectors[(j, k)].conj() * roots[k]
                    },
                )
            })
            .collect();
        let weights = (0..es.vectors.ncols())
            .map(|c| {
                let ip = (0..x.len()).fold(
                    Complex::new(TwoFloat::from(0.0), TwoFloat::from(0.0)),
                    |acc, r| acc + es.vectors[(r, c)].conj() * x[r],
                );
                f64::from(ip.norm_sqr())
            })
            .collect();
        let eigenvalues = es.values.iter().map(|&v| f64::from(v)).collect();
        Ok(Self {
            eigenvalues,
            weights,
        })
    }

    pub fn expectation<F: ScalarFn + ?Sized>(&self, f: &F) -> Result<f64, DivergenceError> {
        let mut sum = 0.0;
        for (&nu, &w) in self.eigenvalues.iter().zip(&self.weights) {
            if nu <= 0.0 {
                return Err(DivergenceError::Spectrum(nu));
            }
            sum += f.eval(nu) * w;
        }
        Ok(sum)
    }
}

/// Values of one function by every available route.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteComparison {
    pub f_name: String,
    pub spectral: Option<f64>,
    pub direct: Option<f64>,
    pub superoperator: Option<f64>,
    /// Largest pairwise `|a − b|` over the available routes.
    pub max_abs_diff: f64,
    /// Largest pairwise `|a − b| / max(|a|, |b|)` (0 when equal).
    pub max_rel_diff: f64,
}

/// Absolute slack in route agreement. The direct trace formulas subtract
/// quantities of order 1 and carry about `1e-15` absolute error.
pub const ROUTE_ABS_TOL: f64 = 1e-13;

impl RouteComparison {
    /// Every pair of routes satisfies `|a − b| ≤ rel·max(|a|, |b|) + ROUTE_ABS_TOL`.
    pub fn agrees(&self, rel: f64) -> bool {
        let values: Vec<f64> = [self.spectral, self.direct, self.superoperator]
            .into_iter()
            .flatten()
            .collect();
        values.iter().enumerate().all(|(i, &a)| {
            values[i + 1..]
                .iter()
                .all(|&b| a == b || (a - b).abs() <= rel * a.abs().max(b.abs()) + ROUTE_ABS_TOL)
        })
    }
}

fn relative_difference(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Runs every route that applies to `pair` for each function. The
/// superoperator spectrum is computed once and shared.
pub fn compare_routes(
    pair: &StatePair,
    functions: &[OmdFunction],
) -> Result<Vec<RouteComparison>, DivergenceError> {
    let spectrum = if pair.dim() <= SUPEROPERATOR_MAX_DIM
        && pair.rho.is_strictly_positive()
        && pair.sigma.is_strictly_positive()
    {
        Some(SuperoperatorSpectrum::new(pair)?)
    } else {
        None
    };
    functions
        .iter()
        .map(|f| {
            let spectral = if pair.rho.is_strictly_positive() {
                Some(quasi_entropy_spectral(pair, f)?.value)
            } else {
                None
            };
            let direct = direct(pair, f).transpose()?.map(|r| r.value);
            let superoperator = spectrum.as_ref().map(|s| s.expectation(f)).transpose()?;
            let values: Vec<f64> = [spectral, direct, superoperator]
                .into_iter()
                .flatten()
                .collect();
            let (mut max_abs_diff, mut max_rel_diff): (f64, f64) = (0.0, 0.0);
            for (i, &a) in values.iter().enumerate() {
                for &b in &values[i + 1..] {
                    if a != b {
                        max_abs_diff = max_abs_diff.max((a - b).abs());
                    }
                    max_rel_diff = max_rel_diff.max(relative_difference(a, b));
                }
            }
            Ok(RouteComparison {
                f_name: f.name().to_string(),
                spectral,
                direct,
                superoperator,
                max_abs_diff,
                max_rel_diff,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, CMatrix, C64};
    use crate::omd::{dual_function, ScalarMap};
    use crate::rng::rng_from_seed;
    use crate::states::{random_pair, random_state, DensityMatrix};

    fn rotated_pair() -> StatePair {
        // σ has eigenvalues (.75, .25) in the basis rotated by 45°.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
                C64::new(s, 0.0),
                C64::new(s, 0.0),
            ],
        );
        let sigma = DensityMatrix::from_spectrum(&[0.75, 0.25], &u).unwrap();
        StatePair::new(DensityMatrix::maximally_mixed(2).unwrap(), sigma).unwrap()
    }

    fn diagonal_pair() -> StatePair {
        StatePair::new(
            DensityMatrix::diagonal(&[0.5, 0.5]).unwrap(),
            DensityMatrix::diagonal(&[0.75, 0.25]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn equal_states_give_zero() {
        let r = random_state(3, &mut rng_from_seed(2)).unwrap();
        let p = StatePair::new(r.clone(), r).unwrap();
        for f in crate::omd::builtins() {
            assert!(quasi_entropy_spectral(&p, &f).unwrap().value.abs() < 1e-12);
            assert!(quasi_entropy_superoperator(&p, &f).unwrap().value.abs() < 1e-12);
            assert!(direct(&p, &f).unwrap().unwrap().value.abs() < 1e-12);
        }
        let half = DensityMatrix::maximally_mixed(2).unwrap();
        let p = StatePair::new(half.clone(), half).unwrap();
        assert!(
            quasi_entropy_superoperator(&p, &OmdFunction::neg_log())
                .unwrap()
                .value
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn hand_evaluated_examples() {
        let expected = 0.5 * (4.0f64 / 3.0).ln();
        let f = OmdFunction::neg_log();
        for p in [rotated_pair(), diagonal_pair()] {
            assert!((quasi_entropy_spectral(&p, &f).unwrap().value - expected).abs() < 1e-14);
            assert!((umegaki(&p).unwrap().value - expected).abs() < 1e-14);
        }
        let ts = tsallis_direct(&diagonal_pair(), 0.5).unwrap().value;
        let closed = (1.0 - 0.5f64.sqrt() * (0.75f64.sqrt() + 0.25f64.sqrt())) / 0.5;
        assert!((ts - closed).abs() < 1e-14);
        assert!((ts - 0.068148).abs() < 1e-6);
    }

    #[test]
    fn rank_deficient_sigma_is_infinite_for_log() {
        let p = StatePair::new(
            DensityMatrix::diagonal(&[0.5, 0.5]).unwrap(),
            DensityMatrix::diagonal(&[1.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(umegaki(&p).unwrap().value, f64::INFINITY);
        assert_eq!(
            quasi_entropy_spectral(&p, &OmdFunction::neg_log())
                .unwrap()
                .value,
            f64::INFINITY
        );
        assert_eq!(tsallis_direct(&p, 1.5).unwrap().value, f64::INFINITY);
        // f(0⁺) finite for q < 1: limit value used, matching the trace formula.
        let f = OmdFunction::tsallis(0.3).unwrap();
        let s = quasi_entropy_spectral(&p, &f).unwrap().value;
        let d = tsallis_direct(&p, 0.3).unwrap().value;
        assert!(s.is_finite());
        assert!((s - d).abs() < 1e-12);
    }

    #[test]
    fn spectral_requires_positive_rho() {
        let p = StatePair::new(
            DensityMatrix::diagonal(&[1.0, 0.0]).unwrap(),
            DensityMatrix::diagonal(&[0.5, 0.5]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            quasi_entropy_spectral(&p, &OmdFunction::neg_log()),
            Err(DivergenceError::NotStrictlyPositive("rho"))
        ));
        assert!(matches!(
            superoperator_matrix(&p),
            Err(DivergenceError::NotStrictlyPositive(_))
        ));
    }

    #[test]
    fn superoperator_dimension_cap() {
        let r = DensityMatrix::maximally_mixed(13).unwrap();
        let p = StatePair::new(r.clone(), r).unwrap();
        assert!(matches!(
            superoperator_matrix(&p),
            Err(DivergenceError::DimensionCap { .. })
        ));
    }

    #[test]
    fn superoperator_spectrum_is_ratio_set() {
        let p = random_pair(3, &mut rng_from_seed(4)).unwrap();
        let es = eigh(&superoperator_matrix(&p).unwrap()).unwrap();
        let mut ratios: Vec<f64> = p
            .sigma
            .eigenvalues()
            .iter()
            .flat_map(|&mu| p.rho.eigenvalues().iter().map(move |&lam| mu / lam))
            .collect();
        ratios.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in es.values.iter().zip(&ratios) {
            assert!((a - b).abs() < 1e-10 * b.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn tsallis_above_one_matches_spectral() {
        let p = random_pair(2, &mut rng_from_seed(8)).unwrap();
        let f = OmdFunction::tsallis(1.5).unwrap();
        let a = quasi_entropy_spectral(&p, &f).unwrap().value;
        let b = tsallis_direct(&p, 1.5).unwrap().value;
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn swapped_examples() {
        let p = random_pair(2, &mut rng_from_seed(10)).unwrap();
        let f = OmdFunction::neg_log();
        let g = dual_function(f.clone());
        let via_dual = quasi_entropy_spectral(&p, &g).unwrap().value;
        let swapped = swapped_entropy(&p, &f).unwrap().value;
        assert!((via_dual - swapped).abs() < 1e-10);
        let reverse = umegaki(&p.swapped().unwrap()).unwrap().value;
        assert!((swapped - reverse).abs() < 1e-10);

        let r = random_state(2, &mut rng_from_seed(1)).unwrap();
        let same = StatePair::new(r.clone(), r).unwrap();
        assert!(swapped_entropy(&same, &f).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn non_omd_functions_flow_through() {
        // x log x is operator convex with f(1) = 0.
        let f = ScalarMap::new("xlogx", |x: f64| x * x.ln()).with_value_at_zero(0.0);
        let p = random_pair(3, &mut rng_from_seed(12)).unwrap();
        let a = quasi_entropy_spectral(&p, &f).unwrap().value;
        let b = quasi_entropy_superoperator(&p, &f).unwrap().value;
        assert!((a - b).abs() < 1e-10);
        assert!(a >= -1e-12);
    }
}
