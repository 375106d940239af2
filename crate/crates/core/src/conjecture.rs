//! The weighted-overlap functional `Tr(D(ρ−σ))` and a counterexample search
//! for the dimension-free bound `|Tr(D(ρ−σ))| ≤ C‖ρ−σ‖₁`.
//!
//! `D = Σ_{kj} C_{kj} ⟨ψ_j|φ_k⟩ |ψ_j⟩⟨φ_k|` is built from the eigenbases
//! `{ψ_j}` of ρ and `{φ_k}` of σ with weights `0 ≤ C_{kj} ≤ C`. Then
//! `Tr(D(ρ−σ)) = Σ_{kj} C_{kj}(λ_j − μ_k)|⟨φ_k|ψ_j⟩|²`.
//!
//! The bound is proven for qubits and for commuting pairs; for `d ≥ 3` it is
//! open. The search measures the largest ratio `|Tr(D(ρ−σ))|/(C‖ρ−σ‖₁)` it can
//! find and serializes any instance above 1 with everything needed to
//! reproduce it. Three weight families are searched separately:
//!
//! - `general`: `C_{kj}` uniform on `[0, 1]`, `C = 1`;
//! - `extremal`: for each pair, the 0/1 weights maximizing the ratio
//!   (the indicator of the positive, or of the negative, terms);
//! - `modular`: `C_{kj} = (t + μ_k/λ_j)⁻¹`, `C = (t + μ_min/λ_max)⁻¹`.

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{trace_norm, CMatrix, HermitianMatrix, LinalgError, C64};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::states::{
    random_classical_pair, random_pair, random_unitary, unitary_from_qr, DensityMatrix,
    PairDocument, StateError, StatePair,
};

/// Ratios above `1 + VIOLATION_TOL` are reported as violations.
pub const VIOLATION_TOL: f64 = 1e-10;
/// Slack allowed in the proven cases.
pub const LEMMA_TOL: f64 = 1e-10;
const BASIS_TOL: f64 = 1e-12;
const ZERO_DISTANCE: f64 = 1e-12;
const MAX_STORED_VIOLATIONS: usize = 100;

#[derive(Debug, Error)]
pub enum ConjectureError {
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Weights `C_{kj}` (row `k` indexes σ's basis, column `j` indexes ρ's) with
/// their cap and the two bases they refer to (as matrix columns).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOverlapFunctional {
    pub c_entries: DMatrix<f64>,
    pub c_cap: f64,
    pub psi: CMatrix,
    pub phi: CMatrix,
}

impl WeightedOverlapFunctional {
    pub fn new(
        c_entries: DMatrix<f64>,
        c_cap: f64,
        psi: CMatrix,
        phi: CMatrix,
    ) -> Result<Self, ConjectureError> {
        let d = psi.nrows();
        if c_entries.shape() != (d, d) || psi.shape() != (d, d) || phi.shape() != (d, d) {
            return Err(ConjectureError::Weights(format!(
                "expected {d}x{d} weights and bases"
            )));
        }
        if !(c_cap.is_finite() && c_cap > 0.0) {
            return Err(ConjectureError::Weights(format!(
                "cap {c_cap} must be positive"
            )));
        }
        let tol = 1e-12 * c_cap;
        if let Some(bad) = c_entries
            .iter()
            .find(|&&c| !(c >= -tol && c <= c_cap + tol))
        {
            return Err(ConjectureError::Weights(format!(
                "entry {bad} outside [0, {c_cap}]"
            )));
        }
        Ok(Self {
            c_entries,
            c_cap,
            psi,
            phi,
        })
    }

    /// Weights on the eigenbases of `pair`.
    pub fn for_pair(
        pair: &StatePair,
        c_entries: DMatrix<f64>,
        c_cap: f64,
    ) -> Result<Self, ConjectureError> {
        Self::new(
            c_entries,
            c_cap,
            pair.rho.eigenvectors().clone(),
            pair.sigma.eigenvectors().clone(),
        )
    }

    pub fn dim(&self) -> usize {
        self.psi.nrows()
    }

    /// `D = Ψ M Φ†` with `M_{jk} = C_{kj} ⟨ψ_j|φ_k⟩`.
    pub fn d_matrix(&self) -> CMatrix {
        let g = self.psi.adjoint() * &self.phi;
        let m = CMatrix::from_fn(self.dim(), self.dim(), |j, k| {
            g[(j, k)] * self.c_entries[(k, j)]
        });
        &self.psi * m * self.phi.adjoint()
    }
}

/// `Σ_{kj} C_{kj}(λ_j − μ_k) O_{kj}`.
fn weighted_sum(c: &DMatrix<f64>, lambda: &[f64], mu: &[f64], overlaps: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for k in 0..mu.len() {
        for j in 0..lambda.len() {
            s += c[(k, j)] * (lambda[j] - mu[k]) * overlaps[(k, j)];
        }
    }
    s
}

fn check_bases(w: &WeightedOverlapFunctional, pair: &StatePair) -> Result<(), ConjectureError> {
    let dev = |a: &CMatrix, b: &CMatrix| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if w.dim() != pair.dim() {
        return Err(ConjectureError::Hypothesis("dimension mismatch".into()));
    }
    if dev(&w.psi, pair.rho.eigenvectors()) > BASIS_TOL
        || dev(&w.phi, pair.sigma.eigenvectors()) > BASIS_TOL
    {
        return Err(ConjectureError::Hypothesis(
            "weights do not refer to the pair's eigenbases".into(),
        ));
    }
    Ok(())
}

/// `Tr(D(ρ−σ))` by the weighted overlap sum.
pub fn functional_value(
    w: &WeightedOverlapFunctional,
    pair: &StatePair,
) -> Result<f64, ConjectureError> {
    check_bases(w, pair)?;
    Ok(weighted_sum(
        &w.c_entries,
        pair.rho.eigenvalues(),
        pair.sigma.eigenvalues(),
        &pair.overlaps,
    ))
}

/// `Tr(D(ρ−σ))` from the explicit matrix `D`.
pub fn functional_value_explicit(w: &WeightedOverlapFunctional, pair: &StatePair) -> C64 {
    let diff = pair.rho.matrix().matrix() - pair.sigma.matrix().matrix();
    (w.d_matrix() * diff).trace()
}

/// `|Tr(D(ρ−σ))| / (C‖ρ−σ‖₁)`, 0 for equal states.
pub fn conjecture_ratio(
    w: &WeightedOverlapFunctional,
    pair: &StatePair,
) -> Result<f64, ConjectureError> {
    let v = functional_value(w, pair)?;
    let td = pair.summary().trace_distance_1;
    Ok(if td < ZERO_DISTANCE {
        0.0
    } else {
        v.abs() / (w.c_cap * td)
    })
}

/// Modular weights `C_{kj} = (t + μ_k/λ_j)⁻¹` with cap `(t + μ_min/λ_max)⁻¹`.
pub fn modular_weight_matrix(
    pair: &StatePair,
    t: f64,
) -> Result<WeightedOverlapFunctional, ConjectureError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(ConjectureError::Weights(format!(
            "t = {t} must be positive"
        )));
    }
    if !pair.rho.is_strictly_positive() {
        return Err(ConjectureError::Hypothesis(
            "rho must be strictly positive".into(),
        ));
    }
    let (c, cap) = modular_weights(pair.rho.eigenvalues(), pair.sigma.eigenvalues(), t);
    WeightedOverlapFunctional::for_pair(pair, c, cap)
}

fn modular_weights(lambda: &[f64], mu: &[f64], t: f64) -> (DMatrix<f64>, f64) {
    let d = lambda.len();
    let c = DMatrix::from_fn(d, d, |k, j| 1.0 / (t + mu[k].max(0.0) / lambda[j]));
    let lam_max = lambda.iter().copied().fold(f64::MIN, f64::max);
    let mu_min = mu.iter().copied().fold(f64::MAX, f64::min).max(0.0);
    (c, 1.0 / (t + mu_min / lam_max))
}

/// 0/1 weights selecting the positive terms, or the negative ones when those
/// dominate. Maximizes the ratio over all weights with cap 1.
pub fn extremal_weight_matrix(pair: &StatePair) -> WeightedOverlapFunctional {
    let c = extremal_weights(
        pair.rho.eigenvalues(),
        pair.sigma.eigenvalues(),
        &pair.overlaps,
    );
    WeightedOverlapFunctional::for_pair(pair, c, 1.0).expect("0/1 weights are valid")
}

fn extremal_weights(lambda: &[f64], mu: &[f64], overlaps: &DMatrix<f64>) -> DMatrix<f64> {
    let d = lambda.len();
    let term = |k: usize, j: usize| (lambda[j] - mu[k]) * overlaps[(k, j)];
    let (mut pos, mut neg) = (0.0, 0.0);
    for k in 0..d {
        for j in 0..d {
            let x = term(k, j);
            if x > 0.0 {
                pos += x;
            } else {
                neg -= x;
            }
        }
    }
    let sign = if pos >= neg { 1.0 } else { -1.0 };
    DMatrix::from_fn(d, d, |k, j| if sign * term(k, j) > 0.0 { 1.0 } else { 0.0 })
}

// ---------------------------------------------------------------------------
// Proven cases

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaCase {
    /// `X` diagonal in either basis.
    Diagonal,
    /// `X` a traceless 2×2 Hermitian matrix.
    QubitTraceless,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn is_diagonal_in(x: &HermitianMatrix, basis: &CMatrix) -> bool {
    let m = basis.adjoint() * x.matrix() * basis;
    let scale = x.frobenius_norm().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm() <= 1e-10 * scale))
}

/// `|Tr(DX)| ≤ C‖X‖₁` for `X` satisfying `case`.
pub fn lemma32_check(
    w: &WeightedOverlapFunctional,
    x: &HermitianMatrix,
    case: LemmaCase,
) -> Result<LemmaOutcome, ConjectureError> {
    if x.dim() != w.dim() {
        return Err(ConjectureError::Hypothesis("dimension mismatch".into()));
    }
    match case {
        LemmaCase::Diagonal => {
            if !is_diagonal_in(x, &w.psi) && !is_diagonal_in(x, &w.phi) {
                return Err(ConjectureError::Hypothesis(
                    "X is not diagonal in either basis".into(),
                ));
            }
        }
        LemmaCase::QubitTraceless => {
            if x.dim() != 2 {
                return Err(ConjectureError::Hypothesis("X must be 2x2".into()));
            }
            if x.trace().abs() > 1e-12 * x.frobenius_norm().max(1.0) {
                return Err(ConjectureError::Hypothesis("X must be traceless".into()));
            }
        }
    }
    let lhs = (w.d_matrix() * x.matrix()).trace().norm();
    let rhs = w.c_cap * trace_norm(x)?;
    Ok(LemmaOutcome {
        lhs,
        rhs,
        holds: lhs <= rhs + LEMMA_TOL * rhs.max(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaSweep {
    pub trials: u64,
    pub violations: u64,
    /// `max |Tr(DX)| / (C‖X‖₁)`.
    pub max_ratio: f64,
}

fn gaussian(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_weights(d: usize, rng: &mut Rng) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| rng.random::<f64>())
}

/// One random instance of the overlap inequality: random bases, uniform weights with
/// `C = 1`, and a random `X` of the given case.
pub fn lemma32_instance(
    case: LemmaCase,
    dim: usize,
    seed: u64,
) -> Result<(WeightedOverlapFunctional, HermitianMatrix), ConjectureError> {
    let mut rng = rng_from_seed(seed);
    let d = if case == LemmaCase::QubitTraceless {
        2
    } else {
        dim
    };
    let psi = random_unitary(d, &mut rng);
    let phi = random_unitary(d, &mut rng);
    let w = WeightedOverlapFunctional::new(random_weights(d, &mut rng), 1.0, psi, phi)?;
    let x = match case {
        LemmaCase::Diagonal => {
            let diag: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
            let basis = if rng.random::<bool>() { &w.psi } else { &w.phi };
            HermitianMatrix::from_spectrum(&diag, basis)
        }
        LemmaCase::QubitTraceless => random_traceless_qubit(&mut rng),
    };
    Ok((w, x))
}

fn random_traceless_qubit(rng: &mut Rng) -> HermitianMatrix {
    let (a, b, c) = (gaussian(rng), gaussian(rng), gaussian(rng));
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(a, 0.0),
            C64::new(b, c),
            C64::new(b, -c),
            C64::new(-a, 0.0),
        ],
    );
    HermitianMatrix::new(m).expect("Hermitian by construction")
}

/// Overlap-inequality checks on `trials` random instances; diagonal instances cycle
/// through `dims`.
pub fn lemma32_sweep(
    case: LemmaCase,
    dims: &[usize],
    trials: u64,
    seed: u64,
) -> Result<LemmaSweep, ConjectureError> {
    let results: Result<Vec<LemmaOutcome>, ConjectureError> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let d = dims[(i % dims.len() as u64) as usize];
            let (w, x) = lemma32_instance(case, d, derive_seed(seed, d, i))?;
            lemma32_check(&w, &x, case)
        })
        .collect();
    let results = results?;
    Ok(LemmaSweep {
        trials,
        violations: results.iter().filter(|o| !o.holds).count() as u64,
        max_ratio: results
            .iter()
            .map(|o| if o.rhs > 0.0 { o.lhs / o.rhs } else { 0.0 })
            .fold(0.0, f64::max),
    })
}

/// `(‖X‖₁², 2 Σ|x_ij|²)` for a traceless 2×2 Hermitian `X`.
pub fn traceless_qubit_norm_identity(x: &HermitianMatrix) -> Result<(f64, f64), ConjectureError> {
    let tn = trace_norm(x)?;
    let hs: f64 = x.matrix().iter().map(|z| z.norm_sqr()).sum();
    Ok((tn * tn, 2.0 * hs))
}

/// Largest relative mismatch of the identity over random traceless qubits.
pub fn traceless_identity_sweep(trials: u64, seed: u64) -> Result<f64, ConjectureError> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let x = random_traceless_qubit(&mut rng_from_seed(derive_seed(seed, 2, i)));
            let (a, b) = traceless_qubit_norm_identity(&x)?;
            Ok((a - b).abs() / b.max(f64::MIN_POSITIVE))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

// ---------------------------------------------------------------------------
// Search

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    HillClimb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    General,
    Extremal,
    Modular,
}

impl WeightFamily {
    fn stream(self) -> u64 {
        match self {
            WeightFamily::General => 1,
            WeightFamily::Extremal => 2,
            WeightFamily::Modular => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub dims: Vec<usize>,
    /// Random-phase trials per family, cycling through `dims`.
    pub trials: u64,
    /// Hill-climb restarts per family, cycling through `dims`.
    pub restarts: u64,
    pub steps: u64,
    pub step_size: f64,
    /// A restart stops after this many consecutive non-improving steps.
    pub plateau: u64,
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    pub families: Vec<WeightFamily>,
    /// Trials per sanity floor (qubits, commuting pairs).
    pub sanity_trials: u64,
    pub sanity_commuting_dim: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            dims: vec![3, 4, 5, 6],
            trials: 100_000,
            restarts: 100,
            steps: 200,
            step_size: 0.05,
            plateau: 30,
            seed: 0,
            strategies: vec![Strategy::Random, Strategy::HillClimb],
            families: vec![
                WeightFamily::General,
                WeightFamily::Extremal,
                WeightFamily::Modular,
            ],
            sanity_trials: 10_000,
            sanity_commuting_dim: 6,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConjectureError> {
        let bad = |m: &str| Err(ConjectureError::Config(m.into()));
        if self.dims.is_empty() {
            return bad("dims must be nonempty");
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 3) {
            return Err(ConjectureError::Config(format!(
                "dimension {d} is a proven case; search dims must be >= 3 (d = 2 runs as a sanity floor)"
            )));
        }
        if self.strategies.is_empty() || self.families.is_empty() {
            return bad("strategies and families must be nonempty");
        }
        if self.strategies.contains(&Strategy::Random) && self.trials == 0 {
            return bad("trials must be >= 1 for the random strategy");
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad("step_size must be positive");
        }
        if self.sanity_commuting_dim < 2 {
            return bad("sanity_commuting_dim must be >= 2");
        }
        Ok(())
    }
}

/// Everything needed to rebuild an instance and recompute its ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub family: WeightFamily,
    pub dim: usize,
    pub origin: String,
    /// Seed of the stream that produced the starting instance.
    pub stream_seed: u64,
    pub ratio: f64,
    /// Ratio recomputed from the stored matrices through the explicit `D`.
    pub ratio_check: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Basis vectors as columns, row-major `[re, im]`.
    pub psi: Vec<[f64; 2]>,
    pub phi: Vec<[f64; 2]>,
    /// `c_entries[k][j]`.
    pub c_entries: Vec<Vec<f64>>,
    pub c_cap: f64,
    pub t: Option<f64>,
    pub pair: PairDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimMax {
    pub dim: usize,
    pub trials: u64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub family: WeightFamily,
    pub trial_count: u64,
    pub restarts: u64,
    pub max_ratio_random: f64,
    pub max_ratio: f64,
    pub argmax_instance: Option<InstanceRecord>,
    pub violation_count: u64,
    pub violations: Vec<InstanceRecord>,
    pub per_dim: Vec<DimMax>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityFloor {
    pub label: String,
    pub family: WeightFamily,
    pub trials: u64,
    pub restarts: u64,
    pub max_ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub trial_count: u64,
    pub config: SearchConfig,
    pub max_ratio: f64,
    pub argmax_instance: Option<InstanceRecord>,
    /// Non-empty iff `max_ratio > 1 + VIOLATION_TOL`.
    pub violations: Vec<InstanceRecord>,
    pub families: Vec<FamilyRecord>,
    pub sanity: Vec<SanityFloor>,
}

impl SearchRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

/// A point of the search space: spectra, bases and weight parameters.
#[derive(Debug, Clone)]
struct Instance {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    psi: CMatrix,
    phi: CMatrix,
    c: DMatrix<f64>,
    cap: f64,
    t: f64,
}

fn log_uniform_t(rng: &mut Rng) -> f64 {
    10f64.powf(rng.random_range(-3.0..3.0))
}

impl Instance {
    fn from_pair(pair: &StatePair, family: WeightFamily, rng: &mut Rng) -> Self {
        let d = pair.dim();
        let (c, t) = match family {
            WeightFamily::General => (random_weights(d, rng), 1.0),
            WeightFamily::Extremal => (DMatrix::zeros(d, d), 1.0),
            WeightFamily::Modular => (DMatrix::zeros(d, d), log_uniform_t(rng)),
        };
        Self {
            lambda: pair.rho.eigenvalues().to_vec(),
            mu: pair.sigma.eigenvalues().to_vec(),
            psi: pair.rho.eigenvectors().clone(),
            phi: pair.sigma.eigenvectors().clone(),
            c,
            cap: 1.0,
            t,
        }
    }

    fn dim(&self) -> usize {
        self.lambda.len()
    }

    fn overlaps(&self) -> DMatrix<f64> {
        let g = self.phi.adjoint() * &self.psi;
        g.map(|z| z.norm_sqr())
    }

    fn trace_distance(&self) -> Result<f64, LinalgError> {
        let rho = HermitianMatrix::from_spectrum(&self.lambda, &self.psi);
        let sigma = HermitianMatrix::from_spectrum(&self.mu, &self.phi);
        trace_norm(&rho.sub(&sigma)?)
    }

    /// Sets the family's weights and returns the ratio.
    fn evaluate(&mut self, family: WeightFamily) -> Result<f64, LinalgError> {
        let o = self.overlaps();
        match family {
            WeightFamily::General => self.cap = 1.0,
            WeightFamily::Extremal => {
                self.c = extremal_weights(&self.lambda, &self.mu, &o);
                self.cap = 1.0;
            }
            WeightFamily::Modular => {
                let (c, cap) = modular_weights(&self.lambda, &self.mu, self.t);
                self.c = c;
                self.cap = cap;
            }
        }
        let td = self.trace_distance()?;
        if td < ZERO_DISTANCE {
            return Ok(0.0);
        }
        Ok(weighted_sum(&self.c, &self.lambda, &self.mu, &o).abs() / (self.cap * td))
    }

    fn jitter_spectrum(p: &[f64], step: f64, rng: &mut Rng) -> Vec<f64> {
        let v: Vec<f64> = p
            .iter()
            .map(|&x| x * (step * gaussian(rng)).exp())
            .collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    fn jitter_unitary(u: &CMatrix, step: f64, rng: &mut Rng) -> CMatrix {
        let d = u.nrows();
        let g = CMatrix::from_fn(d, d, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            C64::new(id + step * gaussian(rng), step * gaussian(rng))
        });
        u * unitary_from_qr(g)
    }

    fn jitter(&self, family: WeightFamily, step: f64, rng: &mut Rng) -> Self {
        let mut next = self.clone();
        next.lambda = Self::jitter_spectrum(&self.lambda, step, rng);
        next.mu = Self::jitter_spectrum(&self.mu, step, rng);
        next.psi = Self::jitter_unitary(&self.psi, step, rng);
        next.phi = Self::jitter_unitary(&self.phi, step, rng);
        match family {
            WeightFamily::General => {
                next.c = self.c.map(|c| (c + step * gaussian(rng)).clamp(0.0, 1.0));
            }
            WeightFamily::Modular => {
                next.t = (self.t * (step * gaussian(rng)).exp()).clamp(1e-6, 1e6);
            }
            WeightFamily::Extremal => {}
        }
        next
    }

    /// Ratio through the explicit matrix `D` built from the stored data.
    fn explicit_ratio(&self) -> Result<f64, LinalgError> {
        let w = WeightedOverlapFunctional {
            c_entries: self.c.clone(),
            c_cap: self.cap,
            psi: self.psi.clone(),
            phi: self.phi.clone(),
        };
        let rho = HermitianMatrix::from_spectrum(&self.lambda, &self.psi);
        let sigma = HermitianMatrix::from_spectrum(&self.mu, &self.phi);
        let diff = rho.sub(&sigma)?;
        let td = trace_norm(&diff)?;
        if td < ZERO_DISTANCE {
            return Ok(0.0);
        }
        Ok((w.d_matrix() * diff.matrix()).trace().norm() / (self.cap * td))
    }

    fn record(
        &self,
        family: WeightFamily,
        ratio: f64,
        origin: String,
        stream_seed: u64,
    ) -> Result<InstanceRecord, ConjectureError> {
        let flat = |m: &CMatrix| -> Vec<[f64; 2]> {
            let d = m.nrows();
            (0..d * d)
                .map(|i| m[(i / d, i % d)])
                .map(|z| [z.re, z.im])
                .collect()
        };
        let rho = DensityMatrix::from_spectrum(&self.lambda, &self.psi)?;
        let sigma = DensityMatrix::from_spectrum(&self.mu, &self.phi)?;
        let pair = StatePair::new(rho, sigma)?
            .with_seed(stream_seed)
            .with_tag(origin.clone());
        let d = self.dim();
        Ok(InstanceRecord {
            family,
            dim: d,
            origin,
            stream_seed,
            ratio,
            ratio_check: self.explicit_ratio()?,
            lambda: self.lambda.clone(),
            mu: self.mu.clone(),
            psi: flat(&self.psi),
            phi: flat(&self.phi),
            c_entries: (0..d)
                .map(|k| (0..d).map(|j| self.c[(k, j)]).collect())
                .collect(),
            c_cap: self.cap,
            t: (family == WeightFamily::Modular).then_some(self.t),
            pair: pair.to_document(),
        })
    }
}

/// Rebuilds the instance stored in a record and recomputes its ratio by the
/// weighted sum.
pub fn replay(record: &InstanceRecord) -> Result<f64, ConjectureError> {
    let d = record.dim;
    let unflat =
        |v: &[[f64; 2]]| CMatrix::from_fn(d, d, |i, j| C64::new(v[i * d + j][0], v[i * d + j][1]));
    let mut inst = Instance {
        lambda: record.lambda.clone(),
        mu: record.mu.clone(),
        psi: unflat(&record.psi),
        phi: unflat(&record.phi),
        c: DMatrix::from_fn(d, d, |k, j| record.c_entries[k][j]),
        cap: record.c_cap,
        t: record.t.unwrap_or(1.0),
    };
    Ok(inst.evaluate(record.family)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Random,
    Commuting,
}

fn draw(
    source: Source,
    family: WeightFamily,
    dim: usize,
    seed: u64,
) -> Result<Instance, ConjectureError> {
    let mut rng = rng_from_seed(seed);
    let pair = match source {
        Source::Random => random_pair(dim, &mut rng)?,
        Source::Commuting => random_classical_pair(dim, &mut rng)?,
    };
    Ok(Instance::from_pair(&pair, family, &mut rng))
}

/// Trial index, instance, ratio and stream seed of a violating draw.
type RandomHit = (u64, Instance, f64, u64);
/// Step index, instance and ratio of a violating hill-climb state.
type ClimbHit = (u64, Instance, f64);
/// Dimension, ratio, best candidate and violation (if any) of one draw.
type TrialOutcome = (usize, f64, Option<Best>, Option<RandomHit>);

struct Best {
    ratio: f64,
    /// Tie-break key, smaller wins.
    key: (u64, u64),
    instance: Instance,
    origin: String,
    stream_seed: u64,
}

fn better(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.ratio > a.ratio || (b.ratio == a.ratio && b.key < a.key) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

struct Phase {
    best: Option<Best>,
    violations: Vec<(u64, u64, Instance, f64, String, u64)>,
    violation_count: u64,
    per_dim: Vec<DimMax>,
}

fn random_phase(
    source: Source,
    family: WeightFamily,
    dims: &[usize],
    trials: u64,
    family_seed: u64,
) -> Result<Phase, ConjectureError> {
    let results: Result<Vec<TrialOutcome>, ConjectureError> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let dim = dims[(i % dims.len() as u64) as usize];
            let seed = derive_seed(family_seed, dim, i);
            let mut inst = draw(source, family, dim, seed)?;
            let ratio = inst.evaluate(family)?;
            let violation = (ratio > 1.0 + VIOLATION_TOL).then(|| (i, inst.clone(), ratio, seed));
            let best = Best {
                ratio,
                key: (0, i),
                instance: inst,
                origin: format!("random:trial={i}"),
                stream_seed: seed,
            };
            Ok((dim, ratio, Some(best), violation))
        })
        .collect();
    let mut best = None;
    let mut violations = Vec::new();
    let mut violation_count = 0;
    let mut per_dim: Vec<DimMax> = dims
        .iter()
        .map(|&dim| DimMax {
            dim,
            trials: 0,
            max_ratio: 0.0,
        })
        .collect();
    for (dim, ratio, b, v) in results? {
        best = better(best, b);
        let entry = per_dim
            .iter_mut()
            .find(|e| e.dim == dim)
            .expect("dim listed");
        entry.trials += 1;
        entry.max_ratio = entry.max_ratio.max(ratio);
        if let Some((i, inst, r, seed)) = v {
            violation_count += 1;
            violations.push((0, i, inst, r, format!("random:trial={i}"), seed));
        }
    }
    Ok(Phase {
        best,
        violations,
        violation_count,
        per_dim,
    })
}

fn climb(
    start: Instance,
    family: WeightFamily,
    config: &SearchConfig,
    rng: &mut Rng,
) -> Result<(Instance, f64, u64, Vec<ClimbHit>), ConjectureError> {
    let mut current = start;
    let mut ratio = current.evaluate(family)?;
    let mut best_step = 0;
    let mut since = 0;
    let mut violations = Vec::new();
    for step in 1..=config.steps {
        let mut cand = current.jitter(family, config.step_size, rng);
        let r = cand.evaluate(family)?;
        if r > ratio {
            current = cand;
            ratio = r;
            best_step = step;
            since = 0;
            if r > 1.0 + VIOLATION_TOL {
                violations.push((step, current.clone(), r));
            }
        } else {
            since += 1;
            if since >= config.plateau {
                break;
            }
        }
    }
    Ok((current, ratio, best_step, violations))
}

fn hill_climb_phase(
    source: Source,
    family: WeightFamily,
    dims: &[usize],
    config: &SearchConfig,
    family_seed: u64,
    seed_instance: Option<&Best>,
) -> Result<Phase, ConjectureError> {
    type Out = (Option<Best>, Vec<(u64, u64, Instance, f64, String, u64)>);
    let results: Result<Vec<Out>, ConjectureError> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let dim = dims[(r % dims.len() as u64) as usize];
            let seed = derive_seed(family_seed ^ 0x5EED_C11B, dim, r);
            let mut rng = rng_from_seed(seed);
            let (start, stream_seed) = match (r, seed_instance) {
                (0, Some(b)) => (b.instance.clone(), b.stream_seed),
                _ => (draw(source, family, dim, seed)?, seed),
            };
            let (inst, ratio, step, viol) = climb(start, family, config, &mut rng)?;
            let origin = format!("hill-climb:restart={r},step={step}");
            let violations = viol
                .into_iter()
                .map(|(s, i, v)| {
                    (
                        1,
                        r,
                        i,
                        v,
                        format!("hill-climb:restart={r},step={s}"),
                        stream_seed,
                    )
                })
                .collect();
            Ok((
                Some(Best {
                    ratio,
                    key: (1, r),
                    instance: inst,
                    origin,
                    stream_seed,
                }),
                violations,
            ))
        })
        .collect();
    let mut best = None;
    let mut violations = Vec::new();
    for (b, v) in results? {
        best = better(best, b);
        violations.extend(v);
    }
    let violation_count = violations.len() as u64;
    Ok(Phase {
        best,
        violations,
        violation_count,
        per_dim: Vec::new(),
    })
}

fn run_family(
    source: Source,
    family: WeightFamily,
    dims: &[usize],
    trials: u64,
    config: &SearchConfig,
    family_seed: u64,
) -> Result<FamilyRecord, ConjectureError> {
    let use_random = config.strategies.contains(&Strategy::Random);
    let use_climb = config.strategies.contains(&Strategy::HillClimb) && source == Source::Random;
    let random = if use_random {
        random_phase(source, family, dims, trials, family_seed)?
    } else {
        Phase {
            best: None,
            violations: Vec::new(),
            violation_count: 0,
            per_dim: Vec::new(),
        }
    };
    let max_ratio_random = random.best.as_ref().map_or(0.0, |b| b.ratio);
    let climbed = if use_climb {
        Some(hill_climb_phase(
            source,
            family,
            dims,
            config,
            family_seed,
            random.best.as_ref(),
        )?)
    } else {
        None
    };

    let mut violation_count = random.violation_count;
    let mut raw = random.violations;
    let mut best = random.best;
    if let Some(c) = climbed {
        violation_count += c.violation_count;
        raw.extend(c.violations);
        best = better(best, c.best);
    }
    raw.sort_by_key(|v| (v.0, v.1));
    raw.truncate(MAX_STORED_VIOLATIONS);
    let violations = raw
        .into_iter()
        .map(|(_, _, inst, r, origin, seed)| inst.record(family, r, origin, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let argmax_instance = match &best {
        Some(b) => Some(
            b.instance
                .record(family, b.ratio, b.origin.clone(), b.stream_seed)?,
        ),
        None => None,
    };
    Ok(FamilyRecord {
        family,
        trial_count: if use_random { trials } else { 0 },
        restarts: if use_climb { config.restarts } else { 0 },
        max_ratio_random,
        max_ratio: best.as_ref().map_or(0.0, |b| b.ratio),
        argmax_instance,
        violation_count,
        violations,
        per_dim: random.per_dim,
    })
}

/// Runs the configured search plus the qubit and commuting sanity floors.
pub fn conjecture_search(config: &SearchConfig) -> Result<SearchRecord, ConjectureError> {
    config.validate()?;
    let mut families = Vec::new();
    for &family in &config.families {
        let family_seed = derive_seed(config.seed, 0, family.stream());
        families.push(run_family(
            Source::Random,
            family,
            &config.dims,
            config.trials,
            config,
            family_seed,
        )?);
    }

    let mut sanity = Vec::new();
    let floor_config = SearchConfig {
        restarts: config.restarts.min(20),
        ..config.clone()
    };
    for &family in &config.families {
        let qubit = run_family(
            Source::Random,
            family,
            &[2],
            config.sanity_trials,
            &floor_config,
            derive_seed(config.seed, 2, 100 + family.stream()),
        )?;
        sanity.push(SanityFloor {
            label: "qubit".into(),
            family,
            trials: qubit.trial_count,
            restarts: qubit.restarts,
            max_ratio: qubit.max_ratio,
            holds: qubit.max_ratio <= 1.0 + VIOLATION_TOL,
        });
        let d = config.sanity_commuting_dim;
        let commuting = run_family(
            Source::Commuting,
            family,
            &[d],
            config.sanity_trials,
            &floor_config,
            derive_seed(config.seed, d, 200 + family.stream()),
        )?;
        sanity.push(SanityFloor {
            label: format!("commuting:d={d}"),
            family,
            trials: commuting.trial_count,
            restarts: commuting.restarts,
            max_ratio: commuting.max_ratio,
            holds: commuting.max_ratio <= 1.0 + VIOLATION_TOL,
        });
    }

    let overall = families
        .iter()
        .filter_map(|f| f.argmax_instance.as_ref())
        .fold(None::<&InstanceRecord>, |acc, r| match acc {
            Some(a) if a.ratio >= r.ratio => Some(a),
            _ => Some(r),
        })
        .cloned();
    let mut violations: Vec<InstanceRecord> = families
        .iter()
        .flat_map(|f| f.violations.iter().cloned())
        .collect();
    violations.truncate(MAX_STORED_VIOLATIONS);
    Ok(SearchRecord {
        seed: config.seed,
        dims: config.dims.clone(),
        trial_count: config.trials,
        config: config.clone(),
        max_ratio: overall.as_ref().map_or(0.0, |r| r.ratio),
        argmax_instance: overall,
        violations,
        families,
        sanity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(d: usize, seed: u64) -> StatePair {
        random_pair(d, &mut rng_from_seed(seed)).unwrap()
    }

    #[test]
    fn functional_dual_paths_agree() {
        for seed in 0..50 {
            let p = pair(2 + (seed as usize % 4), seed);
            let d = p.dim();
            let c = random_weights(d, &mut rng_from_seed(seed + 1000));
            let w = WeightedOverlapFunctional::for_pair(&p, c, 1.0).unwrap();
            let a = functional_value(&w, &p).unwrap();
            let b = functional_value_explicit(&w, &p);
            assert!((a - b.re).abs() < 1e-10 && b.im.abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn trivial_functional_values() {
        let p = pair(3, 4);
        let w =
            WeightedOverlapFunctional::for_pair(&p, DMatrix::from_element(3, 3, 0.7), 1.0).unwrap();
        assert!(functional_value(&w, &p).unwrap().abs() < 1e-14);
        let r = p.rho.clone();
        let same = StatePair::new(r.clone(), r).unwrap();
        let w = WeightedOverlapFunctional::for_pair(
            &same,
            random_weights(3, &mut rng_from_seed(1)),
            1.0,
        )
        .unwrap();
        assert!(functional_value(&w, &same).unwrap().abs() < 1e-14);
        assert_eq!(conjecture_ratio(&w, &same).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let p = pair(3, 4);
        let q = pair(3, 5);
        let w =
            WeightedOverlapFunctional::for_pair(&q, DMatrix::from_element(3, 3, 0.5), 1.0).unwrap();
        assert!(matches!(
            functional_value(&w, &p),
            Err(ConjectureError::Hypothesis(_))
        ));
        assert!(
            WeightedOverlapFunctional::for_pair(&p, DMatrix::from_element(3, 3, 1.5), 1.0).is_err()
        );
    }

    #[test]
    fn modular_weights_examples() {
        let p = pair(4, 8);
        let w = modular_weight_matrix(&p, 1.0).unwrap();
        let max = w.c_entries.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(max, w.c_cap);
        // Largest entry sits at (argmin μ, argmax λ); eigenvalues are descending.
        assert_eq!(w.c_entries[(3, 0)], w.c_cap);

        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let same = StatePair::new(mixed.clone(), mixed).unwrap();
        let w = modular_weight_matrix(&same, 2.0).unwrap();
        assert!(w.c_entries.iter().all(|&c| (c - 1.0 / 3.0).abs() < 1e-15));

        let far = modular_weight_matrix(&p, 1e12).unwrap();
        assert!(far.c_entries.iter().all(|&c| c < 1e-11));
    }

    #[test]
    fn modular_functional_on_qubits_is_bounded() {
        for seed in 0..100 {
            let p = pair(2, seed);
            let w = modular_weight_matrix(&p, 1.0).unwrap();
            let a = functional_value(&w, &p).unwrap();
            assert!((a - functional_value_explicit(&w, &p).re).abs() < 1e-10);
            assert!(conjecture_ratio(&w, &p).unwrap() <= 1.0 + VIOLATION_TOL);
        }
    }

    #[test]
    fn extremal_weights_dominate_random_weights() {
        let p = pair(4, 21);
        let best = conjecture_ratio(&extremal_weight_matrix(&p), &p).unwrap();
        for s in 0..50 {
            let w = WeightedOverlapFunctional::for_pair(
                &p,
                random_weights(4, &mut rng_from_seed(s)),
                1.0,
            )
            .unwrap();
            assert!(conjecture_ratio(&w, &p).unwrap() <= best + 1e-15);
        }
    }

    #[test]
    fn overlap_inequality_examples() {
        let (w, _) = lemma32_instance(LemmaCase::Diagonal, 5, 3).unwrap();
        let zero = HermitianMatrix::zeros(5);
        let o = lemma32_check(&w, &zero, LemmaCase::Diagonal).unwrap();
        assert!(o.holds && o.lhs == 0.0);
        let s = lemma32_sweep(LemmaCase::Diagonal, &[5], 500, 1).unwrap();
        assert_eq!(s.violations, 0);
        let s = lemma32_sweep(LemmaCase::QubitTraceless, &[2], 500, 1).unwrap();
        assert_eq!(s.violations, 0);
        assert!(traceless_identity_sweep(500, 2).unwrap() < 1e-10);
    }

    #[test]
    fn overlap_inequality_hypotheses_are_enforced() {
        let (w, _) = lemma32_instance(LemmaCase::Diagonal, 3, 3).unwrap();
        let x = HermitianMatrix::from_real_rows(&[
            vec![1.0, 0.3, 0.0],
            vec![0.3, 0.0, 0.2],
            vec![0.0, 0.2, -1.0],
        ])
        .unwrap();
        assert!(matches!(
            lemma32_check(&w, &x, LemmaCase::Diagonal),
            Err(ConjectureError::Hypothesis(_))
        ));
        let (w2, _) = lemma32_instance(LemmaCase::QubitTraceless, 2, 3).unwrap();
        let traced = HermitianMatrix::from_real_diagonal(&[1.0, 0.5]);
        assert!(lemma32_check(&w2, &traced, LemmaCase::QubitTraceless).is_err());
    }

    fn small_config() -> SearchConfig {
        SearchConfig {
            dims: vec![3, 4],
            trials: 300,
            restarts: 4,
            steps: 40,
            sanity_trials: 200,
            seed: 5,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn search_is_deterministic_and_replayable() {
        let a = conjecture_search(&small_config()).unwrap();
        let b = conjecture_search(&small_config()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        for f in &a.families {
            let rec = f.argmax_instance.as_ref().unwrap();
            assert!((replay(rec).unwrap() - rec.ratio).abs() < 1e-12);
            assert!((rec.ratio_check - rec.ratio).abs() < 1e-10 * rec.ratio.max(1.0));
            assert!(f.max_ratio >= f.max_ratio_random);
        }
        assert_eq!(a.violations.is_empty(), a.max_ratio <= 1.0 + VIOLATION_TOL);
        for s in &a.sanity {
            assert!(s.holds, "{s:?}");
        }
    }

    #[test]
    fn proven_dimensions_are_rejected() {
        let c = SearchConfig {
            dims: vec![2, 3],
            ..small_config()
        };
        assert!(matches!(
            conjecture_search(&c),
            Err(ConjectureError::Config(_))
        ));
    }
}
