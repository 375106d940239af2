//! Density matrices, state pairs and their scalar summaries.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigh, trace_norm, CMatrix, EigenSystem, HermitianMatrix, LinalgError, C64};

/// An eigenvalue at or below this value counts as zero.
pub const ZERO_EIGENVALUE: f64 = 1e-10;
/// Allowed deviation of the trace from 1.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for a state.
pub const NEGATIVITY_TOL: f64 = 1e-12;
/// Row/column sum tolerance for the overlap matrix.
pub const STOCHASTIC_TOL: f64 = 1e-10;
/// Frobenius norm of `[ρ, σ]` below which a pair counts as commuting.
pub const COMMUTING_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("trace is {0}, expected 1")]
    Trace(f64),
    #[error("negative eigenvalue {0:e}")]
    Negative(f64),
    #[error("states have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("overlap matrix is not doubly stochastic (deviation {0:e})")]
    NotDoublyStochastic(f64),
    #[error("invalid dimension {0}: {1}")]
    Dimension(usize, &'static str),
    #[error("malformed state document: {0}")]
    Document(String),
}

/// A validated density matrix with its cached spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    spectral: EigenSystem,
}

impl DensityMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self, StateError> {
        let tr = matrix.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(StateError::Trace(tr));
        }
        let spectral = eigh(&matrix)?;
        let min = *spectral.values.last().expect("dimension >= 1");
        if min < -NEGATIVITY_TOL {
            return Err(StateError::Negative(min));
        }
        Ok(Self { matrix, spectral })
    }

    /// `Σ_j p_j |v_j⟩⟨v_j|` for an orthonormal set of columns `basis`.
    pub fn from_spectrum(probabilities: &[f64], basis: &CMatrix) -> Result<Self, StateError> {
        if probabilities.len() != basis.ncols() || basis.nrows() != basis.ncols() {
            return Err(StateError::DimensionMismatch(
                probabilities.len(),
                basis.ncols(),
            ));
        }
        Self::new(HermitianMatrix::from_spectrum(probabilities, basis))
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self, StateError> {
        Self::new(HermitianMatrix::from_real_diagonal(probabilities))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self, StateError> {
        if dim == 0 {
            return Err(StateError::Dimension(dim, "must be at least 1"));
        }
        Self::diagonal(&vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &EigenSystem {
        &self.spectral
    }

    /// Descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.values
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.spectral.vectors
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.spectral.values[0]
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        *self.spectral.values.last().unwrap()
    }

    /// Smallest eigenvalue above [`ZERO_EIGENVALUE`].
    pub fn smallest_nonzero_eigenvalue(&self) -> f64 {
        self.spectral
            .values
            .iter()
            .rev()
            .copied()
            .find(|&x| x > ZERO_EIGENVALUE)
            .expect("a trace-one state has a nonzero eigenvalue")
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.smallest_eigenvalue() > ZERO_EIGENVALUE
    }

    pub fn rank(&self) -> usize {
        self.spectral
            .values
            .iter()
            .filter(|&&x| x > ZERO_EIGENVALUE)
            .count()
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self, StateError> {
        Self::new(self.matrix.conjugate_by(u))
    }
}

/// Scalar inputs shared by all continuity bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarSummary {
    pub dim: usize,
    /// Largest eigenvalue of ρ.
    pub lambda_rho: f64,
    /// Largest eigenvalue of σ.
    pub lambda_sigma: f64,
    /// Smallest nonzero eigenvalue of ρ.
    pub alpha_rho: f64,
    /// Smallest nonzero eigenvalue of σ.
    pub alpha_sigma: f64,
    /// `min(alpha_rho, alpha_sigma)`.
    pub alpha: f64,
    /// Trace distance `‖ρ−σ‖₁ / 2`.
    pub t: f64,
    /// `‖ρ−σ‖₁`.
    pub trace_distance_1: f64,
    /// `‖ρσ − σρ‖_F`.
    pub commutator_norm: f64,
    pub rho_strictly_positive: bool,
    pub sigma_strictly_positive: bool,
}

impl ScalarSummary {
    pub fn is_commuting(&self) -> bool {
        self.commutator_norm < COMMUTING_TOL
    }

    pub fn is_qubit(&self) -> bool {
        self.dim == 2
    }

    pub fn both_strictly_positive(&self) -> bool {
        self.rho_strictly_positive && self.sigma_strictly_positive
    }
}

/// Two states on the same space with the squared overlaps of their eigenbases.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    /// `overlaps[(k, j)] = |⟨φ_k|ψ_j⟩|²` with `ψ` the eigenvectors of ρ and `φ` those of σ.
    pub overlaps: DMatrix<f64>,
    pub seed: Option<u64>,
    pub tags: Vec<String>,
    summary: ScalarSummary,
}

impl StatePair {
    pub fn new(rho: DensityMatrix, sigma: DensityMatrix) -> Result<Self, StateError> {
        let d = rho.dim();
        if sigma.dim() != d {
            return Err(StateError::DimensionMismatch(d, sigma.dim()));
        }
        let inner = sigma.eigenvectors().adjoint() * rho.eigenvectors();
        let overlaps = DMatrix::from_fn(d, d, |k, j| inner[(k, j)].norm_sqr());
        let mut deviation = 0.0_f64;
        for i in 0..d {
            deviation = deviation
                .max((overlaps.row(i).sum() - 1.0).abs())
                .max((overlaps.column(i).sum() - 1.0).abs());
        }
        if deviation > STOCHASTIC_TOL {
            return Err(StateError::NotDoublyStochastic(deviation));
        }
        let summary = compute_summary(&rho, &sigma)?;
        Ok(Self {
            rho,
            sigma,
            overlaps,
            seed: None,
            tags: Vec::new(),
            summary,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tags.push(tag.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn summary(&self) -> &ScalarSummary {
        &self.summary
    }

    /// The same pair with ρ and σ exchanged.
    pub fn swapped(&self) -> Result<Self, StateError> {
        let mut p = Self::new(self.sigma.clone(), self.rho.clone())?;
        p.seed = self.seed;
        p.tags = self.tags.clone();
        Ok(p)
    }

    /// Joint conjugation `(UρU†, UσU†)`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self, StateError> {
        Self::new(self.rho.conjugate_by(u)?, self.sigma.conjugate_by(u)?)
    }

    pub fn to_document(&self) -> PairDocument {
        PairDocument {
            dim: self.dim(),
            rho: flatten(self.rho.matrix().matrix()),
            sigma: flatten(self.sigma.matrix().matrix()),
            seed: self.seed,
            tags: self.tags.clone(),
        }
    }

    pub fn from_document(doc: &PairDocument) -> Result<Self, StateError> {
        let rho = DensityMatrix::new(HermitianMatrix::new(unflatten(&doc.rho, doc.dim)?)?)?;
        let sigma = DensityMatrix::new(HermitianMatrix::new(unflatten(&doc.sigma, doc.dim)?)?)?;
        let mut pair = Self::new(rho, sigma)?;
        pair.seed = doc.seed;
        pair.tags = doc.tags.clone();
        Ok(pair)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, StateError> {
        let doc: PairDocument =
            serde_json::from_str(s).map_err(|e| StateError::Document(e.to_string()))?;
        Self::from_document(&doc)
    }
}

/// On-disk form of a [`StatePair`]: row-major `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDocument {
    pub dim: usize,
    pub rho: Vec<[f64; 2]>,
    pub sigma: Vec<[f64; 2]>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tags: Vec<String>,
}

fn flatten(m: &CMatrix) -> Vec<[f64; 2]> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn unflatten(entries: &[[f64; 2]], dim: usize) -> Result<CMatrix, StateError> {
    if dim == 0 || entries.len() != dim * dim {
        return Err(StateError::Document(format!(
            "expected {} entries for dim {dim}, found {}",
            dim * dim,
            entries.len()
        )));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = entries[i * dim + j];
        C64::new(re, im)
    }))
}

fn compute_summary(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<ScalarSummary, StateError> {
    let diff = rho.matrix().sub(sigma.matrix())?;
    let trace_distance_1 = trace_norm(&diff)?;
    let (r, s) = (rho.matrix().matrix(), sigma.matrix().matrix());
    let commutator = r * s - s * r;
    let alpha_rho = rho.smallest_nonzero_eigenvalue();
    let alpha_sigma = sigma.smallest_nonzero_eigenvalue();
    Ok(ScalarSummary {
        dim: rho.dim(),
        lambda_rho: rho.largest_eigenvalue(),
        lambda_sigma: sigma.largest_eigenvalue(),
        alpha_rho,
        alpha_sigma,
        alpha: alpha_rho.min(alpha_sigma),
        t: trace_distance_1 / 2.0,
        trace_distance_1,
        commutator_norm: crate::linalg::frobenius(&commutator),
        rho_strictly_positive: rho.is_strictly_positive(),
        sigma_strictly_positive: sigma.is_strictly_positive(),
    })
}

/// Scalar summary of a pair (cached at construction).
pub fn summarize(pair: &StatePair) -> ScalarSummary {
    pair.summary
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with `R`'s diagonal
/// made positive.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    unitary_from_qr(ginibre(dim, rng))
}

pub fn unitary_from_qr(m: CMatrix) -> CMatrix {
    let dim = m.nrows();
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Full-rank state `G G† / Tr(G G†)` with `G` complex Ginibre, redrawn until
/// its smallest eigenvalue exceeds [`ZERO_EIGENVALUE`].
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix, StateError> {
    if dim == 0 {
        return Err(StateError::Dimension(dim, "must be at least 1"));
    }
    loop {
        let g = ginibre(dim, rng);
        let w = &g * g.adjoint();
        let tr: f64 = w.diagonal().iter().map(|z| z.re).sum();
        let h = HermitianMatrix::symmetrized(w * C64::new(1.0 / tr, 0.0));
        // Rounding can leave the trace a few ulps away from 1.
        let h = h.scale(1.0 / h.trace());
        let state = DensityMatrix::new(h)?;
        if state.is_strictly_positive() {
            return Ok(state);
        }
    }
}

/// Two independent [`random_state`]s.
pub fn random_pair<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<StatePair, StateError> {
    let rho = random_state(dim, rng)?;
    let sigma = random_state(dim, rng)?;
    Ok(StatePair::new(rho, sigma)?.with_tag("random"))
}

/// Probability vector uniform on the simplex, entries above [`ZERO_EIGENVALUE`].
pub fn random_spectrum<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let e: Vec<f64> = (0..dim)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let s: f64 = e.iter().sum();
        let p: Vec<f64> = e.iter().map(|x| x / s).collect();
        if p.iter().all(|&x| x > ZERO_EIGENVALUE) {
            return p;
        }
    }
}

/// Two states diagonal in one shared Haar-random basis.
pub fn random_classical_pair<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<StatePair, StateError> {
    if dim == 0 {
        return Err(StateError::Dimension(dim, "must be at least 1"));
    }
    let u = random_unitary(dim, rng);
    let p = random_spectrum(dim, rng);
    let q = random_spectrum(dim, rng);
    let rho = DensityMatrix::from_spectrum(&p, &u)?;
    let sigma = DensityMatrix::from_spectrum(&q, &u)?;
    Ok(StatePair::new(rho, sigma)?.with_tag("commuting"))
}

/// ρ maximally mixed, σ = (1/d)|ψ₁⟩⟨ψ₁| + (1 − 1/d)|ψ₂⟩⟨ψ₂| in the standard basis.
///
/// σ is rank two, so the pair is not strictly positive; `‖ρ−σ‖₁ = 2 − 4/d`.
pub fn remark42_pair(dim: usize) -> Result<StatePair, StateError> {
    if dim < 3 {
        return Err(StateError::Dimension(
            dim,
            "the mixed-vs-rank-two pair needs d >= 3",
        ));
    }
    let d = dim as f64;
    let rho = DensityMatrix::maximally_mixed(dim)?;
    let mut s = vec![0.0; dim];
    s[0] = 1.0 / d;
    s[1] = 1.0 - 1.0 / d;
    let sigma = DensityMatrix::diagonal(&s)?;
    Ok(StatePair::new(rho, sigma)?.with_tag(format!("mixed-vs-rank2:d={dim}")))
}
