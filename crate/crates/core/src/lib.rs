//! # qre-core
//!
//! Quasi-relative entropies `S_f(ρ‖σ) = Tr(f(Δ_{σ,ρ})ρ)` for operator monotone
//! decreasing `f` on finite-dimensional density matrices, together with the
//! trace-distance continuity bounds that sandwich them.
//!
//! | module | contents |
//! |---|---|
//! | [`linalg`] | Hermitian matrices, Jacobi eigensolver, norms, spectral calculus |
//! | [`states`] | density matrices, state pairs, random generators |
//! | [`omd`] | operator monotone decreasing function descriptors and their integral representations |
//! | [`divergence`] | spectral, direct and superoperator evaluations of `S_f` |
//! | [`bounds`] | lower/upper continuity bounds and sandwich reports |
//! | [`conjecture`] | weighted-overlap trace functional and counterexample search |
//! | [`sweep`] | seeded, parallel verification sweeps |
//! | [`report`] | CSV/JSON rows |
//!
//! All logarithms are natural unless a function says otherwise.

pub mod bounds;
pub mod comparison;
pub mod conjecture;
pub mod divergence;
pub mod extended;
pub mod linalg;
pub mod omd;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod states;
pub mod sweep;

pub use bounds::{BoundKind, BoundReport, LogBase, SandwichReport};
pub use divergence::{DivergenceResult, Method};
pub use linalg::{EigenSystem, HermitianMatrix};
pub use omd::{OmdFunction, ScalarFn};
pub use states::{DensityMatrix, ScalarSummary, StatePair};
