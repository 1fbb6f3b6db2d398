//! Dense complex linear algebra and projective-measurement primitives.
//!
//! Everything downstream is built from four pieces: square complex matrices
//! ([`CMatrix`]), normalized state vectors ([`PureState`]), Hermitian
//! eigendecompositions ([`SpectralDecomposition`]) and eigenspace projectors
//! ([`Projector`]). All values are immutable after construction and all
//! operations are pure functions of their inputs.

mod cmatrix;
mod eigen;
mod projector;
mod state;

pub use cmatrix::CMatrix;
pub use eigen::{hermitian_eigen, SpectralDecomposition, DEFAULT_CLUSTER_TOL};
pub use projector::{projector_for_outcome, psd_order, Observable, Projector};
pub use state::{born_prob, born_prob_raw, sequential_prob, sequential_prob_raw, PureState};

use thiserror::Error;

/// Errors from the linear-algebra and measurement layer.
#[derive(Debug, Clone, Error)]
pub enum QcoreError {
    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFiniteEntries,
    #[error("matrix of dimension {dim} is not Hermitian: ||H - H'|| = {deviation:e}")]
    NotHermitian { dim: usize, deviation: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("no eigenvalue cluster within {tol:e} of outcome {outcome}")]
    OutcomeNotFound { outcome: f64, tol: f64 },
    #[error(
        "outcome {outcome} matches {matches} distinct eigenvalue clusters (tolerance {tol:e})"
    )]
    AmbiguousOutcome {
        outcome: f64,
        tol: f64,
        matches: usize,
    },
    #[error("state vector has norm {norm} (must be 1 within {tol:e})")]
    NotNormalized { norm: f64, tol: f64 },
    #[error("cannot normalize a (near-)zero vector: norm = {norm:e}")]
    ZeroVector { norm: f64 },
    #[error("matrix is not a projector: {reason} (deviation {deviation:e})")]
    NotProjector {
        reason: &'static str,
        deviation: f64,
    },
    #[error("empty matrix or vector")]
    Empty,
}
