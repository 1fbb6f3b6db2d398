//! Numerical laboratory for two-time Hardy tests on d-level quantum systems.
//!
//! A single system is measured projectively at two times. Four joint
//! probabilities — three required to vanish, one required to stay positive —
//! separate quantum mechanics from every time-local realistic description.
//! This crate computes those probabilities under Lüders (eigenspace
//! projection) measurements, classifies and machine-checks the case analysis
//! behind the 1/4 ceiling on the success probability, reproduces the explicit
//! spin-1 and spin-3/2 constructions that saturate it, searches for violations
//! numerically, and demonstrates that classical deterministic strategies score
//! exactly zero.
//!
//! Module map:
//! - [`qcore`] — dense complex linear algebra and measurement primitives
//!   (Hermitian eigendecomposition, projectors, Born and sequential
//!   probabilities, operator ordering).
//! - [`hardy`] — the four-condition test itself: evaluation, condition-set
//!   classification, refutation certificates, the 1/4 bound, mixtures.
//! - [`spin`] — spin-s operators and the explicit settings that reach 1/4.
//! - [`optimize`] — dimension-independent maximal constructions, parameter
//!   scans, and a derivative-free penalty search for the ceiling.
//! - [`realism`] — exhaustive enumeration of deterministic strategies and the
//!   relaxed linear program showing the classical score is zero.

pub mod hardy;
pub mod optimize;
pub mod qcore;
pub mod realism;
pub mod spin;

pub use qcore::{CMatrix, Observable, Projector, PureState};
