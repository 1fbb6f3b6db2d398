//! Eigenspace projectors, their algebra, and observables with a designated
//! outcome.

use num_complex::Complex64;

use super::eigen::{hermitian_eigen, SpectralDecomposition};
use super::{CMatrix, QcoreError};

const HERMITIAN_TOL: f64 = 1e-12;
const IDEMPOTENT_TOL: f64 = 1e-10;
const TRACE_RANK_TOL: f64 = 1e-8;

/// Tolerance for validating hermiticity of externally supplied observables,
/// relative to `1 + ||H||_F`.
pub const OBSERVABLE_HERMITIAN_TOL: f64 = 1e-10;

/// An orthogonal projector: Hermitian, idempotent, with integer trace equal
/// to its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

impl Projector {
    /// Validates and wraps a projector matrix.
    pub fn new(matrix: CMatrix) -> Result<Self, QcoreError> {
        if !matrix.is_finite() {
            return Err(QcoreError::NonFiniteEntries);
        }
        let herm = matrix.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(QcoreError::NotProjector {
                reason: "not Hermitian",
                deviation: herm,
            });
        }
        let idem = (&(&matrix * &matrix) - &matrix).frobenius_norm();
        if idem > IDEMPOTENT_TOL {
            return Err(QcoreError::NotProjector {
                reason: "not idempotent",
                deviation: idem,
            });
        }
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > TRACE_RANK_TOL || rank < 0.0 {
            return Err(QcoreError::NotProjector {
                reason: "trace is not a nonnegative integer",
                deviation: (trace - rank).abs(),
            });
        }
        Ok(Self {
            matrix,
            rank: rank as usize,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim),
            rank: dim,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim),
            rank: 0,
        }
    }

    /// Sum of outer products of orthonormal columns; trusted constructor for
    /// internally generated frames.
    pub(crate) fn from_orthonormal_columns(dim: usize, columns: &[Vec<Complex64>]) -> Self {
        let mut matrix = CMatrix::zeros(dim);
        for col in columns {
            debug_assert_eq!(col.len(), dim);
            for i in 0..dim {
                for j in 0..dim {
                    let add = col[i] * col[j].conj();
                    matrix.set(i, j, matrix.at(i, j) + add);
                }
            }
        }
        Self {
            matrix,
            rank: columns.len(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// The projector onto the orthogonal complement, `I - P`.
    ///
    /// Off-diagonal entries negate exactly; diagonal entries are `1 - x`,
    /// so a double complement reproduces the original to the last bit except
    /// for diagonal entries below ~1e-16, where one rounding may remain.
    pub fn complement(&self) -> Projector {
        let dim = self.dim();
        let matrix = CMatrix::from_fn(dim, |i, j| {
            if i == j {
                Complex64::new(1.0 - self.matrix.at(i, j).re, -self.matrix.at(i, j).im)
            } else {
                -self.matrix.at(i, j)
            }
        });
        Projector {
            matrix,
            rank: dim - self.rank,
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix.apply(v)
    }
}

/// Builds the projector onto the eigenspace whose eigenvalue cluster matches
/// `outcome` within `cluster_tol` (absolute, in eigenvalue units).
///
/// Fails if no cluster matches, or if more than one does — an ambiguous
/// outcome means the tolerance is too loose for the spectrum at hand.
pub fn projector_for_outcome(
    spec: &SpectralDecomposition,
    outcome: f64,
    cluster_tol: f64,
) -> Result<Projector, QcoreError> {
    let matches: Vec<usize> = (0..spec.clusters().len())
        .filter(|&c| (spec.cluster_value(c) - outcome).abs() <= cluster_tol)
        .collect();
    match matches.as_slice() {
        [] => Err(QcoreError::OutcomeNotFound {
            outcome,
            tol: cluster_tol,
        }),
        [c] => Ok(spec.cluster_projector(*c)),
        _ => Err(QcoreError::AmbiguousOutcome {
            outcome,
            tol: cluster_tol,
            matches: matches.len(),
        }),
    }
}

/// Loewner order test: `true` iff `P <= Q`, i.e. the smallest eigenvalue of
/// `Q - P` is at least `-tol`.
pub fn psd_order(p: &Projector, q: &Projector, tol: f64) -> Result<bool, QcoreError> {
    if p.dim() != q.dim() {
        return Err(QcoreError::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    let diff = &q.matrix - &p.matrix;
    let spec = hermitian_eigen(&diff, super::eigen::DEFAULT_CLUSTER_TOL)?;
    Ok(spec.eigenvalues()[0] >= -tol)
}

/// A Hermitian observable together with the outcome singled out by a Hardy
/// condition. All other outcomes are folded into the complement projector.
#[derive(Clone, Debug)]
pub struct Observable {
    matrix: CMatrix,
    designated: f64,
}

impl Observable {
    /// Validates hermiticity (within [`OBSERVABLE_HERMITIAN_TOL`] relative to
    /// `1 + ||H||_F`) and finiteness. The designated outcome is checked
    /// against the spectrum when the projector is built.
    pub fn new(matrix: CMatrix, designated: f64) -> Result<Self, QcoreError> {
        if !matrix.is_finite() || !designated.is_finite() {
            return Err(QcoreError::NonFiniteEntries);
        }
        let deviation = matrix.hermiticity_error();
        if deviation > OBSERVABLE_HERMITIAN_TOL * (1.0 + matrix.frobenius_norm()) {
            return Err(QcoreError::NotHermitian {
                dim: matrix.dim(),
                deviation,
            });
        }
        Ok(Self { matrix, designated })
    }

    /// Observable with eigenvalue +1 on the image of `p` and -1 on its
    /// complement (`2P - I`), designated outcome +1.
    pub fn dichotomic(p: &Projector) -> Self {
        let matrix = &p.matrix().scaled(2.0) - &CMatrix::identity(p.dim());
        Self {
            matrix,
            designated: 1.0,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn designated(&self) -> f64 {
        self.designated
    }

    /// Eigendecomposition with the given clustering tolerance.
    pub fn spectrum(&self, cluster_tol: f64) -> Result<SpectralDecomposition, QcoreError> {
        hermitian_eigen(&self.matrix, cluster_tol)
    }

    /// Projector onto the eigenspace of the designated outcome. The matching
    /// tolerance is `cluster_tol * max(spectral radius, 1)`, mirroring the
    /// clustering rule.
    pub fn designated_projector(&self, cluster_tol: f64) -> Result<Projector, QcoreError> {
        let spec = self.spectrum(cluster_tol)?;
        let radius = spec
            .eigenvalues()
            .iter()
            .map(|x| x.abs())
            .fold(0.0_f64, f64::max);
        projector_for_outcome(&spec, self.designated, cluster_tol * radius.max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::super::eigen::DEFAULT_CLUSTER_TOL;
    use super::*;

    #[test]
    fn complement_of_basis_projector() {
        let p = Projector::new(CMatrix::diagonal(&[1.0, 0.0, 0.0])).unwrap();
        let c = p.complement();
        assert_eq!(c.matrix(), &CMatrix::diagonal(&[0.0, 1.0, 1.0]));
        assert_eq!(c.rank(), 2);
        // exact round trip on 0/1 diagonals
        assert_eq!(c.complement(), p);
    }

    #[test]
    fn complement_of_identity_is_zero() {
        let id = Projector::identity(4);
        let z = id.complement();
        assert_eq!(z.rank(), 0);
        assert_eq!(z.matrix().frobenius_norm(), 0.0);
    }

    #[test]
    fn complement_sums_to_identity_exactly() {
        // Rank-1 projector with irrational entries.
        let v = [
            Complex64::new(0.5f64.sqrt(), 0.0),
            Complex64::new(0.3f64.sqrt(), 0.0),
            Complex64::new(0.0, 0.2f64.sqrt()),
        ];
        let p = Projector::new(CMatrix::outer(&v)).unwrap();
        let c = p.complement();
        let sum = &(p.matrix().clone()) + c.matrix();
        assert_eq!(sum, CMatrix::identity(3));
        assert_eq!(p.rank() + c.rank(), 3);
    }

    #[test]
    fn projector_validation_rejects_non_idempotent() {
        let m = CMatrix::diagonal(&[0.5, 0.0]);
        assert!(matches!(
            Projector::new(m),
            Err(QcoreError::NotProjector { .. })
        ));
    }

    #[test]
    fn outcome_matching_selects_unique_cluster() {
        let h = CMatrix::diagonal(&[1.0, 0.0, -1.0]);
        let spec = hermitian_eigen(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let p = projector_for_outcome(&spec, 1.0, 1e-8).unwrap();
        assert_eq!(p.matrix(), &CMatrix::diagonal(&[1.0, 0.0, 0.0]));
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn outcome_matching_reports_missing_and_ambiguous() {
        let h = CMatrix::diagonal(&[1.0, 0.0, -1.0]);
        let spec = hermitian_eigen(&h, DEFAULT_CLUSTER_TOL).unwrap();
        assert!(matches!(
            projector_for_outcome(&spec, 0.5, 1e-8),
            Err(QcoreError::OutcomeNotFound { .. })
        ));
        assert!(matches!(
            projector_for_outcome(&spec, 0.5, 0.6),
            Err(QcoreError::AmbiguousOutcome { .. })
        ));
    }

    #[test]
    fn near_degenerate_pair_yields_rank_two_projector() {
        let h = CMatrix::diagonal(&[0.999999999, 1.0, 3.0]);
        let spec = hermitian_eigen(&h, 1e-6).unwrap();
        let p = projector_for_outcome(&spec, 1.0, 1e-6).unwrap();
        assert_eq!(p.rank(), 2);
        let idem = (&(p.matrix() * p.matrix()) - p.matrix()).frobenius_norm();
        assert!(idem < 1e-10);
    }

    #[test]
    fn psd_order_on_nested_diagonal_projectors() {
        let small = Projector::new(CMatrix::diagonal(&[1.0, 0.0, 0.0])).unwrap();
        let big = Projector::new(CMatrix::diagonal(&[1.0, 1.0, 0.0])).unwrap();
        assert!(psd_order(&small, &big, 1e-10).unwrap());
        assert!(!psd_order(&big, &small, 1e-10).unwrap());
        // reflexive
        assert!(psd_order(&small, &small, 1e-10).unwrap());
    }

    #[test]
    fn psd_order_dimension_mismatch() {
        let p = Projector::identity(2);
        let q = Projector::identity(3);
        assert!(matches!(
            psd_order(&p, &q, 1e-10),
            Err(QcoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn observable_rejects_non_hermitian_input() {
        let m = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            Observable::new(m, 1.0),
            Err(QcoreError::NotHermitian { .. })
        ));
    }

    #[test]
    fn dichotomic_observable_recovers_projector() {
        let v = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        let p = Projector::new(CMatrix::outer(&v)).unwrap();
        let obs = Observable::dichotomic(&p);
        let q = obs.designated_projector(DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(q.rank(), 1);
        assert!((&q.matrix().clone() - p.matrix()).frobenius_norm() < 1e-12);
    }
}
