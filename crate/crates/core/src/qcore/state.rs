//! Pure states and measurement probabilities.

use num_complex::Complex64;

use super::{Projector, QcoreError};

/// Norm tolerance accepted by [`PureState::new`].
pub const STATE_NORM_TOL: f64 = 1e-12;

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps an already-normalized amplitude vector. The 2-norm must equal 1
    /// within [`STATE_NORM_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, QcoreError> {
        if amplitudes.is_empty() {
            return Err(QcoreError::Empty);
        }
        if !amplitudes
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(QcoreError::NonFiniteEntries);
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(QcoreError::NotNormalized {
                norm,
                tol: STATE_NORM_TOL,
            });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self, QcoreError> {
        if amplitudes.is_empty() {
            return Err(QcoreError::Empty);
        }
        if !amplitudes
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(QcoreError::NonFiniteEntries);
        }
        let norm = vec_norm(&amplitudes);
        if norm < 1e-150 {
            return Err(QcoreError::ZeroVector { norm });
        }
        let scaled = amplitudes.iter().map(|z| z / norm).collect();
        Ok(Self { amplitudes: scaled })
    }

    /// The computational basis state `|k>`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[k] = Complex64::ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }
}

pub(crate) fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(a, b)| a.conj() * b).sum()
}

/// Probability of the outcome projected by `p` when measuring `psi` once:
/// `<psi| P |psi>`, clamped to `[0, 1]`.
pub fn born_prob(psi: &PureState, p: &Projector) -> Result<f64, QcoreError> {
    born_prob_raw(psi, p).map(clamp_unit)
}

/// As [`born_prob`] but without clamping; roundoff can leave the value
/// marginally outside `[0, 1]`.
pub fn born_prob_raw(psi: &PureState, p: &Projector) -> Result<f64, QcoreError> {
    check_dims(psi, p.dim())?;
    // <psi|P|psi> = ||P psi||^2 for idempotent Hermitian P; the norm form is
    // nonnegative by construction.
    Ok(vec_norm(&p.apply(psi.amplitudes())).powi(2))
}

/// Joint probability of obtaining the `first` outcome and then the `second`
/// in back-to-back projective measurements: `<psi| P1 P2 P1 |psi>`, clamped
/// to `[0, 1]`. Order matters; no symmetry is implied.
pub fn sequential_prob(
    psi: &PureState,
    first: &Projector,
    second: &Projector,
) -> Result<f64, QcoreError> {
    sequential_prob_raw(psi, first, second).map(clamp_unit)
}

/// As [`sequential_prob`] but without clamping.
pub fn sequential_prob_raw(
    psi: &PureState,
    first: &Projector,
    second: &Projector,
) -> Result<f64, QcoreError> {
    check_dims(psi, first.dim())?;
    check_dims(psi, second.dim())?;
    // <psi|P1 P2 P1|psi> = ||P2 P1 psi||^2 by idempotence of P2.
    let collapsed = first.apply(psi.amplitudes());
    Ok(vec_norm(&second.apply(&collapsed)).powi(2))
}

fn check_dims(psi: &PureState, dim: usize) -> Result<(), QcoreError> {
    if psi.dim() != dim {
        return Err(QcoreError::DimensionMismatch {
            left: psi.dim(),
            right: dim,
        });
    }
    Ok(())
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::super::CMatrix;
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn new_rejects_unnormalized_vectors() {
        let err = PureState::new(vec![c(1.0, 0.0), c(0.1, 0.0)]);
        assert!(matches!(err, Err(QcoreError::NotNormalized { .. })));
        let ok = PureState::normalized(vec![c(1.0, 0.0), c(0.1, 0.0)]).unwrap();
        assert!((vec_norm(ok.amplitudes()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalized_rejects_zero_vector() {
        let err = PureState::normalized(vec![c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(err, Err(QcoreError::ZeroVector { .. })));
    }

    #[test]
    fn born_prob_identity_is_one() {
        let psi = PureState::normalized(vec![c(1.0, 0.5), c(-0.3, 0.2), c(0.0, 1.0)]).unwrap();
        let id = Projector::identity(3);
        assert_eq!(born_prob(&psi, &id).unwrap(), 1.0);
    }

    #[test]
    fn born_prob_orthogonal_image_is_zero() {
        // Projector onto |0>, state along |1>.
        let p = Projector::new(CMatrix::diagonal(&[1.0, 0.0])).unwrap();
        let psi = PureState::basis_state(2, 1);
        assert_eq!(born_prob(&psi, &p).unwrap(), 0.0);
    }

    #[test]
    fn sequential_with_identity_first_reduces_to_born() {
        let psi = PureState::normalized(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let id = Projector::identity(2);
        let p = Projector::new(CMatrix::diagonal(&[1.0, 0.0])).unwrap();
        let seq = sequential_prob(&psi, &id, &p).unwrap();
        let born = born_prob(&psi, &p).unwrap();
        assert!((seq - born).abs() < 1e-15);
    }

    #[test]
    fn sequential_is_zero_when_first_annihilates_state() {
        let first = Projector::new(CMatrix::diagonal(&[1.0, 0.0, 0.0])).unwrap();
        let second = Projector::identity(3);
        let psi = PureState::normalized(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(sequential_prob(&psi, &first, &second).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let psi = PureState::basis_state(2, 0);
        let p = Projector::identity(3);
        assert!(matches!(
            born_prob(&psi, &p),
            Err(QcoreError::DimensionMismatch { .. })
        ));
    }
}
