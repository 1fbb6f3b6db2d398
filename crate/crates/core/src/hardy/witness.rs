//! Random witnesses for condition sets 3 and 4.
//!
//! The refutation chains require zero conditions that hold at the operator
//! level (image containments), not just along one state. The generators here
//! build such witnesses by carving the four designated subspaces out of the
//! columns of one random unitary:
//!
//! - set 3: `im P(a1) ⊆ ker P(b1)`, `im P(a2) ⊆ im P(b1)`, state inside
//!   `im P(a1)`;
//! - set 4: additionally `im P(b2) ⊆ im P(a1)`, state arbitrary.
//!
//! Every projector is a sum of outer products of columns of the same unitary,
//! so the containments hold to machine precision by construction.

use num_complex::Complex64;
use rand::Rng;

use crate::qcore::{hermitian_eigen, CMatrix, Observable, Projector, PureState};

use super::{HardyError, MeasurementSetting};

/// A Haar-like random unitary: the eigenvector matrix of a random Hermitian
/// matrix. Deterministic for a given generator state; distribution details
/// are irrelevant here, only genericity matters.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let h = random_hermitian(dim, rng);
    hermitian_eigen(&h, 1e-8)
        .expect("random Hermitian matrices diagonalize")
        .eigenvectors()
        .clone()
}

/// Random Hermitian matrix with entries uniform in `[-1, 1]`.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let mut h = CMatrix::zeros(dim);
    for i in 0..dim {
        h.set(i, i, Complex64::new(rng.random_range(-1.0..1.0), 0.0));
        for j in (i + 1)..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h.set(i, j, z);
            h.set(j, i, z.conj());
        }
    }
    h
}

/// A witness for condition set 3: the zero conditions hold at the operator
/// level and the state lies in the image of `P(a1)`. Needs `dim >= 2`.
pub fn set3_witness(
    dim: usize,
    rng: &mut impl Rng,
) -> Result<(MeasurementSetting, PureState), HardyError> {
    assert!(dim >= 2, "set-3 witnesses need dim >= 2");
    let u = random_unitary(dim, rng);

    let k_b1 = rng.random_range(1..=dim - 1);
    let rest = dim - k_b1;
    let k_a1 = rng.random_range(1..=rest);
    let k_a2 = rng.random_range(1..=k_b1);

    let b1_cols: Vec<usize> = (0..k_b1).collect();
    let a1_cols: Vec<usize> = (k_b1..k_b1 + k_a1).collect();
    let a2_cols: Vec<usize> = (0..k_a2).collect();

    let p_b1 = projector_from(&u, &b1_cols);
    let p_a1 = projector_from(&u, &a1_cols);
    let p_a2 = projector_from(&u, &a2_cols);
    // B2 plays no role in set 3's conditions; any valid observable will do.
    let p_b2 = projector_from(&u, &[dim - 1]);

    let psi = random_state_in_span(&u, &a1_cols, rng);
    let setting = MeasurementSetting::new(
        Observable::dichotomic(&p_a1),
        Observable::dichotomic(&p_a2),
        Observable::dichotomic(&p_b1),
        Observable::dichotomic(&p_b2),
        1e-8,
    )?;
    Ok((setting, psi))
}

/// A witness for condition set 4: all three zero conditions hold at the
/// operator level, so any state qualifies; a generic one is drawn. Needs
/// `dim >= 2`.
pub fn set4_witness(
    dim: usize,
    rng: &mut impl Rng,
) -> Result<(MeasurementSetting, PureState), HardyError> {
    assert!(dim >= 2, "set-4 witnesses need dim >= 2");
    let u = random_unitary(dim, rng);

    let k_b1 = rng.random_range(1..=dim - 1);
    let rest = dim - k_b1;
    let k_a1 = rng.random_range(1..=rest);
    let k_a2 = rng.random_range(1..=k_b1);
    let k_b2 = rng.random_range(1..=k_a1);

    let b1_cols: Vec<usize> = (0..k_b1).collect();
    let a1_cols: Vec<usize> = (k_b1..k_b1 + k_a1).collect();
    let a2_cols: Vec<usize> = (0..k_a2).collect();
    let b2_cols: Vec<usize> = (k_b1..k_b1 + k_b2).collect();

    let p_b1 = projector_from(&u, &b1_cols);
    let p_a1 = projector_from(&u, &a1_cols);
    let p_a2 = projector_from(&u, &a2_cols);
    let p_b2 = projector_from(&u, &b2_cols);

    // A generic state with weight on both P(a1) and its complement, so the
    // classifier sees the weak branches of both case splits.
    let all: Vec<usize> = (0..dim).collect();
    let psi = random_state_in_span(&u, &all, rng);
    let setting = MeasurementSetting::new(
        Observable::dichotomic(&p_a1),
        Observable::dichotomic(&p_a2),
        Observable::dichotomic(&p_b1),
        Observable::dichotomic(&p_b2),
        1e-8,
    )?;
    Ok((setting, psi))
}

fn projector_from(u: &CMatrix, cols: &[usize]) -> Projector {
    let columns: Vec<Vec<Complex64>> = cols.iter().map(|&j| u.column(j)).collect();
    Projector::from_orthonormal_columns(u.dim(), &columns)
}

fn random_state_in_span(u: &CMatrix, cols: &[usize], rng: &mut impl Rng) -> PureState {
    let dim = u.dim();
    let mut v = vec![Complex64::ZERO; dim];
    for &j in cols {
        // Coefficients bounded away from zero keep the state generic in
        // every chosen direction.
        let re = rng.random_range(0.2..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let im = rng.random_range(-1.0..1.0);
        let coeff = Complex64::new(re, im);
        for (i, amp) in v.iter_mut().enumerate() {
            *amp += coeff * u.at(i, j);
        }
    }
    PureState::normalized(v).expect("span combinations are nonzero")
}
