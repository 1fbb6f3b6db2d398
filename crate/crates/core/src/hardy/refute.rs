//! Machine certificates that condition sets 3 and 4 cannot produce success.
//!
//! Both sets are eliminated by a chain of operator-order relations. For a
//! projector pair, `P <= Q` means `Q - P` is positive semidefinite; each link
//! is verified numerically through [`psd_order`] and the chain's conclusion
//! (a probability forced to zero) is then confirmed by direct evaluation.
//!
//! The chains only follow when the witness realizes the zero conditions at
//! the operator level (image containments), not merely for one state vector.
//! A link that fails therefore signals inconsistent inputs — for example a
//! state that happens to satisfy the residuals of set 4 while actually being
//! a set-2 witness — and is reported as an error, not as a refutation.

use serde::Serialize;

use crate::qcore::{psd_order, sequential_prob_raw, Projector, PureState};

use super::{born_a2_raw, HardyError, MeasurementSetting};

/// One verified order relation in a chain.
#[derive(Clone, Debug, Serialize)]
pub struct ChainLink {
    /// Human-readable relation, e.g. `P(a1) <= P(!b1)`.
    pub relation: String,
    pub holds: bool,
}

/// The final forced-zero statement of a chain.
#[derive(Clone, Debug, Serialize)]
pub struct Conclusion {
    pub description: String,
    pub value: f64,
    pub threshold: f64,
    pub holds: bool,
}

/// A verified refutation of condition set 3 or 4 for a concrete witness.
#[derive(Clone, Debug, Serialize)]
pub struct RefutationCertificate {
    pub set_id: usize,
    /// Vector-norm residuals of the set's three zero sub-conditions.
    pub precondition_residuals: [f64; 3],
    pub links: Vec<ChainLink>,
    pub conclusion: Conclusion,
}

/// Verifies the order chain eliminating condition set 3 or 4.
///
/// Preconditions: the set's three zero sub-conditions hold within `tol`
/// (vector-norm residuals). Each chain link must pass [`psd_order`] at `tol`;
/// a failing link aborts with [`HardyError::ChainLinkFailed`]. On success the
/// certificate records every link and the numerically confirmed conclusion:
/// for set 3 the bare probability of the `a2` outcome is at most `tol`, for
/// set 4 the success probability itself is.
pub fn refute_condition_set(
    setting: &MeasurementSetting,
    psi: &PureState,
    set_id: usize,
    tol: f64,
) -> Result<RefutationCertificate, HardyError> {
    match set_id {
        3 => refute_set3(setting, psi, tol),
        4 => refute_set4(setting, psi, tol),
        other => Err(HardyError::NotRefutableSet { set_id: other }),
    }
}

fn refute_set3(
    setting: &MeasurementSetting,
    psi: &PureState,
    tol: f64,
) -> Result<RefutationCertificate, HardyError> {
    let amps = psi.amplitudes();
    let not_a1 = setting.proj_a1().complement();
    let not_b1 = setting.proj_b1().complement();
    // Set 3: P(b1) P(a1) psi = 0,  P(!a1) psi = 0,  P(!b1) P(a2) psi = 0.
    let residuals = [
        vec_norm(&setting.proj_b1().apply(&setting.proj_a1().apply(amps))),
        vec_norm(&not_a1.apply(amps)),
        vec_norm(&not_b1.apply(&setting.proj_a2().apply(amps))),
    ];
    check_preconditions(3, residuals, tol)?;

    let links = vec![
        check_link(setting.proj_a1(), &not_b1, "P(a1) <= P(!b1)", tol)?,
        check_link(setting.proj_b1(), &not_a1, "P(b1) <= P(!a1)", tol)?,
        check_link(setting.proj_a2(), setting.proj_b1(), "P(a2) <= P(b1)", tol)?,
        check_link(setting.proj_a2(), &not_a1, "P(a2) <= P(!a1)", tol)?,
    ];

    // P(a2) <= P(!a1) and P(!a1) psi = 0 force <psi|P(a2)|psi> to vanish,
    // which contradicts the positivity condition.
    let value = born_a2_raw(setting, psi)?;
    Ok(RefutationCertificate {
        set_id: 3,
        precondition_residuals: residuals,
        links,
        conclusion: Conclusion {
            description: "<psi| P(a2) |psi> = 0, so p4 cannot be positive".into(),
            value,
            threshold: tol,
            holds: value <= tol,
        },
    })
}

fn refute_set4(
    setting: &MeasurementSetting,
    psi: &PureState,
    tol: f64,
) -> Result<RefutationCertificate, HardyError> {
    let amps = psi.amplitudes();
    let not_a1 = setting.proj_a1().complement();
    let not_b1 = setting.proj_b1().complement();
    let not_b2 = setting.proj_b2().complement();
    // Set 4: P(b1) P(a1) psi = 0,  P(b2) P(!a1) psi = 0,  P(!b1) P(a2) psi = 0.
    let residuals = [
        vec_norm(&setting.proj_b1().apply(&setting.proj_a1().apply(amps))),
        vec_norm(&setting.proj_b2().apply(&not_a1.apply(amps))),
        vec_norm(&not_b1.apply(&setting.proj_a2().apply(amps))),
    ];
    check_preconditions(4, residuals, tol)?;

    let links = vec![
        check_link(setting.proj_a1(), &not_b1, "P(a1) <= P(!b1)", tol)?,
        check_link(setting.proj_b1(), &not_a1, "P(b1) <= P(!a1)", tol)?,
        check_link(&not_a1, &not_b2, "P(!a1) <= P(!b2)", tol)?,
        check_link(setting.proj_b1(), &not_b2, "P(b1) <= P(!b2)", tol)?,
        check_link(setting.proj_a2(), setting.proj_b1(), "P(a2) <= P(b1)", tol)?,
        check_link(setting.proj_a2(), &not_b2, "P(a2) <= P(!b2)", tol)?,
    ];

    // P(a2) <= P(!b2) forces the success probability itself to vanish.
    let value =
        sequential_prob_raw(psi, setting.proj_a2(), setting.proj_b2()).map_err(HardyError::from)?;
    Ok(RefutationCertificate {
        set_id: 4,
        precondition_residuals: residuals,
        links,
        conclusion: Conclusion {
            description: "<psi| P(a2) P(b2) P(a2) |psi> = 0: p4 itself vanishes".into(),
            value,
            threshold: tol,
            holds: value <= tol,
        },
    })
}

fn check_preconditions(set_id: usize, residuals: [f64; 3], tol: f64) -> Result<(), HardyError> {
    if residuals.iter().any(|&r| r > tol) {
        return Err(HardyError::RefutationPreconditionFailed {
            set_id,
            residuals,
            tol,
        });
    }
    Ok(())
}

fn check_link(
    p: &Projector,
    q: &Projector,
    relation: &str,
    tol: f64,
) -> Result<ChainLink, HardyError> {
    let holds = psd_order(p, q, tol)?;
    if !holds {
        // Recompute the offending eigenvalue for the error message.
        let diff = &(q.matrix().clone()) - p.matrix();
        let min_eigenvalue = crate::qcore::hermitian_eigen(&diff, 1e-8)
            .map(|s| s.eigenvalues()[0])
            .unwrap_or(f64::NAN);
        return Err(HardyError::ChainLinkFailed {
            relation: relation.to_string(),
            min_eigenvalue,
        });
    }
    Ok(ChainLink {
        relation: relation.to_string(),
        holds,
    })
}

fn vec_norm(v: &[num_complex::Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::super::witness;
    use super::*;
    use crate::qcore::{CMatrix, Observable};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn explicit_set3_witness_is_refuted() {
        // dim 3, B1 = A2 rank-1 on |0>, A1 on |1> (inside the complement of
        // B1's image), state = |1> in the image of P(a1).
        let p_b1 = Projector::new(CMatrix::diagonal(&[1.0, 0.0, 0.0])).unwrap();
        let p_a1 = Projector::new(CMatrix::diagonal(&[0.0, 1.0, 0.0])).unwrap();
        let a1 = Observable::dichotomic(&p_a1);
        let a2 = Observable::dichotomic(&p_b1);
        let b1 = Observable::dichotomic(&p_b1);
        let b2 = Observable::dichotomic(&p_a1);
        let setting = MeasurementSetting::new(a1, a2, b1, b2, 1e-8).unwrap();
        let psi = PureState::basis_state(3, 1);

        let cert = refute_condition_set(&setting, &psi, 3, 1e-10).unwrap();
        assert_eq!(cert.links.len(), 4);
        assert!(cert.links.iter().all(|l| l.holds));
        assert!(cert.conclusion.holds);
        assert!(cert.conclusion.value <= 1e-10);
        // and p4 is forced down with it
        let p4 = sequential_prob_raw(&psi, setting.proj_a2(), setting.proj_b2()).unwrap();
        assert!(p4 <= 1e-10);
    }

    #[test]
    fn explicit_set4_witness_is_refuted() {
        // Permutation-diagonal projectors: every link holds exactly, so the
        // degenerate tolerance tol = 0 is admissible.
        // P(b1) on |0>, P(a2) on |0>, P(a1) on {|1>,|2>}, P(b2) on |1>.
        let p_b1 = Projector::new(CMatrix::diagonal(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        let p_a2 = Projector::new(CMatrix::diagonal(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        let p_a1 = Projector::new(CMatrix::diagonal(&[0.0, 1.0, 1.0, 0.0])).unwrap();
        let p_b2 = Projector::new(CMatrix::diagonal(&[0.0, 1.0, 0.0, 0.0])).unwrap();
        let setting = MeasurementSetting::new(
            Observable::dichotomic(&p_a1),
            Observable::dichotomic(&p_a2),
            Observable::dichotomic(&p_b1),
            Observable::dichotomic(&p_b2),
            1e-8,
        )
        .unwrap();
        let psi = PureState::basis_state(4, 2);

        let cert = refute_condition_set(&setting, &psi, 4, 0.0).unwrap();
        assert_eq!(cert.links.len(), 6);
        assert!(cert.links.iter().all(|l| l.holds));
        assert_eq!(cert.conclusion.value, 0.0);
        assert!(cert.conclusion.holds);
    }

    #[test]
    fn generated_witnesses_are_refuted() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (setting, psi) = witness::set3_witness(5, &mut rng).unwrap();
            let cert = refute_condition_set(&setting, &psi, 3, 1e-10).unwrap();
            assert!(cert.conclusion.holds);

            let (setting, psi) = witness::set4_witness(5, &mut rng).unwrap();
            let cert = refute_condition_set(&setting, &psi, 4, 1e-10).unwrap();
            assert!(cert.conclusion.holds);
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        let (setting, psi) = super::super::tests::optimal_three_level();
        // The optimum satisfies set 2; set 3's second sub-condition
        // (P(!a1) psi = 0) fails outright.
        assert!(matches!(
            refute_condition_set(&setting, &psi, 3, 1e-10),
            Err(HardyError::RefutationPreconditionFailed { set_id: 3, .. })
        ));
    }

    #[test]
    fn vector_level_set4_witness_without_operator_structure_fails_a_link() {
        // The three-level optimum satisfies set 4's *vector* residuals
        // (its set-2 conditions imply them), but the operator containments
        // do not hold — the chain must refuse rather than "refute" a state
        // with p4 = 1/4.
        let (setting, psi) = super::super::tests::optimal_three_level();
        let err = refute_condition_set(&setting, &psi, 4, 1e-10);
        assert!(
            matches!(err, Err(HardyError::ChainLinkFailed { .. })),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_set_is_rejected() {
        let (setting, psi) = super::super::tests::optimal_three_level();
        assert!(matches!(
            refute_condition_set(&setting, &psi, 2, 1e-10),
            Err(HardyError::NotRefutableSet { set_id: 2 })
        ));
    }

    #[test]
    fn refutation_certificate_reports_born_value() {
        // Rank-2 P(a1) spanning the complement of B1's image; any state in
        // that plane is a set-3 witness.
        let p_b1 = Projector::new(CMatrix::diagonal(&[1.0, 0.0, 0.0])).unwrap();
        let p_a1 = Projector::new(CMatrix::diagonal(&[0.0, 1.0, 1.0])).unwrap();
        let setting = MeasurementSetting::new(
            Observable::dichotomic(&p_a1),
            Observable::dichotomic(&p_b1),
            Observable::dichotomic(&p_b1),
            Observable::dichotomic(&p_a1),
            1e-8,
        )
        .unwrap();
        let psi = PureState::new(vec![
            Complex64::ZERO,
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ])
        .unwrap();
        let cert = refute_condition_set(&setting, &psi, 3, 1e-10).unwrap();
        assert!(cert.precondition_residuals.iter().all(|&r| r <= 1e-12));
        assert!(cert.conclusion.value.abs() <= 1e-15);
    }
}
