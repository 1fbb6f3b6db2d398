//! The four-condition test for two-time nonlocality.
//!
//! A setting fixes two observables per measurement time, each with one
//! designated outcome. Four joint probabilities are computed under sequential
//! projective measurement:
//!
//! ```text
//! p1 = <psi| P(a1) P(b1) P(a1) |psi>      required 0
//! p2 = <psi| P(!a1) P(b2) P(!a1) |psi>    required 0
//! p3 = <psi| P(a2) P(!b1) P(a2) |psi>     required 0
//! p4 = <psi| P(a2) P(b2) P(a2) |psi>      required > 0
//! ```
//!
//! A classical theory that assigns outcome values independently of which
//! measurements are performed cannot satisfy all four (see [`crate::realism`]);
//! quantum mechanics can, with `p4` up to exactly 1/4 in any dimension. This
//! module evaluates the four probabilities, classifies which branch of the
//! exhaustive case analysis a state satisfies, certifies the operator-order
//! chains that kill two of the branches, checks the 1/4 bound on the
//! surviving one, and handles convex mixtures.

mod refute;
pub mod witness;

pub use refute::{refute_condition_set, ChainLink, Conclusion, RefutationCertificate};

use serde::Serialize;
use thiserror::Error;

use crate::qcore::{
    born_prob, born_prob_raw, sequential_prob, sequential_prob_raw, Observable, Projector,
    PureState, QcoreError,
};

/// Default tolerance under which each of p1, p2, p3 counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Default threshold above which p4 counts as positive.
pub const DEFAULT_P4_MIN: f64 = 1e-6;

/// How much the 1/4 bound is widened when the zero conditions hold only
/// within `zero_tol`: first-order perturbation of the bound derivation,
/// rounded up generously. Documented rather than silent.
pub fn bound_slack(zero_tol: f64) -> f64 {
    10.0 * zero_tol.sqrt()
}

#[derive(Debug, Clone, Error)]
pub enum HardyError {
    #[error(transparent)]
    Qcore(#[from] QcoreError),
    #[error("observables have mismatched dimensions: {dims:?}")]
    MixedDimensions { dims: [usize; 4] },
    #[error("state dimension {state} does not match setting dimension {setting}")]
    StateDimension { state: usize, setting: usize },
    #[error("designated outcome of {which} is not in its spectrum: {source}")]
    OutcomeNotInSpectrum {
        which: &'static str,
        source: QcoreError,
    },
    #[error("zero conditions not satisfied (residuals {residuals:?} > {zero_tol:e}); bound not applicable")]
    ZeroConditionsNotMet { residuals: [f64; 3], zero_tol: f64 },
    #[error("ensemble member {index} violates a zero condition (residuals {residuals:?})")]
    EnsembleMemberViolatesZeros { index: usize, residuals: [f64; 3] },
    #[error("ensemble weights sum to {sum}, must be 1 within 1e-12")]
    WeightsNotNormalized { sum: f64 },
    #[error("ensemble weight {weight} is negative")]
    NegativeWeight { weight: f64 },
    #[error("ensemble is empty or members have mixed dimensions")]
    MalformedEnsemble,
    #[error("condition set {set_id} is not one of the refutable sets (3 or 4)")]
    NotRefutableSet { set_id: usize },
    #[error("preconditions of set {set_id} not met: residuals {residuals:?} exceed {tol:e}")]
    RefutationPreconditionFailed {
        set_id: usize,
        residuals: [f64; 3],
        tol: f64,
    },
    #[error("order-chain link failed: {relation} has minimum eigenvalue {min_eigenvalue:e}")]
    ChainLinkFailed {
        relation: String,
        min_eigenvalue: f64,
    },
    #[error("mixture success probability {value} exceeds bound {bound}")]
    MixtureBoundExceeded { value: f64, bound: f64 },
}

/// The four observables of a two-time test, with designated outcomes and the
/// projectors derived from them at construction.
#[derive(Clone, Debug)]
pub struct MeasurementSetting {
    dim: usize,
    a1: Observable,
    a2: Observable,
    b1: Observable,
    b2: Observable,
    proj_a1: Projector,
    proj_a2: Projector,
    proj_b1: Projector,
    proj_b2: Projector,
}

impl MeasurementSetting {
    /// Builds a setting, deriving the designated-outcome projector of each
    /// observable. Fails if dimensions differ or a designated outcome misses
    /// the spectrum.
    pub fn new(
        a1: Observable,
        a2: Observable,
        b1: Observable,
        b2: Observable,
        cluster_tol: f64,
    ) -> Result<Self, HardyError> {
        let dims = [a1.dim(), a2.dim(), b1.dim(), b2.dim()];
        if dims.iter().any(|&d| d != dims[0]) {
            return Err(HardyError::MixedDimensions { dims });
        }
        let project = |obs: &Observable, which: &'static str| {
            obs.designated_projector(cluster_tol)
                .map_err(|source| HardyError::OutcomeNotInSpectrum { which, source })
        };
        let proj_a1 = project(&a1, "A1")?;
        let proj_a2 = project(&a2, "A2")?;
        let proj_b1 = project(&b1, "B1")?;
        let proj_b2 = project(&b2, "B2")?;
        Ok(Self {
            dim: dims[0],
            a1,
            a2,
            b1,
            b2,
            proj_a1,
            proj_a2,
            proj_b1,
            proj_b2,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// In the order A1, A2, B1, B2.
    pub fn observables(&self) -> [&Observable; 4] {
        [&self.a1, &self.a2, &self.b1, &self.b2]
    }

    pub fn proj_a1(&self) -> &Projector {
        &self.proj_a1
    }

    pub fn proj_a2(&self) -> &Projector {
        &self.proj_a2
    }

    pub fn proj_b1(&self) -> &Projector {
        &self.proj_b1
    }

    pub fn proj_b2(&self) -> &Projector {
        &self.proj_b2
    }

    fn check_state(&self, psi: &PureState) -> Result<(), HardyError> {
        if psi.dim() != self.dim {
            return Err(HardyError::StateDimension {
                state: psi.dim(),
                setting: self.dim,
            });
        }
        Ok(())
    }
}

/// The four probabilities of one evaluation, with pass/fail flags at the
/// given tolerances. `raw` keeps the unclamped values for diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct HardyReport {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub raw: [f64; 4],
    /// `p_i <= zero_tol` for i = 1, 2, 3.
    pub zero_flags: [bool; 3],
    /// All zero flags hold and `p4 > p4_min`.
    pub success: bool,
    pub zero_tol: f64,
    pub p4_min: f64,
}

/// Computes the four probabilities for a setting and state.
pub fn evaluate(
    setting: &MeasurementSetting,
    psi: &PureState,
    zero_tol: f64,
    p4_min: f64,
) -> Result<HardyReport, HardyError> {
    setting.check_state(psi)?;
    let not_a1 = setting.proj_a1.complement();
    let not_b1 = setting.proj_b1.complement();
    let raw = [
        sequential_prob_raw(psi, &setting.proj_a1, &setting.proj_b1)?,
        sequential_prob_raw(psi, &not_a1, &setting.proj_b2)?,
        sequential_prob_raw(psi, &setting.proj_a2, &not_b1)?,
        sequential_prob_raw(psi, &setting.proj_a2, &setting.proj_b2)?,
    ];
    let [p1, p2, p3, p4] = raw.map(|x| x.clamp(0.0, 1.0));
    let zero_flags = [p1 <= zero_tol, p2 <= zero_tol, p3 <= zero_tol];
    let success = zero_flags.iter().all(|&f| f) && p4 > p4_min;
    Ok(HardyReport {
        p1,
        p2,
        p3,
        p4,
        raw,
        zero_flags,
        success,
        zero_tol,
        p4_min,
    })
}

/// [`evaluate`] with the module default tolerances.
pub fn evaluate_default(
    setting: &MeasurementSetting,
    psi: &PureState,
) -> Result<HardyReport, HardyError> {
    evaluate(setting, psi, DEFAULT_ZERO_TOL, DEFAULT_P4_MIN)
}

/// One residual test inside a condition set.
#[derive(Clone, Debug, Serialize)]
pub struct SubCondition {
    pub description: String,
    /// Vector-norm residual for the zero conditions; the probability itself
    /// for the positivity condition.
    pub value: f64,
    pub holds: bool,
}

/// Which of the four exhaustive condition sets a state/setting pair realizes.
///
/// The three zero conditions factor into cases: the first either annihilates
/// the state outright (`P(a1) psi = 0`) or only after the second projection
/// (`P(b1) P(a1) psi = 0` with `P(a1) psi != 0`), and likewise for the second
/// condition with `P(!a1)`. The four sets are the four combinations, so at
/// most one set holds at a time and the classifier reports the branch of the
/// case analysis that actually applies.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionSetClassification {
    pub sets: [Vec<SubCondition>; 4],
    pub satisfied_sets: Vec<usize>,
    pub tol: f64,
    pub p4_min: f64,
}

/// Residual-based classification of the condition sets. `tol` bounds the
/// vector-norm residuals; the positivity condition uses [`DEFAULT_P4_MIN`].
pub fn classify_condition_sets(
    setting: &MeasurementSetting,
    psi: &PureState,
    tol: f64,
) -> Result<ConditionSetClassification, HardyError> {
    setting.check_state(psi)?;
    let amps = psi.amplitudes();
    let not_a1 = setting.proj_a1.complement();
    let not_b1 = setting.proj_b1.complement();

    let a1_psi = setting.proj_a1.apply(amps);
    let na1_psi = not_a1.apply(amps);
    let r_a1 = norm(&a1_psi); // ||P(a1) psi||
    let r_na1 = norm(&na1_psi); // ||P(!a1) psi||
    let r_b1_a1 = norm(&setting.proj_b1.apply(&a1_psi)); // ||P(b1) P(a1) psi||
    let r_b2_na1 = norm(&setting.proj_b2.apply(&na1_psi)); // ||P(b2) P(!a1) psi||
    let r_nb1_a2 = norm(&not_b1.apply(&setting.proj_a2.apply(amps))); // ||P(!b1) P(a2) psi||
    let p4 = sequential_prob(psi, &setting.proj_a2, &setting.proj_b2)?;

    let strong1 = r_a1 <= tol;
    let weak1 = r_b1_a1 <= tol && !strong1;
    let strong2 = r_na1 <= tol;
    let weak2 = r_b2_na1 <= tol && !strong2;
    let third = r_nb1_a2 <= tol;
    let positive = p4 > DEFAULT_P4_MIN;

    let strong1_cond = |held: bool| SubCondition {
        description: "P(a1) psi = 0".into(),
        value: r_a1,
        holds: held,
    };
    let weak1_cond = |held: bool| SubCondition {
        description: "P(b1) P(a1) psi = 0 with P(a1) psi != 0".into(),
        value: r_b1_a1,
        holds: held,
    };
    let strong2_cond = |held: bool| SubCondition {
        description: "P(!a1) psi = 0".into(),
        value: r_na1,
        holds: held,
    };
    let weak2_cond = |held: bool| SubCondition {
        description: "P(b2) P(!a1) psi = 0 with P(!a1) psi != 0".into(),
        value: r_b2_na1,
        holds: held,
    };
    let third_cond = || SubCondition {
        description: "P(!b1) P(a2) psi = 0".into(),
        value: r_nb1_a2,
        holds: third,
    };
    let positive_cond = || SubCondition {
        description: "p4 > 0".into(),
        value: p4,
        holds: positive,
    };

    let sets = [
        vec![
            strong1_cond(strong1),
            strong2_cond(strong2),
            third_cond(),
            positive_cond(),
        ],
        vec![
            strong1_cond(strong1),
            weak2_cond(weak2),
            third_cond(),
            positive_cond(),
        ],
        vec![
            weak1_cond(weak1),
            strong2_cond(strong2),
            third_cond(),
            positive_cond(),
        ],
        vec![
            weak1_cond(weak1),
            weak2_cond(weak2),
            third_cond(),
            positive_cond(),
        ],
    ];
    let satisfied_sets = sets
        .iter()
        .enumerate()
        .filter(|(_, conds)| conds.iter().all(|c| c.holds))
        .map(|(k, _)| k + 1)
        .collect();
    Ok(ConditionSetClassification {
        sets,
        satisfied_sets,
        tol,
        p4_min: DEFAULT_P4_MIN,
    })
}

/// Outcome of checking `p4` against the 1/4 ceiling.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub p4: f64,
    /// `0.25 + slack(zero_tol)`.
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
    /// `<psi| P(a2) |psi>`; the ceiling is attained exactly when this is 1/2.
    pub born_a2: f64,
    pub born_a2_dist_from_half: f64,
}

/// Checks `p4 <= 1/4 + slack` for a state satisfying the three zero
/// conditions at `zero_tol`. Errors if the zeros do not hold, in which case
/// the bound is simply not applicable.
pub fn verify_bound(
    setting: &MeasurementSetting,
    psi: &PureState,
    zero_tol: f64,
) -> Result<BoundCheck, HardyError> {
    let report = evaluate(setting, psi, zero_tol, DEFAULT_P4_MIN)?;
    if !report.zero_flags.iter().all(|&f| f) {
        return Err(HardyError::ZeroConditionsNotMet {
            residuals: [report.raw[0], report.raw[1], report.raw[2]],
            zero_tol,
        });
    }
    let born_a2 = born_prob(psi, &setting.proj_a2)?;
    Ok(check_bound(report.p4, born_a2, zero_tol))
}

/// The bound test itself, separated so crafted values can exercise the
/// failure path.
pub fn check_bound(p4: f64, born_a2: f64, zero_tol: f64) -> BoundCheck {
    let slack = bound_slack(zero_tol);
    let bound = 0.25 + slack;
    BoundCheck {
        p4,
        bound,
        slack,
        holds: p4 <= bound,
        born_a2,
        born_a2_dist_from_half: (born_a2 - 0.5).abs(),
    }
}

/// A convex mixture of pure states.
#[derive(Clone, Debug)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl Ensemble {
    /// Weights must be nonnegative and sum to 1 within 1e-12; states must
    /// share one dimension.
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self, HardyError> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(HardyError::MalformedEnsemble);
        }
        if let Some(&w) = weights.iter().find(|&&w| w < 0.0) {
            return Err(HardyError::NegativeWeight { weight: w });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(HardyError::WeightsNotNormalized { sum });
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(HardyError::MalformedEnsemble);
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }
}

/// Success probability of a mixture: the weighted sum of per-member `p4`.
///
/// Every member must individually satisfy the three zero conditions at
/// `zero_tol`, otherwise the mixture is not a valid witness and an error
/// identifies the offending member. The result is checked against
/// `1/4 + slack`; exceeding it would falsify convexity of the bound and is
/// reported as an error rather than returned silently.
pub fn mixed_success(
    setting: &MeasurementSetting,
    ensemble: &Ensemble,
    zero_tol: f64,
) -> Result<f64, HardyError> {
    let mut total = 0.0;
    for (index, (weight, state)) in ensemble.weights.iter().zip(&ensemble.states).enumerate() {
        let report = evaluate(setting, state, zero_tol, DEFAULT_P4_MIN)?;
        if !report.zero_flags.iter().all(|&f| f) {
            return Err(HardyError::EnsembleMemberViolatesZeros {
                index,
                residuals: [report.raw[0], report.raw[1], report.raw[2]],
            });
        }
        total += weight * report.p4;
    }
    let bound = 0.25 + bound_slack(zero_tol);
    if total > bound {
        return Err(HardyError::MixtureBoundExceeded {
            value: total,
            bound,
        });
    }
    Ok(total)
}

/// Probability of the designated outcome of `A2` alone; the refutation
/// chains conclude with statements about this quantity.
pub fn born_a2_raw(setting: &MeasurementSetting, psi: &PureState) -> Result<f64, HardyError> {
    setting.check_state(psi)?;
    Ok(born_prob_raw(psi, &setting.proj_a2)?)
}

fn norm(v: &[num_complex::Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
