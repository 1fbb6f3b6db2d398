//! Spin-s operators and the explicit settings that reach the 1/4 ceiling.
//!
//! The spin observables live in the (2s+1)-dimensional irreducible
//! representation with basis ordered by decreasing magnetic quantum number,
//! `m = s, s-1, ..., -s`. Two families of explicit settings are built here:
//! the spin-1 and spin-3/2 constructions with their known optimal angles, and
//! a general-spin candidate obtained by a one-dimensional search, which is
//! the numerical evidence for the conjecture that every spin reaches 1/4.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::hardy::{self, HardyError, MeasurementSetting, DEFAULT_P4_MIN};
use crate::qcore::{
    hermitian_eigen, sequential_prob, CMatrix, Observable, Projector, PureState, QcoreError,
};

/// Largest supported spin quantum number.
pub const MAX_SPIN: f64 = 20.0;

const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Error)]
pub enum SpinError {
    #[error("spin must be a positive half-integer, got {value}")]
    NotHalfInteger { value: f64 },
    #[error("spin {value} exceeds the supported maximum {MAX_SPIN}")]
    SpinTooLarge { value: f64 },
    #[error("angle {angle} outside the valid range [{lo}, {hi})")]
    AngleOutOfRange { angle: f64, lo: f64, hi: f64 },
    #[error("state is not normalizable at this angle: {source}")]
    StateNotNormalizable { source: QcoreError },
    #[error("search over the rotation angle found no positive success probability for spin {spin} (best {best:e}); this would be evidence against the general-spin conjecture")]
    NoPositiveSuccess { spin: String, best: f64 },
    #[error(transparent)]
    Hardy(#[from] HardyError),
    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

/// A spin quantum number: a positive half-integer stored doubled, so
/// `SpinQuantum::new(1.5)` holds 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinQuantum {
    doubled: u32,
}

impl SpinQuantum {
    pub fn new(value: f64) -> Result<Self, SpinError> {
        let doubled = 2.0 * value;
        if !(doubled.is_finite() && doubled > 0.0 && (doubled - doubled.round()).abs() < 1e-9) {
            return Err(SpinError::NotHalfInteger { value });
        }
        if value > MAX_SPIN {
            return Err(SpinError::SpinTooLarge { value });
        }
        Ok(Self {
            doubled: doubled.round() as u32,
        })
    }

    pub fn from_doubled(doubled: u32) -> Result<Self, SpinError> {
        Self::new(doubled as f64 / 2.0)
    }

    pub fn value(&self) -> f64 {
        self.doubled as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.doubled as usize + 1
    }

    pub fn is_integer(&self) -> bool {
        self.doubled.is_multiple_of(2)
    }
}

impl fmt::Display for SpinQuantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.doubled / 2)
        } else {
            write!(f, "{}/2", self.doubled)
        }
    }
}

/// The three spin operators in the `m = s ... -s` basis (hbar = 1).
#[derive(Clone, Debug)]
pub struct SpinSystem {
    s: SpinQuantum,
    sz: CMatrix,
    sx: CMatrix,
    sy: CMatrix,
}

impl SpinSystem {
    pub fn spin(&self) -> SpinQuantum {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn sz(&self) -> &CMatrix {
        &self.sz
    }

    pub fn sx(&self) -> &CMatrix {
        &self.sx
    }

    pub fn sy(&self) -> &CMatrix {
        &self.sy
    }
}

/// Builds the spin operators from the ladder-operator matrix elements
/// `<m+1| S+ |m> = sqrt(s(s+1) - m(m+1))`.
pub fn spin_operators(s: SpinQuantum) -> SpinSystem {
    let dim = s.dim();
    let sv = s.value();
    let m_of = |i: usize| sv - i as f64;

    let mut raise = CMatrix::zeros(dim);
    for i in 1..dim {
        let m = m_of(i);
        let amp = (sv * (sv + 1.0) - m * (m + 1.0)).sqrt();
        raise.set(i - 1, i, Complex64::new(amp, 0.0));
    }
    let lower = raise.adjoint();

    let sz = CMatrix::diagonal(&(0..dim).map(m_of).collect::<Vec<_>>());
    let sx = (&raise + &lower).scaled(0.5);
    let half_over_i = Complex64::new(0.0, -0.5); // (S+ - S-) / (2i)
    let sy = CMatrix::from_fn(dim, |i, j| (raise.at(i, j) - lower.at(i, j)) * half_over_i);

    SpinSystem { s, sz, sx, sy }
}

/// Which sign the `sin` term carries in the rotated observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotationSign {
    Plus,
    Minus,
}

/// `cos(theta) Sz ± sin(theta) Sx` with designated outcome `+s`. A rotation
/// of `Sz`, so the spectrum is `{-s, ..., +s}` for every angle.
pub fn rotated_observable(sys: &SpinSystem, theta: f64, sign: RotationSign) -> Observable {
    let factor = match sign {
        RotationSign::Plus => theta.sin(),
        RotationSign::Minus => -theta.sin(),
    };
    let matrix = &sys.sz.scaled(theta.cos()) + &sys.sx.scaled(factor);
    Observable::new(matrix, sys.s.value()).expect("rotated spin operators are Hermitian")
}

/// A fully assembled spin setting: both times measure either `Sz` or the
/// rotated observable, all designated outcomes are `+s`, and the state is
/// orthogonal to `|Sz = +s>`.
#[derive(Clone, Debug)]
pub struct SpinSetting {
    pub system: SpinSystem,
    pub angle: f64,
    pub sign: RotationSign,
    pub setting: MeasurementSetting,
    pub psi: PureState,
}

fn assemble(
    system: SpinSystem,
    angle: f64,
    sign: RotationSign,
    psi: PureState,
) -> Result<SpinSetting, SpinError> {
    let sz_obs = || {
        Observable::new(system.sz.clone(), system.s.value())
            .expect("Sz is Hermitian by construction")
    };
    let rotated = rotated_observable(&system, angle, sign);
    let setting =
        MeasurementSetting::new(sz_obs(), rotated.clone(), rotated, sz_obs(), CLUSTER_TOL)?;
    Ok(SpinSetting {
        system,
        angle,
        sign,
        setting,
        psi,
    })
}

/// The three-level construction: state `-sin(a)|0> + cos(a)|-1>`, first-time
/// observable `Sz`, second `cos(a) Sz - sin(a) Sx`, all designated `+1`.
///
/// The three zero conditions hold structurally for every angle; only the
/// success probability varies, peaking at 1/4 for `a = arccos(sqrt(2) - 1)`.
/// The endpoints are admitted even though they are degenerate (the designated
/// second-time outcome becomes unreachable and the score drops to zero).
pub fn spin1_setting(alpha: f64) -> Result<SpinSetting, SpinError> {
    if !(0.0..=std::f64::consts::PI).contains(&alpha) {
        return Err(SpinError::AngleOutOfRange {
            angle: alpha,
            lo: 0.0,
            hi: std::f64::consts::PI,
        });
    }
    let system = spin_operators(SpinQuantum::new(1.0).expect("1 is a valid spin"));
    let psi = PureState::new(vec![
        Complex64::ZERO,
        Complex64::new(-alpha.sin(), 0.0),
        Complex64::new(alpha.cos(), 0.0),
    ])
    .expect("the two components are a cosine/sine pair");
    assemble(system, alpha, RotationSign::Minus, psi)
}

/// The optimal spin-1 angle, `arccos(sqrt(2) - 1)`.
pub fn spin1_optimal_alpha() -> f64 {
    (2.0_f64.sqrt() - 1.0).acos()
}

/// The four-level construction: state proportional to
/// `sqrt(3) t |+1/2> + sqrt(3) t^2 |-1/2> + t^3 |-3/2>` with `t = tan(theta/2)`,
/// second-time observable `cos(theta) Sz + sin(theta) Sx`, designated `+3/2`.
///
/// The displayed state is exactly normalized only at the root of
/// [`solve_theta32`]; elsewhere it is rescaled defensively.
pub fn spin32_setting(theta: f64) -> Result<SpinSetting, SpinError> {
    // tan(theta/2) blows up at pi; stop well short of it.
    let hi = std::f64::consts::PI - 1e-6;
    if !(theta > 0.0 && theta < hi) {
        return Err(SpinError::AngleOutOfRange {
            angle: theta,
            lo: 0.0,
            hi,
        });
    }
    let system = spin_operators(SpinQuantum::new(1.5).expect("3/2 is a valid spin"));
    let t = (theta / 2.0).tan();
    let raw = vec![
        Complex64::ZERO,
        Complex64::new(3.0_f64.sqrt() * t, 0.0),
        Complex64::new(3.0_f64.sqrt() * t * t, 0.0),
        Complex64::new(t * t * t, 0.0),
    ];
    let psi =
        PureState::normalized(raw).map_err(|source| SpinError::StateNotNormalizable { source })?;
    assemble(system, theta, RotationSign::Plus, psi)
}

/// Squared norm of the unnormalized spin-3/2 state at `theta`:
/// `3 t^2 + 3 t^4 + t^6` with `t = tan(theta/2)`. Equals 1 exactly at the
/// optimal angle.
pub fn spin32_state_norm_sq(theta: f64) -> f64 {
    let t2 = (theta / 2.0).tan().powi(2);
    3.0 * t2 + 3.0 * t2 * t2 + t2 * t2 * t2
}

/// Solves `cot^6(t/2) - 3 cot^4(t/2) - 3 cot^2(t/2) - 1 = 0` for the unique
/// root in `(0, pi)`.
///
/// Substituting `u = cot^2(t/2)` reduces this to the cubic
/// `u^3 - 3u^2 - 3u - 1 = 0`. The cubic's derivative is positive on the
/// bracket and `cot^2` maps `(0, pi)` bijectively onto `(0, inf)`, so the
/// angle root is unique. Bisection keeps the result independent of the
/// closed forms it is tested against.
pub fn solve_theta32() -> f64 {
    let g = |u: f64| u * u * u - 3.0 * u * u - 3.0 * u - 1.0;
    let (mut lo, mut hi) = (3.0, 5.0);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * hi {
            break;
        }
    }
    let u = 0.5 * (lo + hi);
    // cot(theta/2) = sqrt(u)  =>  theta = 2 atan(1/sqrt(u))
    let theta = 2.0 * (1.0 / u.sqrt()).atan();
    debug_assert!(cot_poly_residual(theta) <= 1e-12);
    theta
}

/// `|cot^6 - 3 cot^4 - 3 cot^2 - 1|` at `theta/2`; the defining residual of
/// the spin-3/2 angle equation.
pub fn cot_poly_residual(theta: f64) -> f64 {
    let c2 = 1.0 / (theta / 2.0).tan().powi(2);
    (c2 * c2 * c2 - 3.0 * c2 * c2 - 3.0 * c2 - 1.0).abs()
}

/// A general-spin candidate setting with its structure diagnostics.
#[derive(Clone, Debug)]
pub struct GeneralSpinSetting {
    pub spin_setting: SpinSetting,
    /// Angle found by the one-dimensional search.
    pub theta: f64,
    /// Success probability at `theta`.
    pub p4: f64,
    /// `||P(a2) psi||^2`; 1/2 at the ceiling.
    pub proj_norm_sq: f64,
    /// Phase of the residual basis-state component in
    /// `2 P(a2) psi - psi = e^(i eta) |Sz=+s>`.
    pub phase_eta: f64,
    /// `|| 2 P(a2) psi - psi - e^(i eta) |Sz=+s> ||`.
    pub structure_residual: f64,
}

const THETA_GRID: usize = 2048;
const GOLDEN_TOL: f64 = 1e-12;

/// Builds the candidate setting for arbitrary spin: `A1 = B2 = Sz`,
/// `A2 = B1 = cos(t) Sz + sin(t) Sx`, state = the component of `|A2=+s>`
/// orthogonal to `|Sz=+s>`, with `t` chosen by maximizing the success
/// probability over `(0, pi)` (2048-point grid, then golden-section
/// refinement).
///
/// Finding no angle with positive success would be evidence against the
/// general-spin conjecture and is reported as an error, never swallowed.
pub fn general_spin_setting(s: SpinQuantum) -> Result<GeneralSpinSetting, SpinError> {
    let system = spin_operators(s);
    let pi = std::f64::consts::PI;

    let mut best_k = 0;
    let mut best_p4 = f64::NEG_INFINITY;
    for k in 0..THETA_GRID {
        let theta = pi * (k as f64 + 0.5) / THETA_GRID as f64;
        if let Some(p4) = candidate_p4(&system, theta) {
            if p4 > best_p4 {
                best_p4 = p4;
                best_k = k;
            }
        }
    }
    if best_p4 <= DEFAULT_P4_MIN {
        return Err(SpinError::NoPositiveSuccess {
            spin: s.to_string(),
            best: best_p4,
        });
    }

    // Golden-section refinement around the best grid point.
    let lo = (pi * (best_k as f64 - 0.5) / THETA_GRID as f64).max(1e-9);
    let hi = (pi * (best_k as f64 + 1.5) / THETA_GRID as f64).min(pi - 1e-9);
    let objective = |theta: f64| candidate_p4(&system, theta).unwrap_or(f64::NEG_INFINITY);
    let theta_golden = golden_section_max(objective, lo, hi, GOLDEN_TOL);

    // The maximum is flat (zero derivative), which caps comparison-based
    // search accuracy near sqrt(eps). The first-order condition is sharp:
    // for this family p4 = q(1-q) with q(theta) = ||P(a2) psi||^2 strictly
    // increasing, so the maximizer is the unique root of q = 1/2. Polish
    // with bisection on that root where the bracket allows it.
    let theta = stationarity_root(&system, lo, hi).unwrap_or(theta_golden);

    let (psi, proj_a2) =
        candidate_state(&system, theta).expect("the refined angle stays inside the bracket");
    let spin_setting = assemble(system, theta, RotationSign::Plus, psi.clone())?;
    let report = hardy::evaluate_default(&spin_setting.setting, &psi)?;

    // Structure check: twice the projected state minus the state should be
    // the |Sz=+s> basis vector up to a global phase.
    let projected = proj_a2.apply(psi.amplitudes());
    let proj_norm_sq = projected.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut w: Vec<Complex64> = projected
        .iter()
        .zip(psi.amplitudes())
        .map(|(p, a)| 2.0 * p - a)
        .collect();
    let phase_eta = w[0].arg();
    let rotation = Complex64::from_polar(1.0, phase_eta);
    w[0] -= rotation; // subtract e^(i eta) |Sz=+s>
    let structure_residual = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    Ok(GeneralSpinSetting {
        spin_setting,
        theta,
        p4: report.p4,
        proj_norm_sq,
        phase_eta,
        structure_residual,
    })
}

/// State and second-time projector of the candidate at one angle, or `None`
/// where the construction degenerates (the rotated eigenvector parallel to
/// `|Sz=+s>`).
fn candidate_state(system: &SpinSystem, theta: f64) -> Option<(PureState, Projector)> {
    let obs = rotated_observable(system, theta, RotationSign::Plus);
    let spec = hermitian_eigen(obs.matrix(), CLUSTER_TOL).ok()?;
    // Spectrum is {-s..+s}; the designated +s eigenvector is the last column.
    let v = spec.eigenvector(system.dim() - 1);
    let mut residual = v.clone();
    residual[0] = Complex64::ZERO; // remove the |Sz=+s> component
    let psi = PureState::normalized(residual).ok()?;
    let proj = Projector::from_orthonormal_columns(system.dim(), &[v]);
    Some((psi, proj))
}

fn candidate_p4(system: &SpinSystem, theta: f64) -> Option<f64> {
    let (psi, proj_a2) = candidate_state(system, theta)?;
    let mut first = vec![0.0; system.dim()];
    first[0] = 1.0;
    let proj_b2 = Projector::new(CMatrix::diagonal(&first)).expect("basis projector");
    sequential_prob(&psi, &proj_a2, &proj_b2).ok()
}

/// `||P(a2) psi||^2` of the candidate at one angle.
fn candidate_q(system: &SpinSystem, theta: f64) -> Option<f64> {
    let (psi, proj_a2) = candidate_state(system, theta)?;
    Some(
        proj_a2
            .apply(psi.amplitudes())
            .iter()
            .map(|z| z.norm_sqr())
            .sum(),
    )
}

/// Bisection for the root of `q(theta) = 1/2` inside `[lo, hi]`, if the
/// bracket actually straddles it.
fn stationarity_root(system: &SpinSystem, mut lo: f64, mut hi: f64) -> Option<f64> {
    let g = |theta: f64| candidate_q(system, theta).map(|q| q - 0.5);
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo.signum() == g_hi.signum() {
        return None;
    }
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid)?;
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of a unimodal function.
fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}
