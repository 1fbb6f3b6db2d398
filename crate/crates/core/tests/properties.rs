//! Property tests over randomized inputs: the structural invariants of the
//! measurement layer and the evaluation layer, driven by seeds so failures
//! shrink to a reproducible generator state.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thardy_core::hardy::{classify_condition_sets, evaluate_default, witness, MeasurementSetting};
use thardy_core::qcore::{
    born_prob, born_prob_raw, hermitian_eigen, psd_order, sequential_prob_raw, CMatrix, Observable,
    Projector, PureState,
};

fn random_state(dim: usize, rng: &mut impl Rng) -> PureState {
    let amps: Vec<num_complex::Complex64> = (0..dim)
        .map(|_| {
            num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .collect();
    PureState::normalized(amps).unwrap_or_else(|_| PureState::basis_state(dim, 0))
}

/// A random setting with designated outcomes taken from the spectra, so
/// construction always succeeds.
fn random_setting(dim: usize, rng: &mut ChaCha8Rng) -> MeasurementSetting {
    let make = |rng: &mut ChaCha8Rng| {
        let h = witness::random_hermitian(dim, rng);
        let spec = hermitian_eigen(&h, 1e-8).unwrap();
        let cluster = rng.random_range(0..spec.clusters().len());
        Observable::new(h, spec.cluster_value(cluster)).unwrap()
    };
    let (a1, a2, b1, b2) = (make(rng), make(rng), make(rng), make(rng));
    MeasurementSetting::new(a1, a2, b1, b2, 1e-8).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_reconstruction_and_unitarity(seed in any::<u64>(), dim in 2usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = witness::random_hermitian(dim, &mut rng);
        let spec = hermitian_eigen(&h, 1e-8).unwrap();
        let rec = (&spec.reconstruct() - &h).frobenius_norm();
        prop_assert!(rec <= 1e-9 * h.frobenius_norm().max(1e-300));
        let v = spec.eigenvectors();
        let gram = (&(&v.adjoint() * v) - &CMatrix::identity(dim)).frobenius_norm();
        prop_assert!(gram <= 1e-10);
    }

    #[test]
    fn spectral_projectors_are_complete_and_normalize_born(
        seed in any::<u64>(),
        dim in 2usize..=10,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = witness::random_hermitian(dim, &mut rng);
        let spec = hermitian_eigen(&h, 1e-8).unwrap();
        let mut sum = CMatrix::zeros(dim);
        for p in spec.projectors() {
            sum = &sum + p.matrix();
        }
        prop_assert!((&sum - &CMatrix::identity(dim)).frobenius_norm() <= 1e-9);

        let psi = random_state(dim, &mut rng);
        let total: f64 = spec
            .projectors()
            .iter()
            .map(|p| born_prob(&psi, p).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn second_measurement_marginalizes_out(seed in any::<u64>(), dim in 2usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = witness::random_unitary(dim, &mut rng);
        let k1 = rng.random_range(1..dim);
        let k2 = rng.random_range(1..dim);
        let p1 = projector_from_columns(&u, 0..k1);
        let u2 = witness::random_unitary(dim, &mut rng);
        let p2 = projector_from_columns(&u2, 0..k2);
        let psi = random_state(dim, &mut rng);

        let with = sequential_prob_raw(&psi, &p1, &p2).unwrap();
        let without = sequential_prob_raw(&psi, &p1, &p2.complement()).unwrap();
        let marginal = born_prob_raw(&psi, &p1).unwrap();
        prop_assert!((with + without - marginal).abs() <= 1e-9);
    }

    #[test]
    fn loewner_order_is_a_partial_order_on_nested_frames(
        seed in any::<u64>(),
        dim in 3usize..=10,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = witness::random_unitary(dim, &mut rng);
        // nested chain small <= mid <= big from one unitary
        let k1 = rng.random_range(1..dim - 1);
        let k2 = rng.random_range(k1..dim);
        let small = projector_from_columns(&u, 0..k1);
        let mid = projector_from_columns(&u, 0..k2);
        let big = Projector::identity(dim);

        // reflexivity
        prop_assert!(psd_order(&small, &small, 1e-10).unwrap());
        // chain order and transitivity
        prop_assert!(psd_order(&small, &mid, 1e-10).unwrap());
        prop_assert!(psd_order(&mid, &big, 1e-10).unwrap());
        prop_assert!(psd_order(&small, &big, 1e-10).unwrap());
        // antisymmetry: mutual order forces equality
        if psd_order(&mid, &small, 1e-10).unwrap() {
            let diff = (&(mid.matrix().clone()) - small.matrix()).frobenius_norm();
            prop_assert!(diff <= 1e-8);
        }
    }

    #[test]
    fn double_complement_is_an_involution(seed in any::<u64>(), dim in 2usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = witness::random_unitary(dim, &mut rng);
        let k = rng.random_range(1..dim);
        let p = projector_from_columns(&u, 0..k);
        let back = p.complement().complement();
        prop_assert_eq!(back.rank(), p.rank());
        let drift = (&(back.matrix().clone()) - p.matrix()).frobenius_norm();
        prop_assert!(drift <= 1e-15);
        // complement partitions the identity exactly
        let sum = &(p.matrix().clone()) + p.complement().matrix();
        prop_assert_eq!(sum, CMatrix::identity(dim));
    }

    #[test]
    fn probabilities_stay_in_range_and_set1_is_dead(
        seed in any::<u64>(),
        dim in 2usize..=10,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let setting = random_setting(dim, &mut rng);
        let psi = random_state(dim, &mut rng);
        let report = evaluate_default(&setting, &psi).unwrap();
        for (p, raw) in [report.p1, report.p2, report.p3, report.p4]
            .iter()
            .zip(report.raw)
        {
            prop_assert!((0.0..=1.0).contains(p));
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&raw));
        }
        let class = classify_condition_sets(&setting, &psi, 1e-10).unwrap();
        prop_assert!(!class.satisfied_sets.contains(&1));
    }

    #[test]
    fn generated_witnesses_never_score(seed in any::<u64>(), dim in 2usize..=8) {
        // The theorem the refutation certificates encode, as a bulk
        // property: operator-level witnesses of sets 3 and 4 cannot have
        // positive success probability.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (setting, psi) = witness::set3_witness(dim, &mut rng).unwrap();
        prop_assert!(evaluate_default(&setting, &psi).unwrap().raw[3] <= 1e-9);
        let (setting, psi) = witness::set4_witness(dim, &mut rng).unwrap();
        prop_assert!(evaluate_default(&setting, &psi).unwrap().raw[3] <= 1e-9);
    }
}

fn projector_from_columns(u: &CMatrix, cols: std::ops::Range<usize>) -> Projector {
    let mut m = CMatrix::zeros(u.dim());
    for j in cols {
        let col = u.column(j);
        m = &m + &CMatrix::outer(&col);
    }
    Projector::new(m).unwrap()
}

/// Bulk version of the range property: a thousand random setting/state
/// pairs across dimensions 2..=10 in one seeded sweep.
#[test]
fn thousand_random_evaluations_stay_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    for k in 0..1000 {
        let dim = 2 + (k % 9);
        let setting = random_setting(dim, &mut rng);
        let psi = random_state(dim, &mut rng);
        let report = evaluate_default(&setting, &psi).unwrap();
        for (p, raw) in [report.p1, report.p2, report.p3, report.p4]
            .iter()
            .zip(report.raw)
        {
            assert!((0.0..=1.0).contains(p), "sample {k}");
            assert!((-1e-9..=1.0 + 1e-9).contains(&raw), "sample {k}");
        }
    }
}
