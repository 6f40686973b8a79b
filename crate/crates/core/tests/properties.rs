mod common;

use common::*;
use deadbeat::linear::{self, LinearSystem};
use deadbeat::nonlinear::{ControlledSystem, Dilation, HomogeneousSystem, PositiveSystem};
use deadbeat::simulate;
use deadbeat::subspace::{self, AffineSet, Tolerance};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn triple() -> impl Strategy<Value = (DMatrix<f64>, deadbeat::Subspace, deadbeat::Subspace)> {
    (1usize..=8).prop_flat_map(|n| (square_matrix(n), subspace_in(n), subspace_in(n)))
}

fn point(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-3.0f64..3.0, n).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn complement_of_sum_is_intersection_of_complements((s, t) in pair_of_subspaces()) {
        duality(&s, &t)?;
    }

    #[test]
    fn preimage_complement_matches_transposed_image((a, s) in matrix_and_subspace()) {
        preimage_identity(&a, &s)?;
    }

    #[test]
    fn sum_and_intersection_dimensions_add_up((s, t) in pair_of_subspaces()) {
        dimension_formula(&s, &t)?;
    }

    #[test]
    fn repeated_calls_are_bitwise_identical((a, s, t) in triple()) {
        determinism(&a, &s, &t)?;
    }

    #[test]
    fn affine_intersection_is_symmetric(
        (s, t, p, q) in (1usize..=6).prop_flat_map(|n| (subspace_in(n), subspace_in(n), point(n), point(n)))
    ) {
        let tol = Tolerance::default();
        let x = AffineSet::new(p, s).unwrap();
        let y = AffineSet::new(q, t).unwrap();
        let xy = subspace::affine_intersect(&x, &y, &tol).unwrap();
        let yx = subspace::affine_intersect(&y, &x, &tol).unwrap();
        prop_assert_eq!(xy.is_some(), yx.is_some());
        if let (Some(u), Some(v)) = (xy, yx) {
            prop_assert!((u.point() - v.point()).norm() <= 1e-8 * (1.0 + u.point().norm()));
            prop_assert!(subspace_gap(u.direction(), v.direction()) <= 1e-8);
            prop_assert!(x.contains(u.point(), &tol) && y.contains(u.point(), &tol));
        }
    }

    #[test]
    fn uncontrollable_chains_stay_proper(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = deadbeat::random::run_rng(seed, 0);
        let sys = deadbeat::random::uncontrollable_pair(&mut rng, n, 1);
        let tol = Tolerance::default();
        prop_assert!(!linear::geometric_controllable(&sys, &tol).unwrap());
        let chain = linear::subspace_chain(&sys, n, &tol).unwrap();
        prop_assert!(chain.dims().iter().all(|&d| d < n));
        prop_assert!(chain.dims().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reference_trajectory_ignores_the_tracker(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = deadbeat::random::run_rng(seed, 1);
        let sys = deadbeat::random::controllable_pair(&mut rng, n, 1, &Default::default()).unwrap();
        let x0 = deadbeat::random::gaussian_vector(&mut rng, n);
        let a = sys.a().clone();
        let coupled = simulate::simulate_coupled(
            |xh, _| Ok(xh * 0.5),
            |x| Ok(&a * x),
            &x0,
            &DVector::zeros(n),
            6,
            1e-8,
        ).unwrap();
        let alone = simulate::simulate_autonomous(|x| Ok(&a * x), &x0, 6).unwrap();
        prop_assert_eq!(coupled.reference, alone);
    }

    #[test]
    fn once_inside_the_base_class_tracking_is_exact(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = deadbeat::random::run_rng(seed, 2);
        let sys: LinearSystem =
            deadbeat::random::controllable_pair(&mut rng, n, 1, &Default::default()).unwrap();
        let tol = Tolerance::default();
        let tracker = linear::LinearTracker::from_system(&sys, &tol).unwrap();
        let x = deadbeat::random::gaussian_vector(&mut rng, n);
        let u = deadbeat::random::gaussian_vector(&mut rng, 1);
        let xhat = &x + sys.b() * u;
        prop_assert_eq!(tracker.pi_level(&xhat, &x).unwrap(), 1);
        let next = tracker.step(&xhat, &x).unwrap();
        let fx = sys.a() * &x;
        prop_assert!((next - &fx).norm() <= 1e-8 * (1.0 + fx.norm()));
    }
}

fn homogeneous_state() -> impl Strategy<Value = [f64; 3]> {
    [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]
}

fn positive_state() -> impl Strategy<Value = [f64; 3]> {
    [0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0]
}

fn rel(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    d / b
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn homogeneous_f_is_a_bijection(x in homogeneous_state()) {
        let s = HomogeneousSystem;
        prop_assert!(rel(&s.f_inv(&s.f(&x).unwrap()).unwrap(), &x) <= 1e-9);
        prop_assert!(rel(&s.f(&s.f_inv(&x).unwrap()).unwrap(), &x) <= 1e-9);
    }

    #[test]
    fn positive_f_is_a_bijection(x in positive_state()) {
        let s = PositiveSystem;
        prop_assert!(rel(&s.f_inv(&s.f(&x).unwrap()).unwrap(), &x) <= 1e-9);
        prop_assert!(rel(&s.f(&s.f_inv(&x).unwrap()).unwrap(), &x) <= 1e-9);
    }

    #[test]
    fn homogeneous_maps_commute_with_dilation(
        x in homogeneous_state(),
        xh in homogeneous_state(),
        u in -2.0f64..2.0,
        lambda in prop_oneof![-2.0f64..-0.05, 0.05f64..2.0],
    ) {
        let s = HomogeneousSystem;
        let d = Dilation::new(lambda);
        prop_assert!(rel(&s.f(&d.apply(&x)).unwrap(), &d.apply(&s.f(&x).unwrap())) <= 1e-9);
        prop_assert!(rel(&s.mu(&d.apply(&x), lambda * u).unwrap(), &d.apply(&s.mu(&x, u).unwrap())) <= 1e-9);
        let k = s.kappa(&xh, &x).unwrap();
        let kd = s.kappa(&d.apply(&xh), &d.apply(&x)).unwrap();
        prop_assert!((kd - lambda * k).abs() <= 1e-9 * (lambda * k).abs().max(1e-300) || kd == lambda * k,
            "kappa {kd} vs {}", lambda * k);
    }

    #[test]
    fn demo_control_lands_in_both_classes(x in homogeneous_state(), xh in homogeneous_state(),
                                          p in positive_state(), ph in positive_state()) {
        prop_assert!(HomogeneousSystem.class_membership_check(&xh, &x, 1e-9).unwrap());
        prop_assert!(PositiveSystem.class_membership_check(&ph, &p, 1e-9).unwrap());
    }

    #[test]
    fn positive_tracker_stays_positive(x in positive_state(), xh in positive_state()) {
        let s = PositiveSystem;
        let u = s.kappa(&xh, &x).unwrap();
        prop_assert!(u > 0.0);
        let z = s.mu(&xh, u).unwrap();
        prop_assert!(z.iter().all(|v| *v > 0.0));
        prop_assert!(s.tracker_step(&xh, &x).unwrap().iter().all(|v| *v > 0.0));
    }
}
