mod common;

use std::collections::BTreeMap;

use common::*;
use contextuality_optics::context_verifier::{
    relabeled_network, verify_relabel_equivalence, verify_shared_observable, ContextPair,
    LogicalPermutation,
};
use contextuality_optics::contextuality_oracle::{
    classical_bound_bruteforce, classical_minimum_bruteforce, orthogonality_graph, quantum_value,
    random_pure_state, CompatibilityGraph, DensityMatrix, InequalityExpression,
};
use contextuality_optics::mode_calculus::{
    apply, compose, max_norm, unitarity_deviation, AmplitudeVector, ModeBasis, ModeLabel,
    UnitaryMap,
};
use contextuality_optics::observable_extraction::{
    commutes, extract_projector, pull_back, LogicalMatrix,
};
use contextuality_optics::optical_elements::{
    element_to_unitary, hwp_matrix, network_unitary, ElementSpec, NetworkSpec,
};
use contextuality_optics::{config, Error};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random unitary from the QR factorization of a complex Gaussian matrix.
fn random_unitary(rng: &mut impl Rng, basis: &ModeBasis) -> UnitaryMap {
    let n = basis.len();
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    UnitaryMap::new(basis.clone(), g.qr().q()).unwrap()
}

fn random_state(rng: &mut impl Rng, basis: &ModeBasis) -> AmplitudeVector {
    AmplitudeVector::new(
        basis.clone(),
        (0..basis.len()).map(|_| gaussian(rng)).collect(),
    )
    .unwrap()
}

#[test]
fn apply_preserves_norm_on_1000_states() {
    let mut r = rng(1);
    let basis = ModeBasis::from_paths(&["a", "b", "c"]).unwrap();
    let u = random_unitary(&mut r, &basis);
    for _ in 0..1000 {
        let v = random_state(&mut r, &basis);
        let out = apply(&u, &v).unwrap();
        assert!((out.norm() - v.norm()).abs() <= 1e-12 * v.norm().max(1.0));
    }
}

#[test]
fn network_fold_matches_independent_fold() {
    let mut r = rng(2);
    for _ in 0..200 {
        let net = random_network(&mut r, 8);
        let u = network_unitary(&net).unwrap();
        let oracle = oracle_network(&net);
        for (i, row) in oracle.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert!((u.matrix()[(i, j)] - x).norm() <= 1e-12);
            }
        }
        assert!(unitarity_deviation(u.matrix()) <= 1e-12);
    }
}

#[test]
fn completeness_of_three_detectors() {
    let mut r = rng(3);
    for _ in 0..200 {
        let net = random_qutrit_network(&mut r, 6);
        let mut total = LogicalMatrix::zeros();
        for name in net.detectors().keys() {
            total += extract_projector(&net, name).unwrap().matrix();
        }
        assert!(max_norm(&(total - LogicalMatrix::identity())) <= 1e-9);
    }
}

#[test]
fn basis_change_covariance() {
    let mut r = rng(4);
    let perms = [
        [0, 1, 2],
        [1, 0, 2],
        [2, 1, 0],
        [0, 2, 1],
        [1, 2, 0],
        [2, 0, 1],
    ];
    for _ in 0..100 {
        let net = random_qutrit_network(&mut r, 6);
        for image in perms {
            let perm = LogicalPermutation::new(image).unwrap();
            let report = verify_relabel_equivalence(&net, &perm, 1e-9).unwrap();
            assert!(report.passed, "{image:?}: {report:?}");
        }
    }
}

#[test]
fn detector_exchange_permutes_projectors() {
    let mut r = rng(5);
    for _ in 0..50 {
        let net = random_qutrit_network(&mut r, 6);
        let mut swapped = net.detectors().clone();
        let d0 = swapped["D0"].clone();
        let d2 = swapped["D2"].clone();
        swapped.insert("D0".into(), d2);
        swapped.insert("D2".into(), d0);
        let other = net.with_detectors(swapped).unwrap();
        let p = |n: &NetworkSpec, d: &str| extract_projector(n, d).unwrap();
        assert_eq!(p(&net, "D0"), p(&other, "D2"));
        assert_eq!(p(&net, "D2"), p(&other, "D0"));
        assert_eq!(p(&net, "D1"), p(&other, "D1"));
    }
}

#[test]
fn raw_block_matches_oracle_even_when_leaking() {
    let mut r = rng(6);
    for _ in 0..200 {
        let net = random_network(&mut r, 6);
        for name in net.detectors().keys() {
            let (block, idem) = oracle_projector(&net, name);
            let pulled = pull_back(&net, name).unwrap();
            assert!(max_diff(&to_dense3(&pulled.block), &block) <= 1e-12);
            match extract_projector(&net, name) {
                Ok(p) => {
                    assert!(idem <= 1e-9);
                    assert!(max_diff(&to_dense3(p.matrix()), &block) <= 1e-12);
                }
                Err(Error::Leakage { .. }) => assert!(idem > 1e-9),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn ancilla_plate_never_moves_shared_projector() {
    // third path `c` never meets a splitter
    let basis = ModeBasis::from_paths(&["a", "b", "c"]).unwrap();
    let mut r = rng(7);
    for _ in 0..100 {
        let qutrit = random_qutrit_network(&mut r, 6);
        let mut with_c = qutrit.elements().to_vec();
        let at = r.random_range(0..=with_c.len());
        with_c.insert(at, ElementSpec::hwp("c", r.random_range(0.0..6.3)));
        let left = NetworkSpec::new(
            basis.clone(),
            qutrit.elements().to_vec(),
            qutrit_detectors(),
            qutrit_inputs(),
        )
        .unwrap();
        let right =
            NetworkSpec::new(basis.clone(), with_c, qutrit_detectors(), qutrit_inputs()).unwrap();
        for d in ["D0", "D1", "D2"] {
            let pair = ContextPair::new(left.clone(), right.clone(), d).unwrap();
            let rep = verify_shared_observable(&pair, 1e-12).unwrap();
            assert!(rep.passed && rep.deviation <= 1e-12);
            assert_eq!(
                rep.deviation,
                verify_shared_observable(&pair.swapped(), 1e-12)
                    .unwrap()
                    .deviation
            );
        }
    }
}

#[test]
fn relabel_twice_restores_status() {
    let mut r = rng(8);
    let swap = LogicalPermutation::swap(2, 0).unwrap();
    for _ in 0..50 {
        let net = random_qutrit_network(&mut r, 6);
        let once = verify_relabel_equivalence(&net, &swap, 1e-9).unwrap();
        let twice_net = relabeled_network(&relabeled_network(&net, &swap).unwrap(), &swap).unwrap();
        for d in net.detectors().keys() {
            let a = extract_projector(&net, d).unwrap();
            let b = extract_projector(&twice_net, d).unwrap();
            assert!(a.distance(&b) <= 1e-12);
        }
        let again = verify_relabel_equivalence(&twice_net, &swap, 1e-9).unwrap();
        assert_eq!(once.passed, again.passed);
    }
}

#[test]
fn bundled_violation_positive_for_every_state() {
    let ineq = config::bundled_yu_oh_13();
    let bound = classical_bound_bruteforce(&ineq.expr).unwrap();
    let bound = *bound.bound.numer() as f64 / *bound.bound.denom() as f64;
    let mut r = rng(9);
    for _ in 0..200 {
        let rho = DensityMatrix::pure(&random_pure_state(&mut r)).unwrap();
        assert!(quantum_value(&ineq.expr, &ineq.rays, &rho).unwrap() > bound);
    }
}

#[test]
fn orthogonality_edges_commute() {
    let ineq = config::bundled_yu_oh_13();
    let obs = ineq.rays.observables().unwrap();
    for &(i, j) in ineq.graph.edges() {
        assert!(commutes(&obs[i], &obs[j], 1e-9).0);
    }
}

fn random_expression(r: &mut impl Rng, n: usize, with_vertex: bool) -> InequalityExpression {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|_| r.random_bool(0.4))
        .collect();
    let graph = CompatibilityGraph::new(n, edges).unwrap();
    let vertex = (0..n)
        .map(|_| {
            if with_vertex {
                Rational64::new(r.random_range(-6..=6), r.random_range(1..=4))
            } else {
                Rational64::from_integer(0)
            }
        })
        .collect();
    let edge_coeffs: BTreeMap<_, _> = graph
        .edges()
        .iter()
        .map(|&e| {
            (
                e,
                Rational64::new(r.random_range(-6..=6), r.random_range(1..=4)),
            )
        })
        .collect();
    InequalityExpression::new(graph, vertex, edge_coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitarity_of_every_element(theta in 0.0..std::f64::consts::TAU, seed in any::<u64>()) {
        let basis = ModeBasis::from_paths(&["a", "b", "c"]).unwrap();
        let mut r = rng(seed);
        let labels = basis.labels().to_vec();
        let i = r.random_range(0..labels.len());
        let j = (i + 1 + r.random_range(0..labels.len() - 1)) % labels.len();
        for el in [
            ElementSpec::hwp("b", theta),
            ElementSpec::pbs("c", "a"),
            ElementSpec::swap(labels[i].clone(), labels[j].clone()),
        ] {
            let u = element_to_unitary(&el, &basis).unwrap();
            prop_assert!(unitarity_deviation(u.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn hwp_angle_additivity(t1 in -10.0..10.0f64, t2 in -10.0..10.0f64) {
        let prod = hwp_matrix(t1).unwrap() * hwp_matrix(t2).unwrap();
        prop_assert!(max_norm(&(prod - hwp_matrix(t1 + t2).unwrap())) <= 1e-12);
    }

    #[test]
    fn hwp_matches_formula(theta in 0.0..std::f64::consts::TAU) {
        let m = hwp_matrix(theta).unwrap();
        let f = hwp_formula(theta);
        for r in 0..2 {
            for col in 0..2 {
                prop_assert!((m[(r, col)] - c(f[r][col])).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn compose_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let basis = ModeBasis::from_paths(&["a", "b"]).unwrap();
        let (a, b, cc) = (random_unitary(&mut r, &basis), random_unitary(&mut r, &basis), random_unitary(&mut r, &basis));
        let left = compose(&compose(&a, &b).unwrap(), &cc).unwrap();
        let right = compose(&a, &compose(&b, &cc).unwrap()).unwrap();
        prop_assert!(max_norm(&(left.matrix() - right.matrix())) <= 1e-12);
    }

    #[test]
    fn deviation_is_nonnegative_and_vanishes_on_equal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_qutrit_network(&mut r, 6);
        let b = random_qutrit_network(&mut r, 6);
        let same = ContextPair::new(a.clone(), a.clone(), "D1").unwrap();
        prop_assert_eq!(verify_shared_observable(&same, 1e-9).unwrap().deviation, 0.0);
        let pair = ContextPair::new(a, b, "D1").unwrap();
        let d = verify_shared_observable(&pair, 1e-9).unwrap().deviation;
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d, verify_shared_observable(&pair.swapped(), 1e-9).unwrap().deviation);
    }

    #[test]
    fn edge_only_bound_is_sign_flip_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let expr = random_expression(&mut r, 9, false);
        let b = classical_bound_bruteforce(&expr).unwrap();
        let flipped: Vec<i8> = b.assignment.iter().map(|a| -a).collect();
        prop_assert_eq!(expr.evaluate(&flipped), b.bound);
    }

    #[test]
    fn negation_swaps_max_and_min(seed in any::<u64>()) {
        let mut r = rng(seed);
        let expr = random_expression(&mut r, 10, true);
        let max = classical_bound_bruteforce(&expr).unwrap();
        let min = classical_minimum_bruteforce(&expr).unwrap();
        let neg = expr.negated();
        prop_assert_eq!(classical_bound_bruteforce(&neg).unwrap().bound, -min.bound);
        prop_assert_eq!(classical_minimum_bruteforce(&neg).unwrap().bound, -max.bound);
        prop_assert_eq!(expr.evaluate(&max.assignment), max.bound);
        prop_assert!(min.bound <= max.bound);
    }

    #[test]
    fn quantum_value_is_linear_in_state(seed in any::<u64>()) {
        let ineq = config::bundled_yu_oh_13();
        let mut r = rng(seed);
        // state-dependent expression: first four vertices only
        let graph = orthogonality_graph(&ineq.rays, 1e-9);
        let vertex = (0..13).map(|i| Rational64::from_integer(if i < 4 { i as i64 + 1 } else { 0 })).collect();
        let expr = InequalityExpression::new(graph, vertex, BTreeMap::new()).unwrap();
        let p1 = DensityMatrix::pure(&random_pure_state(&mut r)).unwrap();
        let p2 = DensityMatrix::pure(&random_pure_state(&mut r)).unwrap();
        let half = Complex64::new(0.5, 0.0);
        let mix = DensityMatrix::new(p1.matrix() * half + p2.matrix() * half).unwrap();
        let lhs = quantum_value(&expr, &ineq.rays, &mix).unwrap();
        let rhs = 0.5 * quantum_value(&expr, &ineq.rays, &p1).unwrap() + 0.5 * quantum_value(&expr, &ineq.rays, &p2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }

    #[test]
    fn network_files_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        // start from a file, as a user would
        let text = config::serialize_network(&random_network(&mut r, 8)).unwrap();
        let first = config::parse_network_str(&text).unwrap();
        let again = config::serialize_network(&first).unwrap();
        let second = config::parse_network_str(&again).unwrap();
        prop_assert_eq!(&second, &first);
        prop_assert_eq!(config::serialize_network(&second).unwrap(), again);
    }

    #[test]
    fn degrees_round_trip(deg in -720.0..720.0f64) {
        let rad = config::degrees_to_radians(deg);
        prop_assert_eq!(config::degrees_to_radians(config::radians_to_degrees(rad)), rad);
    }
}

#[test]
fn relabel_element_on_logical_label_outside_basis_fails() {
    let basis = ModeBasis::from_paths(&["a", "b"]).unwrap();
    let el = ElementSpec::swap(ModeLabel::h("a"), ModeLabel::h("z"));
    assert!(element_to_unitary(&el, &basis).is_err());
}
