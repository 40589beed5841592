mod common;

use std::collections::BTreeMap;

use common::*;
use qcoord::entropy::{entropy_of, mutual_information, von_neumann_entropy};
use qcoord::qla::linalg::CMatrix;
use qcoord::qla::random::{random_density, random_pure_state, random_unitary};
use qcoord::qla::{DensityOperator, Isometry, PureState};
use qcoord::regions::*;
use qcoord::Error;

fn values(r: &RateBoundReport) -> Vec<f64> {
    r.values()
}

fn assert_values(r: &RateBoundReport, want: &[f64], tol: f64) {
    let got = values(r);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert_close(*g, *w, tol);
    }
}

#[test]
fn cascade_examples() {
    let prod = ket("A", 2, 0).tensor(&plus("B")).unwrap().tensor(&ket("C", 3, 2)).unwrap();
    let r = cascade_bounds(&prod.to_density()).unwrap();
    assert_values(&r, &[0.0; 4], 1e-10);
    assert_eq!(r.bounds.iter().map(|b| b.name.as_str()).collect::<Vec<_>>(), ["Q1", "Q1+E1", "Q2", "Q2+E2"]);

    let r = cascade_bounds(&ghz().to_density()).unwrap();
    assert_values(&r, &[0.0, 1.0, 0.5, 1.0], 1e-9);

    let a = PureState::normalized(layout(&[("A", 2)]), qcoord::qla::CVector::from_vec(vec![0.6.into(), 0.8.into()])).unwrap();
    let w = a.tensor(&bell("B", "C")).unwrap();
    assert_values(&cascade_bounds(&w.to_density()).unwrap(), &[0.0, 0.0, 0.0, 1.0], 1e-9);
}

#[test]
fn cascade_layout_order_does_not_matter() {
    let rho = random_density(layout(&[("A", 2), ("B", 2), ("C", 2)]), 2, &mut rng(8));
    let r1 = cascade_bounds(&rho).unwrap();
    let r2 = cascade_bounds(&rho.reorder(&["C", "A", "B"]).unwrap()).unwrap();
    for (a, b) in values(&r1).iter().zip(values(&r2)) {
        assert_close(*a, b, 1e-9);
    }
    assert!(matches!(cascade_bounds(&rho.relabel(&[("C", "D")]).unwrap()), Err(Error::UnknownLabel(_))));
}

#[test]
fn cascade_membership_is_closed() {
    let r = cascade_bounds(&ghz().to_density()).unwrap();
    let mut rates = BTreeMap::new();
    for (k, v) in [("Q1", 0.0), ("E1", 1.0), ("Q2", 0.5), ("E2", 0.5)] {
        rates.insert(k.to_string(), v);
    }
    assert!(r.contains(&rates));
    rates.insert("E2".into(), 0.49);
    assert!(!r.contains(&rates));
}

#[test]
fn purification_invariance() {
    let mut r = rng(11);
    for _ in 0..10 {
        let rho = random_density(layout(&[("A", 2), ("B", 2), ("C", 2)]), 3, &mut r);
        let psi = rho.purify("R").unwrap();
        let dr = psi.layout().dim_of("R").unwrap();
        let u = Isometry::new(random_unitary(dr, &mut r)).unwrap();
        let rotated = psi.apply_isometry(&u, &["R"], &layout(&[("R", dr)])).unwrap();
        let a = cascade_bounds_from_purification(&psi).unwrap();
        let b = cascade_bounds_from_purification(&rotated).unwrap();
        for (x, y) in values(&a).iter().zip(values(&b)) {
            assert_close(*x, y, 1e-8);
        }
    }
}

#[test]
fn trivial_a_reduces_q2() {
    let rho = random_density(layout(&[("B", 2), ("C", 2)]), 2, &mut rng(12));
    let with_a = DensityOperator::basis(layout(&[("A", 1)]), 0).unwrap().tensor(&rho).unwrap();
    let r = cascade_bounds(&with_a).unwrap();
    let psi = rho.purify("R").unwrap().to_density();
    let half_i = 0.5 * mutual_information(&psi, &["C"], &["R"]).unwrap();
    assert_close(r.value("Q2").unwrap(), half_i, 1e-9);
}

#[test]
fn state_redistribution_examples() {
    let trivial_b = random_pure_state(layout(&[("A", 2), ("B", 1), ("R", 2)]), &mut rng(13));
    assert_values(&state_redistribution_bounds(&trivial_b.to_density()).unwrap(), &[0.0, 0.0], 1e-9);

    // GHZ with BC moved as B and a trivial reference matches the first cascade pair
    let g = ghz().merge(&["B", "C"], "B").unwrap();
    let psi = g.tensor(&ket("R", 1, 0)).unwrap();
    let sr = state_redistribution_bounds(&psi.to_density()).unwrap();
    let cascade = cascade_bounds(&ghz().to_density()).unwrap();
    assert_close(sr.value("Q").unwrap(), cascade.value("Q1").unwrap(), 1e-9);
    assert_close(sr.value("Q+E").unwrap(), cascade.value("Q1+E1").unwrap(), 1e-9);

    let psi = bell("B", "R").tensor(&ket("G", 2, 0)).unwrap();
    assert_values(&state_redistribution_bounds(&psi.to_density()).unwrap(), &[1.0, 1.0], 1e-9);

    let mixed = DensityOperator::maximally_mixed(layout(&[("B", 2), ("R", 2)]));
    assert!(matches!(state_redistribution_bounds(&mixed), Err(Error::NotPure { .. })));
}

fn xy_layout() -> qcoord::qla::SystemLayout {
    layout(&[("X", 2), ("Y", 2)])
}

#[test]
fn broadcast_feasibility_examples() {
    let a = rotated("A", 0.7);
    let mut r = rng(14);
    let states: Vec<DensityOperator> = (0..4)
        .map(|_| a.tensor(&random_density(layout(&[("B", 2), ("C", 2)]), 2, &mut r)).unwrap())
        .collect();
    let cq = ClassicalQuantumState::new(xy_layout(), vec![0.1, 0.2, 0.3, 0.4], states).unwrap();
    let f = broadcast_feasibility(&cq).unwrap();
    assert!(f.feasible && f.residual < 1e-12);

    // sigma_A^(0,0) = |0>, sigma_A^(1,1) = |1>, perfectly correlated X and Y
    let bc = DensityOperator::maximally_mixed(layout(&[("B", 2), ("C", 2)]));
    let s0 = ket("A", 2, 0).to_density().tensor(&bc).unwrap();
    let s1 = ket("A", 2, 1).to_density().tensor(&bc).unwrap();
    let cq = ClassicalQuantumState::new(xy_layout(), vec![0.5, 0.0, 0.0, 0.5], vec![s0.clone(), s0, s1.clone(), s1]).unwrap();
    let f = broadcast_feasibility(&cq).unwrap();
    assert!(!f.feasible);
    // each block sits at distance 1/2 from omega_A = I/2
    assert_close(f.residual, 0.5, 1e-12);
    assert!(matches!(broadcast_bounds(&cq), Err(Error::Infeasible { .. })));

    let trivial = ClassicalQuantumState::new(
        layout(&[("X", 1), ("Y", 1)]),
        vec![1.0],
        vec![random_density(layout(&[("A", 2), ("B", 2), ("C", 2)]), 8, &mut r)],
    )
    .unwrap();
    assert!(broadcast_feasibility(&trivial).unwrap().feasible);
}

#[test]
fn broadcast_bound_examples() {
    let mut r = rng(15);
    let bc = random_density(layout(&[("A", 1), ("B", 2), ("C", 2)]), 3, &mut r);
    let cq = ClassicalQuantumState::new(layout(&[("X", 1), ("Y", 1)]), vec![1.0], vec![bc.clone()]).unwrap();
    let rep = broadcast_bounds(&cq).unwrap();
    assert_close(rep.value("Q1").unwrap(), entropy_of(&bc, &["B"]).unwrap(), 1e-9);
    assert_close(rep.value("Q2").unwrap(), entropy_of(&bc, &["C"]).unwrap(), 1e-9);

    // pure sigma_B^(x): S(B|X) = 0 even though sigma_B on average is mixed
    let states: Vec<DensityOperator> = [ket("B", 2, 0), ket("B", 2, 0), plus("B"), plus("B")]
        .iter()
        .map(|b| b.tensor(&ket("C", 2, 0)).unwrap().to_density())
        .collect();
    let cq = ClassicalQuantumState::new(xy_layout(), vec![0.25; 4], states).unwrap();
    let rep = broadcast_bounds(&cq).unwrap();
    assert!(rep.value("Q1").unwrap() < 1e-9);
    assert_eq!(rep.bounds.iter().map(|b| b.name.as_str()).collect::<Vec<_>>(), ["Q1", "Q2"]);
}

/// `(1 (x) W^dag)(Phi+_{A C1} (x) Phi+_{B C2})` on `A, B, C` with `C = C1 C2`.
fn planted(w: &CMatrix) -> PureState {
    let phi = bell("A", "C1").tensor(&bell("B", "C2")).unwrap();
    let omega = phi.reorder(&["A", "B", "C1", "C2"]).unwrap().merge(&["C1", "C2"], "C").unwrap();
    let wd = Isometry::new(w.adjoint()).unwrap();
    omega.apply_isometry(&wd, &["C"], &layout(&[("C", 4)])).unwrap()
}

#[test]
fn mac_decompose_examples() {
    let split = random_pure_state(layout(&[("A", 2), ("C1", 2)]), &mut rng(16))
        .tensor(&random_pure_state(layout(&[("B", 3), ("C2", 2)]), &mut rng(17)))
        .unwrap()
        .reorder(&["A", "B", "C1", "C2"])
        .unwrap()
        .merge(&["C1", "C2"], "C")
        .unwrap();
    let dec = mac_decompose(&split).unwrap();
    assert!(dec.residual <= 1e-10, "residual {}", dec.residual);

    let err = mac_decompose(&ghz()).unwrap_err();
    match err {
        Error::Infeasible { residual, .. } => assert_close(residual, 0.5, 1e-9),
        other => panic!("unexpected {other:?}"),
    }

    let mut r = rng(18);
    for _ in 0..5 {
        let w = random_unitary(4, &mut r);
        let dec = mac_decompose(&planted(&w)).unwrap();
        assert!(dec.residual <= 1e-7);
        assert!(dec.v.residual() <= 1e-8);
    }
}

#[test]
fn mac_decompose_pads_c2_when_c_is_larger() {
    // |0>_A |+>_B |2>_C: ranks are 1 but C has dimension 3
    let w = ket("A", 2, 0).tensor(&plus("B")).unwrap().tensor(&ket("C", 3, 2)).unwrap();
    let dec = mac_decompose(&w).unwrap();
    assert_eq!(dec.phi.layout().dim_of("C1").unwrap(), 1);
    assert_eq!(dec.chi.layout().dim_of("C2").unwrap(), 3);
    assert!(dec.residual <= 1e-10);
    assert_values(&mac_bounds(&w).unwrap(), &[0.0, 0.0], 1e-10);
}

#[test]
fn mac_bound_examples() {
    let w = random_unitary(4, &mut rng(19));
    assert_values(&mac_bounds(&planted(&w)).unwrap(), &[1.0, 1.0], 1e-8);

    let phi = pure(&[("A", 2), ("C1", 2)], &[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()]);
    let omega = phi
        .tensor(&bell("B", "C2"))
        .unwrap()
        .reorder(&["A", "B", "C1", "C2"])
        .unwrap()
        .merge(&["C1", "C2"], "C")
        .unwrap();
    let rep = mac_bounds(&omega).unwrap();
    assert_close(rep.value("Q1").unwrap(), von_neumann_entropy(&diag("A", &[0.9, 0.1])), 1e-9);
    assert_close(rep.value("Q1").unwrap(), 0.46900, 5e-6);
    assert_close(rep.value("Q2").unwrap(), 1.0, 1e-9);
}
