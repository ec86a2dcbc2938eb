mod common;

use rdnet_core::estimator::{self, assemble, vech};
use rdnet_core::netcore::{kirchhoff_index, laplacian, regularized_inverse, resistance_matrix};
use rdnet_core::MeasurementSet;

#[test]
fn ground_truth_solves_assembled_system() {
    let mut rng = common::rng(11);
    for _ in 0..10 {
        let net = common::random_cppr(&mut rng, 4, 1, 0.7, (0.5, 2.0));
        let r = resistance_matrix(&net).unwrap();
        let k = kirchhoff_index(&net).unwrap();
        let ms = MeasurementSet::new(
            4,
            1,
            [0, 1, 3],
            [(0, 1, r[(0, 1)]), (0, 3, r[(0, 3)]), (1, 3, r[(1, 3)])],
            k,
            0.25,
            2.0,
        )
        .unwrap();
        let x = regularized_inverse(&laplacian(&net)).unwrap();
        let s = assemble(&ms);
        assert!((&s.a * vech(&x) - &s.rhs).amax() < 1e-9);
    }
}

#[test]
fn fully_measured_is_exact() {
    let mut rng = common::rng(12);
    for _ in 0..5 {
        let net = common::random_cppr(&mut rng, 5, 0, 0.8, (0.5, 2.0));
        let r = resistance_matrix(&net).unwrap();
        let k = kirchhoff_index(&net).unwrap();
        let d: Vec<_> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).map(|(i, j)| (i, j, r[(i, j)])).collect();
        let ms = MeasurementSet::new(5, 0, 0..5, d, k, 0.25, 2.0).unwrap();
        let e = estimator::estimate(&ms).unwrap();
        assert!((&e.r - &r).amax() < 1e-6, "{}", (&e.r - &r).amax());
    }
}

fn hidden_node_cases() -> Vec<(MeasurementSet, nalgebra::DMatrix<f64>, usize)> {
    let mut rng = common::rng(13);
    (0..20)
        .map(|case| {
            let net = common::random_cppr(&mut rng, 5, 0, 0.8, (0.5, 2.0));
            let r = resistance_matrix(&net).unwrap();
            let k = kirchhoff_index(&net).unwrap();
            let hidden = case % 5;
            let av: Vec<usize> = (0..5).filter(|&x| x != hidden).collect();
            let d: Vec<_> = av
                .iter()
                .flat_map(|&i| av.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
                .map(|(i, j)| (i, j, r[(i, j)]))
                .collect();
            (MeasurementSet::new(5, 0, av, d, k, 0.25, 2.0).unwrap(), r, hidden)
        })
        .collect()
}

#[test]
fn hidden_node_estimates_are_consistent() {
    for (ms, r, hidden) in hidden_node_cases() {
        let e = estimator::estimate(&ms).unwrap();
        assert!(e.min_constraint >= -1e-6);
        assert!(e.residual < 1e-6, "{}", e.residual);
        for (&(i, j), &d) in ms.distances() {
            assert!((e.r[(i, j)] - d).abs() < 1e-6);
        }
        // With no interior nodes the Kirchhoff index fixes the sum of the
        // hidden node's distances.
        let want: f64 = (0..5).filter(|&a| a != hidden).map(|a| r[(hidden, a)]).sum();
        let got: f64 = (0..5).filter(|&a| a != hidden).map(|a| e.r[(hidden, a)]).sum();
        assert!((want - got).abs() < 1e-6, "{want} {got}");
    }
}

/// Four hidden distances share one equation, so individual entries are
/// not identifiable; this bound does not hold in general.
#[test]
#[ignore = "not identifiable from the measurements"]
fn one_hidden_boundary_node_within_ten_percent() {
    let mut worst: f64 = 0.0;
    for (ms, r, hidden) in hidden_node_cases() {
        let e = estimator::estimate(&ms).unwrap();
        for &a in ms.available() {
            worst = worst.max((e.r[(hidden, a)] - r[(hidden, a)]).abs() / r[(hidden, a)]);
        }
    }
    assert!(worst <= 0.10, "worst relative error {worst}");
}

#[test]
fn re_estimating_with_estimates_is_stable() {
    let ms =
        MeasurementSet::new(4, 2, [0, 2, 3], [(0, 2, 1.4984), (0, 3, 1.351), (2, 3, 1.0795)], 19.8, 0.25, 2.0).unwrap();
    let e = estimator::estimate(&ms).unwrap();
    let full = ms.fully_measured(&e.r, &[0, 1, 2, 3]).unwrap();
    let e2 = estimator::estimate(&full).unwrap();
    let rb = e.r.view((0, 0), (4, 4)).into_owned();
    let rb2 = e2.r.view((0, 0), (4, 4)).into_owned();
    assert!((rb - rb2).amax() < 1e-6);
}
