mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rdnet_core::netcore::{
    incidence_column, kirchhoff_index, laplacian, laplacian_pinv, resistance_distance, resistance_matrix,
    resistance_matrix_from_pinv,
};
use rdnet_core::{Network, NetworkF32};

#[test]
fn incidence_rebuilds_laplacian() {
    let mut rng = common::rng(31);
    for _ in 0..30 {
        let n = rng.gen_range(2..=8);
        let net = common::random_connected(&mut rng, n, n, (0.1, 5.0));
        let mut l = DMatrix::<f64>::zeros(n, n);
        for (k, e) in net.edges().iter().enumerate() {
            let b = incidence_column(&net, k).unwrap();
            l += e.conductance * &b * b.transpose();
        }
        let lap = laplacian(&net);
        assert!((l - &lap).amax() < 1e-12);
        for i in 0..n {
            assert!(lap.row(i).sum().abs() < 1e-12);
        }
    }
}

#[test]
fn resistance_matrix_matches_pseudoinverse() {
    let mut rng = common::rng(32);
    for _ in 0..30 {
        let n = rng.gen_range(2..=8);
        let net = common::random_connected(&mut rng, n, n, (0.1, 5.0));
        let pinv = laplacian_pinv(&laplacian(&net)).unwrap();
        let r = resistance_matrix(&net).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = pinv[(i, i)] + pinv[(j, j)] - 2.0 * pinv[(i, j)];
                assert!((r[(i, j)] - want).abs() < 1e-12);
            }
        }
        assert!((resistance_matrix_from_pinv(&pinv) - r).amax() < 1e-12);
    }
}

#[test]
fn raising_a_conductance_never_raises_a_distance() {
    let mut rng = common::rng(33);
    for _ in 0..50 {
        let n = rng.gen_range(3..=8);
        let net = common::random_connected(&mut rng, n, n, (0.2, 3.0));
        let r0 = resistance_matrix(&net).unwrap();
        let mut c = net.conductances();
        let l = rng.gen_range(0..c.len());
        c[l] *= rng.gen_range(1.01..4.0);
        let r1 = resistance_matrix(&net.with_conductances(&c).unwrap()).unwrap();
        assert!((r1 - r0).max() <= 1e-10);
    }
}

#[test]
fn single_precision_agrees() {
    let mut rng = common::rng(34);
    for _ in 0..10 {
        let net = common::random_connected(&mut rng, 6, 5, (0.5, 2.0));
        let net32: NetworkF32 =
            Network::new(6, 0, net.edges().iter().map(|e| (e.u, e.v, e.conductance as f32))).unwrap();
        let k64 = kirchhoff_index(&net).unwrap();
        let k32 = kirchhoff_index(&net32).unwrap() as f64;
        assert!((k64 - k32).abs() / k64 < 1e-4, "{k64} {k32}");
    }
}

fn network(n: usize, seed: u64) -> Network<f64> {
    let mut rng = common::rng(seed);
    common::random_connected(&mut rng, n, n, (0.1, 10.0))
}

proptest! {
    #[test]
    fn distances_form_a_metric(n in 2usize..9, seed in any::<u64>()) {
        let r = resistance_matrix(&network(n, seed)).unwrap();
        for i in 0..n {
            prop_assert!(r[(i, i)].abs() < 1e-12);
            for j in 0..n {
                prop_assert!((r[(i, j)] - r[(j, i)]).abs() < 1e-12);
                if i != j {
                    prop_assert!(r[(i, j)] > 0.0);
                }
                for k in 0..n {
                    prop_assert!(r[(i, k)] <= r[(i, j)] + r[(j, k)] + 1e-10);
                }
            }
        }
    }

    #[test]
    fn scaling_conductances_scales_distances(n in 2usize..9, seed in any::<u64>(), s in 0.1f64..10.0) {
        let net = network(n, seed);
        let c: Vec<f64> = net.conductances().iter().map(|x| s * x).collect();
        let k0 = kirchhoff_index(&net).unwrap();
        let k1 = kirchhoff_index(&net.with_conductances(&c).unwrap()).unwrap();
        prop_assert!((k1 * s - k0).abs() <= 1e-9 * k0);
    }

    /// Sum over edges of conductance times edge resistance is `n - 1`.
    #[test]
    fn foster_identity(n in 2usize..9, seed in any::<u64>()) {
        let net = network(n, seed);
        let total: f64 = net.edges().iter().map(|e| e.conductance * resistance_distance(&net, e.u, e.v).unwrap()).sum();
        prop_assert!((total - (n as f64 - 1.0)).abs() < 1e-9);
    }
}
