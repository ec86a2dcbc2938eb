use rdnet_core::io::ResultJson;
use rdnet_core::netcore::{kirchhoff_index, resistance_matrix};
use rdnet_core::pipeline::{reconstruct, PipelineConfig, Stage};
use rdnet_core::planarity::{is_planar, Graph};
use rdnet_core::{MeasurementSet, Network};

fn example() -> MeasurementSet {
    MeasurementSet::new(4, 2, [0, 2, 3], [(0, 2, 1.4984), (0, 3, 1.351), (2, 3, 1.0795)], 19.8, 0.25, 2.0).unwrap()
}

#[test]
fn example_end_to_end() {
    let ms = example();
    let res = reconstruct(&ms, &PipelineConfig::default()).unwrap();
    let net = res.network().unwrap();
    assert_eq!(net.n_b(), 4);
    assert!(net.n_i() <= 2);
    assert!(net.is_connected());
    assert!(is_planar(&Graph::new(net.node_count(), net.pairs())));
    let r = resistance_matrix(&net).unwrap();
    for (&(i, j), &d) in ms.distances() {
        assert!((r[(i, j)] - d).abs() / d <= 0.05, "r({i},{j}) = {} vs {d}", r[(i, j)]);
    }
    let k = kirchhoff_index(&net).unwrap();
    assert!((k - 19.8).abs() / 19.8 <= 0.05, "K = {k}");
}

#[test]
fn example_is_reproducible() {
    let ms = example();
    let cfg = PipelineConfig { seed: 7, ..PipelineConfig::default() };
    let a = reconstruct(&ms, &cfg).unwrap();
    let b = reconstruct(&ms, &cfg).unwrap();
    let strip = |mut j: ResultJson| {
        j.report.timings.clear();
        serde_json::to_string(&j).unwrap()
    };
    assert_eq!(strip(ResultJson::new(&a, &cfg)), strip(ResultJson::new(&b, &cfg)));
}

#[test]
fn triangle_exact_recovery() {
    let truth = Network::new(3, 0, [(0, 1, 1.0), (0, 2, 0.5), (1, 2, 0.8)]).unwrap();
    let r = resistance_matrix(&truth).unwrap();
    let k = kirchhoff_index(&truth).unwrap();
    let ms =
        MeasurementSet::new(3, 0, [0, 1, 2], [(0, 1, r[(0, 1)]), (0, 2, r[(0, 2)]), (1, 2, r[(1, 2)])], k, 0.25, 2.0)
            .unwrap();
    let res = reconstruct(&ms, &PipelineConfig::default()).unwrap();
    let net = res.network().unwrap();
    let got = resistance_matrix(&net).unwrap();
    for (&(i, j), &d) in ms.distances() {
        assert!((got[(i, j)] - d).abs() <= 1e-6 * d, "r({i},{j}) = {} vs {d}", got[(i, j)]);
    }
    assert_eq!(net.pairs(), truth.pairs());
    for (a, b) in net.conductances().iter().zip(truth.conductances()) {
        assert!((a - b).abs() <= 1e-5, "{a} vs {b}");
    }
}

#[test]
fn stop_after_limits_stages() {
    let ms = example();
    let cfg = PipelineConfig { stop_after: Stage::Interiors, ..PipelineConfig::default() };
    let res = reconstruct(&ms, &cfg).unwrap();
    assert!(res.stage1.is_some() && res.stage2.is_some());
    assert!(res.candidates.is_none() && res.stage4.is_none() && res.network().is_none());
    let cfg = PipelineConfig { stop_after: Stage::Estimate, ..PipelineConfig::default() };
    let res = reconstruct(&ms, &cfg).unwrap();
    assert!(res.stage1.is_none());
    assert_eq!(res.report.timings.len(), 1);
}
