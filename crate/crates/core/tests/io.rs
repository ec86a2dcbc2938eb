mod common;

use rdnet_core::interiors::{build_hat, place};
use rdnet_core::io::{self, *};
use rdnet_core::pipeline::{reconstruct, PipelineConfig};
use rdnet_core::planarity::{embed_or_split, Graph};
use rdnet_core::{Error, MeasurementSet};
use serde::{de::DeserializeOwned, Serialize};

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(x: &T) {
    let text = io::to_json(x).unwrap();
    let back: T = io::parse(&text).unwrap();
    assert_eq!(&back, x);
}

fn example() -> MeasurementSet {
    MeasurementSet::new(4, 2, [0, 2, 3], [(0, 2, 1.4984), (0, 3, 1.351), (2, 3, 1.0795)], 19.8, 0.25, 2.0).unwrap()
}

const EXAMPLE_JSON: &str = r#"{
  "n_b": 4, "n_i": 2, "available": [1, 3, 4],
  "distances": [[1, 3, 1.4984], [1, 4, 1.351], [3, 4, 1.0795]],
  "kirchhoff_index": 19.8, "gamma_min": 0.25, "gamma_max": 2.0
}"#;

#[test]
fn measurements_are_one_based() {
    let ms = parse_measurements(EXAMPLE_JSON).unwrap();
    assert_eq!(ms, example());
    let j = MeasurementsJson::from(&ms);
    assert_eq!(j.available, vec![1, 3, 4]);
    round_trip(&j);
    assert_eq!(j.to_measurements().unwrap(), ms);
}

#[test]
fn malformed_inputs_are_parse_errors() {
    for bad in ["", "{", "[1,2]", r#"{"n_b": 4}"#, &EXAMPLE_JSON.replace("19.8", "\"x\"")] {
        assert!(matches!(parse_measurements(bad), Err(Error::Parse(_))), "{bad}");
    }
    let zero = EXAMPLE_JSON.replace("[1, 3, 4]", "[0, 3, 4]");
    assert!(matches!(parse_measurements(&zero), Err(Error::Parse(_))));
    let missing = EXAMPLE_JSON.replace("[3, 4, 1.0795]", "[3, 2, 1.0795]");
    assert!(matches!(parse_measurements(&missing), Err(Error::InvalidMeasurements(_))));
}

#[test]
fn networks_round_trip_exactly() {
    let mut rng = common::rng(11);
    for _ in 0..30 {
        let net = common::random_cppr(&mut rng, 5, 2, 0.7, (0.1, 3.0));
        let j = NetworkJson::from(&net);
        round_trip(&j);
        let back = parse_network(&io::to_json(&j).unwrap()).unwrap();
        assert_eq!(back, net);
    }
}

#[test]
fn non_finite_floats_survive() {
    let e = EstimateJson {
        r: vec![vec![0.0]],
        x: vec![vec![1.0 / 3.0]],
        residual: 0.1,
        iterations: 2,
        min_constraint: f64::INFINITY,
    };
    let text = io::to_json(&e).unwrap();
    assert!(text.contains("\"Infinity\""));
    round_trip(&e);
}

#[test]
fn structural_artifacts_round_trip() {
    let mut rng = common::rng(5);
    let net = common::random_cppr(&mut rng, 5, 0, 0.8, (0.1, 0.5));
    let p = place(&net.pairs(), &net.conductances(), 5, 2, 4.0);
    let pj = PlacementJson::from(&p);
    round_trip(&pj);
    assert_eq!(pj.to_placement().unwrap(), p);
    let hat = build_hat(&net, &p);
    let hj = HatJson::from(&hat);
    round_trip(&hj);
    assert_eq!(hj.to_hat().unwrap(), hat);
    let g = Graph::new(hat.node_count(), hat.edges());
    let c = embed_or_split(&g, &hat.protected(), 8).unwrap();
    let cj = CandidatesJson::from(&c);
    round_trip(&cj);
    assert_eq!(cj.to_candidates().unwrap(), c);
}

#[test]
fn pipeline_result_round_trips() {
    let cfg = PipelineConfig::default();
    let res = reconstruct(&example(), &cfg).unwrap();
    let j = ResultJson::new(&res, &cfg);
    round_trip(&j);
    assert_eq!(j.estimate.as_ref().unwrap().to_estimate().unwrap(), res.estimate);
    assert_eq!(j.network.as_ref().unwrap().to_network().unwrap(), res.network().unwrap());
    assert!(j.stage1.is_some() && j.interiors.is_some() && j.candidates.is_some() && j.rewire.is_some());
}

#[test]
fn dot_output_is_well_formed() {
    let mut rng = common::rng(3);
    let net = common::random_cppr(&mut rng, 4, 1, 1.0, (0.5, 2.0));
    let dot = network_dot(&net, "g");
    assert!(dot.starts_with("graph g {\n") && dot.ends_with("}\n"));
    assert_eq!(dot.matches(" -- ").count(), net.edge_count());
    assert!(dot.contains("1 [shape=doublecircle]"));
    assert!(dot.contains("5 [shape=circle]"));
}
