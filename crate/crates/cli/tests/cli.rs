use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rdnet_core::io::{self, ResultJson};
use rdnet_core::netcore::{kirchhoff_index, resistance_matrix};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn rdnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdnet")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = rdnet(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rsn_enum_lists_component_a() {
    let out = ok(&["rsn-enum", "--rmax", "4"]);
    let values: Vec<&str> = out.lines().skip(2).take(8).map(|l| l.split_whitespace().nth(1).unwrap()).collect();
    let mut got = values.clone();
    got.sort();
    let mut want = vec!["inf", "1", "2", "2/3", "3", "3/4", "5/3", "5/8"];
    want.sort();
    assert_eq!(got, want);
    assert!(out.contains("range [0.7250, 4.0000]"));
}

#[test]
fn gradcheck_passes() {
    let out = ok(&["gradcheck", "--n", "6", "--samples", "50"]);
    assert!(out.trim_end().ends_with("PASS"), "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn malformed_json_exits_2() {
    let o = rdnet(&["reconstruct", "--measurements", path(&fixture("malformed.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");
}

#[test]
fn missing_file_is_an_error() {
    let o = rdnet(&["estimate", "--measurements", "/nonexistent/m.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn triangle_is_recovered_exactly() {
    let ms = io::parse_measurements(&std::fs::read_to_string(fixture("triangle.json")).unwrap()).unwrap();
    let res: ResultJson = io::parse(&ok(&["reconstruct", "-m", path(&fixture("triangle.json"))])).unwrap();
    let net = res.network.unwrap().to_network().unwrap();
    let r = resistance_matrix(&net).unwrap();
    for (&(i, j), &d) in ms.distances() {
        assert!((r[(i, j)] - d).abs() <= 1e-6 * d);
    }
    let want = [(0, 1, 1.0), (0, 2, 0.5), (1, 2, 0.8)];
    assert_eq!(net.edge_count(), 3);
    for (e, w) in net.edges().iter().zip(want) {
        assert_eq!((e.u, e.v), (w.0, w.1));
        assert!((e.conductance - w.2).abs() <= 1e-5);
    }
}

#[test]
fn example_reconstruction_and_stage_chain() {
    let dir = std::env::temp_dir().join(format!("rdnet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let m = fixture("example.json");
    let m = path(&m);
    let full: ResultJson = io::parse(&ok(&["reconstruct", "-m", m, "--seed", "3"])).unwrap();
    let net = full.network.clone().unwrap().to_network().unwrap();
    let r = resistance_matrix(&net).unwrap();
    for (i, j, d) in [(0, 2, 1.4984), (0, 3, 1.351), (2, 3, 1.0795)] {
        assert!((r[(i, j)] - d).abs() / d <= 0.05);
    }
    assert!((kirchhoff_index(&net).unwrap() - 19.8).abs() / 19.8 <= 0.05);

    let s1 = dir.join("s1.json");
    let s2 = dir.join("s2.json");
    let s3 = dir.join("s3.json");
    ok(&["stage1", "-m", m, "--seed", "3", "-o", path(&s1)]);
    ok(&["place-interiors", "-m", m, "--seed", "3", "--input", path(&s1), "-o", path(&s2)]);
    ok(&["planarize", "-m", m, "--seed", "3", "--input", path(&s2), "-o", path(&s3)]);
    let last: ResultJson = io::parse(&ok(&["rewire", "-m", m, "--seed", "3", "--input", path(&s3)])).unwrap();
    assert_eq!(last.network, full.network);
    assert_eq!(last.stage1, full.stage1);
    assert_eq!(last.interiors, full.interiors);
    assert_eq!(last.candidates, full.candidates);

    let stage1: ResultJson = io::parse(&std::fs::read_to_string(&s1).unwrap()).unwrap();
    assert!(stage1.stage1.is_some() && stage1.interiors.is_none() && stage1.network.is_none());
    let aux = dir.join("aux.json");
    std::fs::write(&aux, io::to_json(&stage1.stage1.unwrap().aux).unwrap()).unwrap();
    let dot = ok(&["plot", path(&aux)]);
    assert!(dot.starts_with("graph network {") && dot.trim_end().ends_with('}'));
    assert_eq!(dot.matches('{').count(), dot.matches('}').count());
    assert!(dot.contains(" -- "));
    let dot = ok(&["plot", path(&s3), "--artifact", "candidates"]);
    assert!(dot.starts_with("graph candidate1 {"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn estimate_keeps_measured_entries() {
    let res: ResultJson = io::parse(&ok(&["estimate", "-m", path(&fixture("example.json"))])).unwrap();
    let e = res.estimate.unwrap();
    assert_eq!(e.r.len(), 6);
    for (i, j, d) in [(0, 2, 1.4984), (0, 3, 1.351), (2, 3, 1.0795)] {
        assert!((e.r[i][j] - d).abs() <= 1e-4, "{} vs {d}", e.r[i][j]);
    }
    assert!(res.stage1.is_none());
}

#[test]
fn plot_base_graph() {
    let dot = ok(&["plot", "--base", "4"]);
    assert_eq!(dot.matches(" -- ").count(), 6);
    let dot = ok(&["plot", "--base", "4", "--expanded"]);
    assert_eq!(dot.matches("style=dashed").count(), 78);
}

#[test]
fn dot_format_draws_final_network() {
    let dot = ok(&["reconstruct", "-m", path(&fixture("triangle.json")), "--format", "dot"]);
    assert!(dot.starts_with("graph network {"));
    assert_eq!(dot.matches(" -- ").count(), 3);
}
