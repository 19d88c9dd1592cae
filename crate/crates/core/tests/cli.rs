use std::fs;
use std::process::{Command, Output};

fn licurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_licurv")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or_default().to_owned()
}

#[test]
fn csv_headers() {
    let cases: [(&[&str], &str); 7] = [
        (&["heat", "--graph", "path:3", "--tgrid", "0.5,1"], "t,vertex,u"),
        (&["liyau", "--tgrid", "log:0.1:1:3"], "inequality,vertex,t,lhs,rhs,slack"),
        (&["liyau-local", "--tgrid", "log:0.1:1:3", "--R", "1"], "inequality,vertex,t,lhs,rhs,slack"),
        (&["hamilton", "--tgrid", "log:0.1:1:3"], "inequality,vertex,t,lhs,rhs,slack"),
        (
            &["harnack", "--measure", "degree", "--x", "0", "--y", "1", "--T1", "1", "--T2", "2"],
            "form,x,y,T1,T2,rho,lhs,rhs,slack",
        ),
        (&["kernel", "--graph", "torus:2:7", "--measure", "degree", "--tgrid", "2,4"], "form,x,y,t,p,ratio"),
        (
            &["curvature", "--graph", "path:3", "--restarts", "2", "--samples", "16"],
            "vertex,n,K_star,converged,restarts_used",
        ),
    ];
    for (args, want) in cases {
        let o = licurv(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(header(&o), want, "{args:?}");
    }
}

#[test]
fn heat_csv_values_parse_back_exactly() {
    let o = licurv(&["heat", "--graph", "path:2", "--tgrid", "1"]);
    let rows: Vec<Vec<String>> =
        stdout(&o).lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect();
    assert_eq!(rows.len(), 2);
    let u0: f64 = rows[0][2].parse().unwrap();
    assert_eq!(u0, 0.5 * (1.0 + 1e-6) + 0.5 * (1.0 - 1e-6) * (-2.0f64).exp());
}

#[test]
fn rho_defaults_to_json() {
    let o =
        licurv(&["rho", "--graph", "path:4", "--x", "0", "--y", "2", "--T1", "1", "--T2", "2", "--alpha", "const:1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k_star"], 2);
    assert_eq!(v["rho"], 8.0);
}

#[test]
fn json_output_round_trips() {
    let o = licurv(&[
        "curvature",
        "--graph",
        "path:3",
        "--n",
        "inf",
        "--restarts",
        "2",
        "--samples",
        "16",
        "--format",
        "json",
    ]);
    let report: licurv::curvature::CurvatureReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report.n.is_infinite());
    assert_eq!(report.vertices.len(), 3);
    let o = licurv(&["gen", "--graph", "random:8:0.4:3", "--weights", "random:1"]);
    let g = licurv::graph::WeightedGraph::from_json(&stdout(&o)).unwrap();
    assert_eq!(g.vertex_count(), 8);
}

#[test]
fn exit_codes() {
    assert_eq!(licurv(&[]).status.code(), Some(2));
    assert_eq!(licurv(&["nope"]).status.code(), Some(2));
    assert_eq!(licurv(&["heat", "--graph", "banana:3"]).status.code(), Some(2));
    assert_eq!(licurv(&["heat", "--tgrid", "log:1:0.5:3"]).status.code(), Some(2));
    assert_eq!(licurv(&["rho", "--x", "0"]).status.code(), Some(2));
    assert_eq!(licurv(&["--help"]).status.code(), Some(0));
    let held = ["curvature", "--graph", "path:3", "--restarts", "4", "--samples", "32"];
    assert_eq!(licurv(&[&held[..], &["--K", "0"]].concat()).status.code(), Some(0));
    assert_eq!(licurv(&[&held[..], &["--K", "10"]].concat()).status.code(), Some(1));
    // A threshold above every slack turns a passing check into a violation.
    assert_eq!(licurv(&["liyau", "--tgrid", "log:0.1:1:3", "--threshold", "1e9"]).status.code(), Some(1));
}

#[test]
fn output_file_and_format_inference() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let json = dir.path().join("h.json");
    licurv(&["heat", "--graph", "path:2", "--tgrid", "1", "--out", csv.to_str().unwrap()]);
    licurv(&["heat", "--graph", "path:2", "--tgrid", "1", "--out", json.to_str().unwrap()]);
    assert!(fs::read_to_string(&csv).unwrap().starts_with("t,vertex,u\n"));
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
}

#[test]
fn saved_config_replays_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("a.csv");
    let first = licurv(&[
        "--save-config",
        cfg.to_str().unwrap(),
        "liyau",
        "--graph",
        "random:10:0.4:2",
        "--weights",
        "random:5",
        "--measure",
        "degree",
        "--u0",
        "random",
        "--seed",
        "9",
        "--tgrid",
        "log:0.1:3:6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(first.status.code(), Some(0));
    let a = fs::read(&out).unwrap();
    fs::remove_file(&out).unwrap();
    let replay = Command::new(env!("CARGO_BIN_EXE_licurv"))
        .args(["--config", cfg.to_str().unwrap()])
        .env("LICURV_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(replay.status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap(), a);
}

#[test]
fn selftest_single_criterion() {
    let o = licurv(&["selftest", "--criterion", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("criterion  1 PASS"));
    assert_eq!(licurv(&["selftest", "--criterion", "11"]).status.code(), Some(2));
}
