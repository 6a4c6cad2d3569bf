use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SLIT_SQUARE: &str = r#"domain = { rectangle = [0, 0, 1, 1], boundary = ["neumann", "dirichlet", "neumann", "dirichlet"] }
"#;

fn fraclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclab")).args(args).output().expect("spawn fraclab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn solve_config(crack: &str, p: f64, extra: &str) -> String {
    format!(
        "{SLIT_SQUARE}{crack}density = {{ p = {p}, family = \"isotropic\" }}\n[solve]\ndatum = \"x\"\nresolution = 16\n{extra}"
    )
}

const SLIT: &str = "crack = { polylines = [[[0.5, 0.0], [0.5, 0.5]]] }\n";

fn stability_config(indices: &str) -> String {
    format!(
        r#"{SLIT_SQUARE}density = {{ p = 2.0, family = "isotropic" }}
[sequence]
kind = "grow_to_limit"
limit = {{ polylines = [[[0.5, 0.0], [0.5, 0.5]]] }}
params = {{ indices = {indices}, min_resolution = 16, cells_per_index = 2 }}
[stability]
datum = "x"
convergence = {{ reference_resolution = 96 }}
"#
    )
}

#[test]
fn minimal_solve_writes_manifest_two_csvs_and_one_svg() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "solve.toml", &solve_config("", 2.0, ""));
    let out = tmp.path().join("out");
    let o = fraclab(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["gradients.csv", "manifest.json", "nodes.csv", "solution.svg"]);
    let m = manifest(&out);
    assert_eq!(m["command"], "solve");
    assert_eq!(m["config"]["solve"]["resolution"], 16);
    // defaults are explicit
    assert!(m["config"]["solve"]["tol"].is_number());
    assert!(m["config"]["solve"]["max_iterations"].is_number());
    assert!(m["results"]["residual"].as_f64().unwrap() < 1e-9);
    assert!(m["timings_ms"].is_object() && m["seed"].is_number());
    let nodes = read(out.join("nodes.csv"));
    assert_eq!(nodes.lines().next(), Some("node_id,x,y,u"));
    assert_eq!(nodes.lines().count(), 1 + 17 * 17);
    // u = x exactly with no crack
    for line in nodes.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((f[3] - f[1]).abs() < 1e-9, "{line}");
    }
    assert!(read(out.join("solution.svg")).starts_with("<svg"));
}

#[test]
fn stability_with_six_indices_gives_six_rows() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "stab.toml", &stability_config("[4, 8, 12, 16, 24, 32]"));
    let out = tmp.path().join("out");
    let o = fraclab(&["stability", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = read(out.join("table.csv"));
    assert_eq!(table.lines().count(), 1 + 6);
    assert!(table.starts_with("h,n_h,d_H,H1,"));
    assert!(out.join("error_decay.svg").exists());
}

#[test]
fn reruns_are_byte_identical_including_from_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "stab.toml", &stability_config("[4, 8, 16]"));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    assert_eq!(code(&fraclab(&["stability", "--config", &cfg, "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&fraclab(&["--threads", "1", "stability", "--config", &cfg, "--out", b.to_str().unwrap()])), 0);
    let from_manifest = a.join("manifest.json");
    assert_eq!(
        code(&fraclab(&["stability", "--config", from_manifest.to_str().unwrap(), "--out", c.to_str().unwrap()])),
        0
    );
    let ta = read(a.join("table.csv"));
    assert_eq!(ta, read(b.join("table.csv")));
    assert_eq!(ta, read(c.join("table.csv")));

    let scfg = write(tmp.path(), "solve.toml", &solve_config(SLIT, 3.0, ""));
    let s1 = tmp.path().join("s1");
    let s2 = tmp.path().join("s2");
    assert_eq!(code(&fraclab(&["solve", "--config", &scfg, "--out", s1.to_str().unwrap()])), 0);
    let m = s1.join("manifest.json");
    assert_eq!(code(&fraclab(&["solve", "--config", m.to_str().unwrap(), "--out", s2.to_str().unwrap()])), 0);
    for f in ["nodes.csv", "gradients.csv"] {
        assert_eq!(read(s1.join(f)), read(s2.join(f)), "{f}");
    }
    // inputs are untouched
    assert_eq!(read(&scfg), solve_config(SLIT, 3.0, ""));
}

#[test]
fn schema_errors_exit_2_with_json_report() {
    let tmp = TempDir::new().unwrap();
    let bad = write(tmp.path(), "bad.toml", &solve_config("", 2.0, "bogus = 1\n"));
    let o = fraclab(&["solve", "--config", &bad, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "schema");
    assert!(!tmp.path().join("o").exists(), "nothing computed before validation");

    let p_low = write(tmp.path(), "p.toml", &solve_config("", 1.0, ""));
    assert_eq!(code(&fraclab(&["solve", "--config", &p_low])), 2);
    let expr = write(tmp.path(), "e.toml", &solve_config("", 2.0, "").replace("\"x\"", "\"x +\""));
    assert_eq!(code(&fraclab(&["solve", "--config", &expr])), 2);
    assert_eq!(code(&fraclab(&["capacity", "--set", "blob:1", "--r", "1.5", "--n", "8"])), 2);
    assert_eq!(code(&fraclab(&["frobnicate"])), 2);
}

#[test]
fn missing_config_exits_4() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.toml");
    let o = fraclab(&["solve", "--config", missing.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "io");
}

#[test]
fn solver_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", &solve_config(SLIT, 4.0, "max_iterations = 1\n"));
    let o = fraclab(&["solve", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "solver");
}

#[test]
fn conjugate_certifies_a_solve_and_rejects_noise() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", &solve_config(SLIT, 3.0, ""));
    let s = tmp.path().join("s");
    assert_eq!(code(&fraclab(&["solve", "--config", &cfg, "--out", s.to_str().unwrap()])), 0);
    let o = fraclab(&["conjugate", "--solution", s.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&read(s.join("conjugate/report.json"))).unwrap();
    assert_eq!(report["verdict"]["pass"], true);
    assert!(!report["components"].as_array().unwrap().is_empty());
    let csv = read(s.join("conjugate/conjugate.csv"));
    assert!(csv.starts_with("edge_id,triangle_id,x,y,v"));
    assert!(csv.lines().count() > 100);
    assert!(s.join("conjugate/conjugate.svg").exists());

    let noisy = tmp.path().join("noisy");
    let o = fraclab(&["conjugate", "--solution", s.to_str().unwrap(), "--noise", "0.05", "--out", noisy.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&read(noisy.join("report.json"))).unwrap();
    assert_eq!(report["verdict"]["pass"], false);

    // a non-solve directory is rejected
    let o = fraclab(&["conjugate", "--solution", noisy.to_str().unwrap(), "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn capacity_prints_value_and_writes_potential() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("cap");
    let o = fraclab(&[
        "capacity", "--set", "segment:-0.5,0,0.5,0", "--r", "2", "--n", "32", "--sides", "64", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&o.stdout).trim()).unwrap();
    let c = v["capacity"].as_f64().unwrap();
    assert!(c > 0.0 && c.is_finite());
    assert_eq!(manifest(&out)["results"]["capacity"].as_f64(), Some(c));
    assert!(out.join("potential.csv").exists() && out.join("potential.svg").exists());
}

#[test]
fn evolve_writes_steps_energies_and_history() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!(
        r#"{SLIT_SQUARE}density = {{ p = 2.0, family = "isotropic" }}
[evolve]
datum = "t*x"
times = {{ start = 0.0, step = 0.5, steps = 4 }}
dictionary = {{ arcs = [ {{ polylines = [[[0.5, 0.0], [0.5, 1.0]]] }} ] }}
options = {{ resolution = 16 }}
"#
    );
    let cfg = write(tmp.path(), "e.toml", &cfg);
    let out = tmp.path().join("ev");
    let o = fraclab(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..5 {
        assert!(out.join(format!("steps/step_{i:03}.json")).exists());
    }
    let energies = read(out.join("energies.csv"));
    assert_eq!(energies.lines().count(), 6);
    let m = manifest(&out);
    assert_eq!(m["results"]["irreversible"], true);
    assert_eq!(m["results"]["first_growth"], 1.5);
    assert!(out.join("history.svg").exists());
}

#[test]
fn selftest_subset_reports_each_criterion() {
    let tmp = TempDir::new().unwrap();
    let o = fraclab(&["selftest", "--only", "1,10", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("[PASS]")).count(), 2);
    let r: Value = serde_json::from_str(&read(tmp.path().join("selftest.json"))).unwrap();
    assert_eq!(r.as_array().unwrap().len(), 2);
    assert_eq!(code(&fraclab(&["selftest", "--only", "11"])), 2);
}
