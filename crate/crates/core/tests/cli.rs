use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn params() -> Value {
    json!({"g1": 1e6, "g2": 1e6, "delta": 1e8, "eta1": 0.1, "eta2": 0.002, "nu": 1e6})
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Run { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, v: &Value) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
        p
    }

    fn exec(&self, cmd: &str, config: &Path, out: Option<&Path>, extra: &[&str]) -> Output {
        let mut c = Command::new(env!("CARGO_BIN_EXE_ionsel"));
        c.arg(cmd).arg("--config").arg(config);
        if let Some(o) = out {
            c.arg("--out").arg(o);
        }
        c.args(extra).env_remove("IONSEL_THREADS").output().unwrap()
    }

    /// Runs `cmd` on `cfg` and returns stdout as JSON.
    fn json(&self, cmd: &str, cfg: &Value) -> Value {
        let config = self.config(&format!("{cmd}.json"), cfg);
        let out = self.exec(cmd, &config, None, &[]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    }

    fn code(&self, cmd: &str, cfg: &Value) -> i32 {
        let config = self.config(&format!("{cmd}-bad.json"), cfg);
        self.exec(cmd, &config, None, &[]).status.code().unwrap()
    }
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn rabi_config(points: usize) -> Value {
    json!({
        "params": params(),
        "cutoff": 10,
        "selector": {"kind": "AJC", "n0": 0},
        "times": {"stop": 2.0, "points": points, "unit": "pi"}
    })
}

#[test]
fn rabi_trace_peaks_at_pi_time() {
    let run = Run::new();
    let config = run.config("rabi.json", &rabi_config(201));
    let out = run.path("trace.csv");
    assert!(run.exec("rabi", &config, Some(&out), &[]).status.success());
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["t", "P(g,0)", "P(e,1)"]);
    let rows: Vec<Vec<f64>> =
        reader.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 201);
    let peak = rows.iter().max_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
    // Derived π-time π / (2 Ω_eff) with Ω_eff = 40 s⁻¹, grid step 0.01 π-times.
    let t_pi = std::f64::consts::PI / 80.0;
    assert!((peak[0] - t_pi).abs() <= 0.01 * t_pi, "{}", peak[0]);
    assert!((peak[2] - 1.0).abs() < 1e-12);

    let side: Value = serde_json::from_slice(&std::fs::read(run.path("trace.csv.provenance.json")).unwrap()).unwrap();
    assert_eq!(side["provenance"]["command"], "rabi");
    assert_eq!(side["provenance"]["config"]["cutoff"], 10);
}

#[test]
fn reruns_are_byte_identical() {
    let run = Run::new();
    let measure = json!({
        "params": params(), "cutoff": 12, "n0": 0,
        "motional": {"kind": "coherent", "re": 1.0}, "shots": 500
    });
    for (cmd, cfg) in [("rabi", rabi_config(50)), ("measure", measure)] {
        let config = run.config(&format!("{cmd}.json"), &cfg);
        let a = run.exec(cmd, &config, None, &["--seed", "5"]);
        let b = run.exec(cmd, &config, None, &["--seed", "5"]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let run = Run::new();
    let cfg = json!({
        "params": params(), "cutoff": 12, "n0": 0,
        "motional": {"kind": "coherent", "re": 1.0}, "shots": 200, "seed": 1
    });
    let from_config = run.json("measure", &cfg);
    assert_eq!(from_config["provenance"]["seed"], 1);
    assert_eq!(from_config["result"]["record"]["seed"], 1);
    let config = run.config("m.json", &cfg);
    let out = run.exec("measure", &config, None, &["--seed", "9"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["provenance"]["seed"], 9);
}

#[test]
fn cool_herald_matches_thermal_weight() {
    let run = Run::new();
    let v = run.json(
        "cool",
        &json!({"params": params(), "cutoff": 30, "motional": {"kind": "thermal", "nbar": 0.5}}),
    );
    assert!((num(&v["result"]["herald_probability"]) - 2.0 / 9.0).abs() < 1e-3);
    assert!(num(&v["result"]["ground_fidelity"]) > 0.999);
    assert_eq!(v["provenance"]["mode"], "ideal");
    assert_eq!(v["provenance"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn fock_generation_reports_target_fidelity() {
    let run = Run::new();
    let v = run.json(
        "fock",
        &json!({"params": params(), "cutoff": 20, "n0": 2, "motional": {"kind": "coherent", "re": 1.0}}),
    );
    assert!((num(&v["result"]["herald_probability"]) - (-1.0f64).exp() / 2.0).abs() < 1e-6);
    assert!((num(&v["result"]["target_fidelity"]) - 1.0).abs() < 1e-12);
    assert_eq!(v["result"]["herald_level"], "e");
}

#[test]
fn measure_exact_and_refined() {
    let run = Run::new();
    let v = run.json(
        "measure",
        &json!({
            "params": params(), "cutoff": 20, "n0": 0,
            "motional": {"kind": "coherent", "re": 1.0}, "rounds": 2
        }),
    );
    assert!((num(&v["result"]["estimate"]) - (-1.0f64).exp()).abs() < 1e-6);
    assert_eq!(v["result"]["refined_estimates"].as_array().unwrap().len(), 3);
}

#[test]
fn wigner_vacuum_origin() {
    let run = Run::new();
    let cfg = json!({
        "params": params(), "cutoff": 15, "motional": {"kind": "fock", "n": 0},
        "grid": {"points": [[0.0, 0.0], [1.0, 0.0]]}
    });
    let config = run.config("w.json", &cfg);
    let out = run.path("w.csv");
    assert!(run.exec("wigner", &config, Some(&out), &[]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im,W"));
    let origin: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((origin[2] - 2.0).abs() < 1e-10);
    let one: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((one[2] - 2.0 * (-2.0f64).exp()).abs() < 1e-10);
}

#[test]
fn cpg_uniform_signs() {
    let run = Run::new();
    let v = run.json("cpg", &json!({"params": params(), "cutoff": 4}));
    assert_eq!(v["result"]["signs"], json!(["+", "+", "+", "-"]));
    assert!((num(&v["result"]["fidelity"]) - 1.0).abs() < 1e-10);
    assert!((num(&v["result"]["process_fidelity"]) - 1.0).abs() < 1e-10);
}

#[test]
fn design_reports_feasibility() {
    let run = Run::new();
    let v = run.json("design", &json!({"params": params()}));
    assert!((num(&v["result"]["feasibility"]["selectivity"]) - 20.0).abs() < 1e-9);
}

#[test]
fn floats_carry_seventeen_digits() {
    let run = Run::new();
    let v = run.config("c.json", &json!({"params": params(), "cutoff": 30, "motional": {"kind": "thermal", "nbar": 0.5}}));
    let out = run.exec("cool", &v, None, &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("herald_probability")).unwrap();
    let mantissa = line.split(':').nth(1).unwrap().trim().trim_end_matches(',').split('e').next().unwrap().to_string();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{line}");
}

#[test]
fn config_errors_exit_2() {
    let run = Run::new();
    assert_eq!(run.code("rabi", &rabi_config(0)), 2);
    let mut unknown = rabi_config(10);
    unknown["colour"] = json!("red");
    assert_eq!(run.code("rabi", &unknown), 2);
    assert_eq!(run.code("cool", &json!({"params": params()})), 2);
    let missing = Command::new(env!("CARGO_BIN_EXE_ionsel"))
        .args(["cool", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unknown_key_is_named() {
    let run = Run::new();
    let mut cfg = rabi_config(10);
    cfg["colour"] = json!("red");
    let config = run.config("k.json", &cfg);
    let out = run.exec("rabi", &config, None, &[]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn physics_errors_exit_3() {
    let run = Run::new();
    // |0> has no population in |2>, so the herald never fires.
    let cfg = json!({"params": params(), "cutoff": 10, "n0": 2, "motional": {"kind": "fock", "n": 0}});
    assert_eq!(run.code("fock", &cfg), 3);
    assert_eq!(run.code("cpg", &json!({"params": params(), "cutoff": 2})), 3);
}

#[test]
fn numerical_errors_exit_4() {
    let run = Run::new();
    // A coherent state far beyond the cutoff cannot be represented.
    let cfg = json!({"params": params(), "cutoff": 5, "motional": {"kind": "coherent", "re": 4.0}});
    assert_eq!(run.code("cool", &cfg), 4);
}

#[test]
fn unwritable_output_exits_1() {
    let run = Run::new();
    let config = run.config("c.json", &json!({"params": params(), "cutoff": 4}));
    let out = run.exec("cpg", &config, Some(Path::new("/nonexistent/dir/out.json")), &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thread_variable_is_validated() {
    let run = Run::new();
    let config = run.config("c.json", &json!({"params": params(), "cutoff": 4}));
    let bin = env!("CARGO_BIN_EXE_ionsel");
    let bad = Command::new(bin).args(["cpg", "--config"]).arg(&config).env("IONSEL_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let ok = Command::new(bin).args(["cpg", "--config"]).arg(&config).env("IONSEL_THREADS", "1").output().unwrap();
    assert!(ok.status.success());
}
