use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmap"))
        .args(args)
        .env_remove("CMAP_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "status {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn reproduce_example_third_differences() {
    let r = stdout_json(&cmap(&["reproduce-example", "--h", "1e-3"]));
    let left = r["results"]["theta_third_left"].as_f64().unwrap();
    let right = r["results"]["theta_third_right"].as_f64().unwrap();
    assert!((left + 2.0).abs() < 0.05, "{left}");
    assert!(right.abs() < 0.05, "{right}");
}

#[test]
fn reproduce_example_with_solver() {
    let r = stdout_json(&cmap(&["reproduce-example", "--h", "0.0078125", "--solve"]));
    let s = &r["results"]["solver"];
    assert!(s["sup_error"].as_f64().unwrap() < 1e-4);
    assert!((s["theta_third_left"].as_f64().unwrap() + 2.0).abs() < 0.05);
    assert!(s["theta_third_right"].as_f64().unwrap().abs() < 0.05);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "experiment = \"global2d\"\ncolour = 3\n",
    );
    let out = cmap(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "ConfigParse");
    assert!(err["error"]["message"].as_str().unwrap().contains("colour"));

    let nested = write(dir.path(), "nested.toml", "[grid]\nn = 33\nsize = 2\n");
    let out = cmap(&["solve-obstacle", "--config", &nested]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        (
            "scales.toml",
            "experiment = \"global2d\"\nscales = [0.5, 0.3]\n",
        ),
        (
            "tol.toml",
            "experiment = \"global2d\"\n[tolerances]\nsolver = 0.0\n",
        ),
        (
            "file.toml",
            "experiment = \"global2d\"\n[regularity]\nfield = \"missing.field\"\n",
        ),
        ("mismatch.toml", "experiment = \"potential\"\n"),
    ] {
        let cfg = write(dir.path(), name, text);
        let out = cmap(&["solve-map", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
}

#[test]
fn module_errors_exit_nonzero_with_json() {
    let out = cmap(&["global2d", "--kind", "ellipse", "--params", "a=2"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "InvalidConic");
}

#[test]
fn output_directory_is_created_and_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "obs.toml",
        "output_dir = \"deep/nested/out\"\nscales = [0.5, 0.25]\n[grid]\nn = 33\n",
    );
    let first = stdout_json(&cmap(&["solve-obstacle", "--config", &cfg]));
    let out_dir = dir.path().join("deep/nested/out");
    let report = fs::read(out_dir.join("report.json")).unwrap();
    for f in ["w.field", "min_diam_profile.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    stdout_json(&cmap(&["solve-obstacle", "--config", &cfg]));
    assert_eq!(fs::read(out_dir.join("report.json")).unwrap(), report);

    // The embedded config is the resolved one, defaults included.
    assert_eq!(first["config"]["grid"]["n"], 33);
    assert_eq!(first["config"]["obstacle"]["r0"], 0.25);
    assert_eq!(first["config"]["tolerances"]["tol_g"], 1e-6);
    let r = &first["results"];
    assert!(r["residual"].as_f64().unwrap() <= 1e-8);
    assert!(r["fb_point_count"].as_u64().unwrap() > 0);
    assert_eq!(r["min_diam_profile"].as_array().unwrap().len(), 2);
}

#[test]
fn json_keys_are_sorted() {
    let out = cmap(&[
        "global2d",
        "--kind",
        "parabola",
        "--params",
        "alpha=0.5,beta=0.1",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    // serde_json's default map is ordered, so a round trip sorts every level.
    let parsed: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(text, serde_json::to_string_pretty(&parsed).unwrap() + "\n");
    assert!(text.find("\"case\"").unwrap() < text.find("\"mu\"").unwrap());
}

#[test]
fn obstacle_then_regularity() {
    let dir = tempfile::tempdir().unwrap();
    let obs = write(
        dir.path(),
        "obs.toml",
        "output_dir = \"obs\"\n[grid]\nn = 257\n[obstacle]\nr0 = 0.5\nomega = 1.976\n",
    );
    stdout_json(&cmap(&["solve-obstacle", "--config", &obs]));
    let pts = write(dir.path(), "pts.csv", "x,y\n0.5,0\n0.9,0.9\n");
    let reg = write(
        dir.path(),
        "reg.toml",
        "output_dir = \"reg\"\nscales = [0.16, 0.08, 0.04, 0.02]\n",
    );
    let field = dir.path().join("obs/w.field");
    let r = stdout_json(&cmap(&[
        "regularity",
        "--field",
        field.to_str().unwrap(),
        "--points",
        &pts,
        "--config",
        &reg,
    ]));
    let rows = r["results"]["points"].as_array().unwrap();
    assert_eq!(rows[0]["classification"], "regular");
    let e = rows[0]["exponent"].as_f64().unwrap();
    assert!((e - 2.0).abs() < 0.15, "{e}");
    assert!(rows[0]["max_lambda"].as_f64().unwrap().is_finite());
    assert_eq!(rows[1]["error"], "NotFreeBoundaryPoint");
    let csv = fs::read_to_string(dir.path().join("reg/regularity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().contains(",regular,"));
}

#[test]
fn solve_map_writes_fields_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "map.toml",
        "output_dir = \"map\"\n[grid]\nn = 33\n[map]\nangle = 0.3\n",
    );
    let r = stdout_json(&cmap(&["solve-map", "--config", &cfg]));
    let res = &r["results"];
    for key in ["energy", "el_residual", "contact_fraction"] {
        assert!(res[key].as_f64().unwrap().is_finite(), "{key}");
    }
    assert!(res["min_contact_g"].as_f64().unwrap() > 0.0);
    for f in ["u0.field", "u1.field", "V0.field", "V1.field", "w.field"] {
        assert!(dir.path().join("map").join(f).exists(), "{f}");
    }
}

#[test]
fn global2d_verify_report() {
    let r = stdout_json(&cmap(&[
        "global2d",
        "--kind",
        "ellipse",
        "--params",
        "a=0.5,alpha=0.3,beta=0.2,rotation=0.4",
        "--verify",
    ]));
    let res = &r["results"];
    assert!(res["max_schwarz_residual"].as_f64().unwrap() <= 1e-10);
    assert!(res["max_Up_ratio"].as_f64().unwrap().is_finite());
    assert!(res["delta"].as_f64().unwrap() > 0.0);
    assert!(res["mu"].as_f64().unwrap() > 0.0);
    assert_ne!(res["inside_case"], "none");
}

#[test]
fn potential_bound_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pot");
    let r = stdout_json(&cmap(&[
        "potential",
        "--check-bound",
        "--modulus",
        "power",
        "--delta",
        "0.1",
        "--cells",
        "160",
        "--out",
        out.to_str().unwrap(),
    ]));
    let res = &r["results"];
    assert!(res["max_ratio"].as_f64().unwrap().is_finite());
    assert!(res["phi_origin"].as_f64().unwrap().abs() <= 1e-6);
    assert!(!res["per_r_profile"].as_array().unwrap().is_empty());
    assert!(out.join("per_r_profile.csv").exists());
}

#[test]
fn help_documents_flags() {
    let out = cmap(&["potential", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in ["--check-bound", "--modulus", "--delta"] {
        assert!(text.contains(flag), "{flag}");
    }
    let top = String::from_utf8(cmap(&["--help"]).stdout).unwrap();
    assert!(top.contains("CMAP_THREADS"));
    assert_eq!(cmap(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    let bad = Command::new(env!("CARGO_BIN_EXE_cmap"))
        .args(["global2d", "--kind", "line"])
        .env("CMAP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let good = Command::new(env!("CARGO_BIN_EXE_cmap"))
        .args(["global2d", "--kind", "line"])
        .env("CMAP_THREADS", "1")
        .output()
        .unwrap();
    assert!(good.status.success());
}
