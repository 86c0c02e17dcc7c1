use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn odeco(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_odeco")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_config(dir: &Path, name: &str, n: usize, top: f64) {
    let cfg = serde_json::json!({
        "mesh": {"generate": {"kind": "unit_square", "n": n}},
        "constraints": {"sizes": {
            "bottom": 1.0,
            "top": top,
            "right": {"start": 1.0, "end": top},
            "left": {"start": top, "end": 1.0},
        }},
        "output": format!("{name}-out"),
    });
    fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Parses an SVG file and returns how many filled polygons it has.
fn check_svg(path: &Path) -> usize {
    let text = fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    doc.descendants().filter(|n| n.has_tag_name("polygon")).count()
}

/// Section sizes of a legacy VTK file must match their headers.
fn check_vtk(path: &Path, nodes: usize, triangles: usize) {
    let text = fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# vtk DataFile Version 3.0");
    let find = |head: &str| lines.iter().position(|l| l.starts_with(head)).unwrap_or_else(|| panic!("no {head}"));
    let p = find("POINTS");
    assert_eq!(lines[p], format!("POINTS {nodes} double"));
    let c = find("CELLS");
    assert_eq!(lines[c], format!("CELLS {triangles} {}", 4 * triangles));
    assert_eq!(c, p + nodes + 1);
    for l in &lines[c + 1..c + 1 + triangles] {
        let ids: Vec<usize> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(ids.len(), 4);
        assert!(ids[1..].iter().all(|&i| i < nodes));
    }
    assert_eq!(lines[find("POINT_DATA")], format!("POINT_DATA {nodes}"));
    for (k, l) in lines.iter().enumerate() {
        let count = if l.starts_with("SCALARS") {
            assert_eq!(lines[k + 1], "LOOKUP_TABLE default");
            Some((k + 2, 1))
        } else if l.starts_with("VECTORS") {
            Some((k + 1, 3))
        } else {
            None
        };
        if let Some((start, width)) = count {
            for row in &lines[start..start + nodes] {
                let vals: Vec<f64> = row.split_whitespace().map(|t| t.parse().unwrap()).collect();
                assert_eq!(vals.len(), width, "{l}");
                assert!(vals.iter().all(|v| v.is_finite()));
            }
        }
    }
}

#[test]
fn solve_parametrize_export_on_graded_square() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "graded", 10, 2.0);
    ok(odeco(tmp.path(), &["solve", "--config", "graded.json"]));
    let out = tmp.path().join("graded-out");
    let report = read_json(&out.join("solve_report.json"));
    assert!(report["failure"].is_null());
    assert!(report["stages"].as_array().unwrap().len() >= 2);

    ok(odeco(tmp.path(), &["parametrize", "--config", "graded.json"]));
    let param = read_json(&out.join("param.json"));
    assert!(param["checks"]["seam_residual"].as_f64().unwrap() < 1e-8);
    let field = read_json(&out.join("field.json"));
    let nodes = field["q"].as_array().unwrap().len();
    let triangles = field["mesh"]["triangles"].as_array().unwrap().len();
    assert_eq!(nodes, 121);

    check_svg(&out.join("frames.svg"));
    let filled = check_svg(&out.join("isolines.svg"));
    assert_eq!(filled, param["singularities"].as_array().unwrap().len());
    check_vtk(&out.join("field.vtk"), nodes, triangles);
    assert!(fs::read_to_string(out.join("field.vtk")).unwrap().contains("VECTORS uv double"));

    // export alone regenerates the same files
    let before = fs::read(out.join("isolines.svg")).unwrap();
    fs::remove_file(out.join("isolines.svg")).unwrap();
    ok(odeco(tmp.path(), &["export", "--config", "graded.json"]));
    assert_eq!(fs::read(out.join("isolines.svg")).unwrap(), before);
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "det", 8, 2.0);
    let mut runs = Vec::new();
    for out in ["a", "b"] {
        ok(odeco(tmp.path(), &["solve", "--config", "det.json", "--out", out, "--threads", "2"]));
        ok(odeco(tmp.path(), &["parametrize", "--config", "det.json", "--out", out]));
        runs.push(tmp.path().join(out));
    }
    for name in ["field.json", "solve_report.json", "param.json", "frames.svg", "isolines.svg", "field.vtk"] {
        let a = fs::read(runs[0].join(name)).unwrap();
        let b = fs::read(runs[1].join(name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
}

#[test]
fn unknown_tag_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = r#"{"mesh": {"generate": {"kind": "unit_square", "n": 4}}, "constraints": {"sizes": {"bottm": 1.0}}}"#;
    fs::write(tmp.path().join("bad.json"), cfg).unwrap();
    let out = odeco(tmp.path(), &["solve", "--config", "bad.json"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("config") && err.contains("bottm"), "{err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.json"), r#"{"kappas": [1.0]}"#).unwrap();
    let out = odeco(tmp.path(), &["solve", "--config", "bad.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappas"));
}

#[test]
fn uniform_square_compares_as_equal() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "flat", 6, 1.0);
    let stdout = ok(odeco(tmp.path(), &["compare", "--config", "flat.json"]));
    assert!(stdout.contains("both negligible"), "{stdout}");
    let report = read_json(&tmp.path().join("flat-out/compare.json"));
    let case = &report["cases"][0]["comparison"];
    assert_eq!(case["ratio"].as_f64(), Some(1.0));
    assert_eq!(case["both_negligible"].as_bool(), Some(true));
    assert_eq!(report["geometric_mean_ratio"].as_f64(), Some(1.0));
}

#[test]
fn verify_passes_and_writes_tables() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(odeco(tmp.path(), &["verify", "--out", "v"]));
    assert!(!stdout.contains("FAIL"), "{stdout}");
    let csv = fs::read_to_string(tmp.path().join("v/convergence.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("index,h,e_lie,max_h"));
    assert_eq!(csv.lines().count(), 7);
    let report = read_json(&tmp.path().join("v/verify.json"));
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == Value::Bool(true)));
}
