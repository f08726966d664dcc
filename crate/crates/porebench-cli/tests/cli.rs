//! End-to-end runs of the porebench binary: exit codes, JSON shapes,
//! determinism, and the error channel.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use porebench::field::ScalarField;
use porebench::geometry::{write_raster, PoreImage};
use serde_json::Value;
use tempfile::TempDir;

fn porebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_porebench"))
        .args(args)
        .env_remove("POREBENCH_THREADS")
        .output()
        .expect("binary runs")
}

fn porebench_ok(args: &[&str]) -> Value {
    let out = porebench(args);
    assert!(
        out.status.success(),
        "expected success, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Asserts the failure contract: status 1 and a one-line JSON error on
/// stderr. Returns the error object's kind.
fn porebench_err(args: &[&str]) -> String {
    let out = porebench(args);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert!(doc["error"]["message"].is_string());
    doc["error"]["kind"].as_str().expect("kind present").into()
}

fn write_spec(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn all_void_raster(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(name);
    let image = PoreImage::filled(10, 10, true).unwrap();
    write_raster(&image, &path).unwrap();
    path
}

#[test]
fn generate_writes_raster_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "spec.json",
        r#"{"kind": {"kind": "square", "half_width": 3.0}, "rng_seed": 11}"#,
    );
    let out_path = dir.path().join("cell.pbm");
    let out = porebench(&[
        "generate",
        "--spec",
        spec.to_str().unwrap(),
        "--width",
        "16",
        "--height",
        "16",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let raster = fs::read(&out_path).unwrap();
    assert!(raster.starts_with(b"P4"));

    let sidecar: Value =
        serde_json::from_slice(&fs::read(dir.path().join("cell.json")).unwrap()).unwrap();
    assert_eq!(sidecar["schema_version"], 1);
    assert_eq!(sidecar["width"], 16);
    assert_eq!(sidecar["height"], 16);
    assert_eq!(sidecar["spec"]["kind"]["kind"], "square");
    assert_eq!(sidecar["spec"]["rng_seed"], 11);
    assert!(sidecar.get("timestamp").is_none());
}

#[test]
fn generate_accepts_kind_flags_directly() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("c.pbm");
    let out = porebench(&[
        "generate",
        "--kind",
        "circle",
        "--radius",
        "5",
        "--width",
        "16",
        "--height",
        "16",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(fs::read(&out_path).unwrap().starts_with(b"P4"));
    let sidecar: Value =
        serde_json::from_slice(&fs::read(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(sidecar["spec"]["kind"]["kind"], "circle");
    assert_eq!(sidecar["spec"]["kind"]["radius"], 5.0);

    // A kind without its size parameter is command-line misuse.
    let out = porebench(&["generate", "--kind", "circle"]);
    assert_eq!(out.status.code(), Some(2));
    // So is omitting both --kind and --spec.
    let out = porebench(&["generate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_refuses_to_overwrite_its_spec_file() {
    let dir = TempDir::new().unwrap();
    // The sidecar for cell.pbm would land exactly on the input spec.
    let spec = write_spec(
        dir.path(),
        "cell.json",
        r#"{"kind": {"kind": "square", "half_width": 3.0}}"#,
    );
    let out_path = dir.path().join("cell.pbm");
    let kind = porebench_err(&[
        "generate",
        "--spec",
        spec.to_str().unwrap(),
        "--width",
        "16",
        "--height",
        "16",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(kind, "sidecar_collision");
    // Nothing was written, the spec file survives intact.
    assert!(!out_path.exists());
    assert!(fs::read_to_string(&spec).unwrap().contains("square"));
}

#[test]
fn seeded_generation_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "spec.json",
        r#"{"kind": {"kind": "perlin", "scale": 8, "threshold": 0.1}, "rng_seed": 5}"#,
    );
    let mut rasters = Vec::new();
    for name in ["a.pbm", "b.pbm"] {
        let path = dir.path().join(name);
        let out = porebench(&[
            "generate",
            "--spec",
            spec.to_str().unwrap(),
            "--width",
            "32",
            "--height",
            "32",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        rasters.push(fs::read(&path).unwrap());
    }
    assert_eq!(rasters[0], rasters[1]);

    // A different seed on the command line overrides the file.
    let path = dir.path().join("c.pbm");
    let out = porebench(&[
        "generate",
        "--spec",
        spec.to_str().unwrap(),
        "--width",
        "32",
        "--height",
        "32",
        "--seed",
        "6",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_ne!(rasters[0], fs::read(&path).unwrap());
    let sidecar: Value =
        serde_json::from_slice(&fs::read(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(sidecar["spec"]["rng_seed"], 6);
}

#[test]
fn analyze_reports_open_cell() {
    let dir = TempDir::new().unwrap();
    let input = all_void_raster(dir.path(), "open.pbm");
    let doc = porebench_ok(&["analyze", input.to_str().unwrap()]);

    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["input"]["width"], 10);
    assert_eq!(doc["input"]["height"], 10);
    let checksum = doc["input"]["checksum"].as_str().unwrap();
    assert!(checksum.starts_with("sha256:") && checksum.len() == 7 + 64);

    assert_eq!(doc["preprocess"]["components"], 1);
    assert_eq!(doc["preprocess"]["periodic_connected_x"], true);
    assert_eq!(doc["preprocess"]["cleaned"], false);

    let m = &doc["metrics"];
    assert_eq!(m["porosity"], 1.0);
    assert_eq!(m["n_pores"], 1);
    assert_eq!(m["S"], 0.0);
    assert_eq!(m["Di"].as_array().unwrap().len(), 8);
    assert_eq!(m["connectivity"], 1);
    assert_eq!(m["tau"]["x"], 1.0);
    assert_eq!(m["tau"]["y"], 1.0);
    assert_eq!(m["f_max"]["x"], 10);

    assert_eq!(doc["provenance"]["seed"], Value::Null);
    assert!(doc["provenance"]["timestamp"].is_string());
}

#[test]
fn analyze_is_deterministic_apart_from_the_timestamp() {
    let dir = TempDir::new().unwrap();
    let input = all_void_raster(dir.path(), "open.pbm");
    let strip = |mut doc: Value| {
        doc["provenance"]["timestamp"] = Value::Null;
        doc
    };
    let a = strip(porebench_ok(&["analyze", input.to_str().unwrap()]));
    let b = strip(porebench_ok(&["analyze", input.to_str().unwrap()]));
    assert_eq!(a, b);
}

#[test]
fn analyze_blocked_axis_is_null_not_an_error() {
    let dir = TempDir::new().unwrap();
    // A full solid column blocks x; y stays open through the void columns.
    let mut image = PoreImage::filled(6, 6, true).unwrap();
    for y in 0..6 {
        image.set_void(2, y, false);
    }
    let path = dir.path().join("wall.pbm");
    write_raster(&image, &path).unwrap();

    let doc = porebench_ok(&["analyze", path.to_str().unwrap()]);
    assert_eq!(doc["metrics"]["tau"]["x"], Value::Null);
    assert_eq!(doc["metrics"]["f_max"]["x"], 0);
    assert!(doc["metrics"]["tau"]["y"].as_f64().unwrap() >= 1.0);
    assert_eq!(doc["metrics"]["f_max"]["y"], 5);
}

#[test]
fn analyze_all_solid_fails_with_error_json() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("solid.pbm");
    let image = PoreImage::filled(4, 4, false).unwrap();
    write_raster(&image, &path).unwrap();
    assert_eq!(porebench_err(&["analyze", path.to_str().unwrap()]), "no_void_space");
}

#[test]
fn analyze_clean_drops_minor_components() {
    let dir = TempDir::new().unwrap();
    // Two void pockets of different size in a solid slab (1 = solid).
    let path = dir.path().join("pockets.pbm");
    fs::write(
        &path,
        "P1\n7 3\n\
         1 1 1 1 1 1 1\n\
         1 0 0 0 1 0 1\n\
         1 1 1 1 1 1 1\n",
    )
    .unwrap();

    let raw = porebench_ok(&["analyze", path.to_str().unwrap()]);
    assert_eq!(raw["preprocess"]["components"], 2);
    assert_eq!(raw["metrics"]["porosity"].as_f64().unwrap(), 4.0 / 21.0);

    let cleaned = porebench_ok(&["analyze", "--clean", path.to_str().unwrap()]);
    assert_eq!(cleaned["preprocess"]["cleaned"], true);
    assert_eq!(cleaned["preprocess"]["components"], 2);
    assert_eq!(cleaned["metrics"]["porosity"].as_f64().unwrap(), 3.0 / 21.0);
    assert_eq!(cleaned["metrics"]["connectivity"], 1);
}

#[test]
fn batch_analyzes_every_input_and_writes_debug_rasters() {
    let dir = TempDir::new().unwrap();
    let a = all_void_raster(dir.path(), "a.pbm");
    let b = all_void_raster(dir.path(), "b.pbm");
    let dbg = dir.path().join("dbg");
    let out = Command::new(env!("CARGO_BIN_EXE_porebench"))
        .args([
            "analyze",
            "--batch",
            "--debug-dir",
            dbg.to_str().unwrap(),
            a.to_str().unwrap(),
            b.to_str().unwrap(),
        ])
        .env("POREBENCH_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());

    for stem in ["a", "b"] {
        let report = dir.path().join(format!("{stem}.analysis.json"));
        let doc: Value = serde_json::from_slice(&fs::read(report).unwrap()).unwrap();
        assert_eq!(doc["metrics"]["porosity"], 1.0);
        for suffix in ["pores.pgm", "cut_x.pgm", "cut_y.pgm"] {
            let raster = fs::read(dbg.join(format!("{stem}_{suffix}"))).unwrap();
            assert!(raster.starts_with(b"P5"));
        }
    }
}

#[test]
fn batch_expands_directories_to_raster_files() {
    let dir = TempDir::new().unwrap();
    all_void_raster(dir.path(), "a.pbm");
    all_void_raster(dir.path(), "b.pbm");
    // Non-raster clutter in the directory is ignored.
    fs::write(dir.path().join("notes.txt"), "scratch").unwrap();

    let out = porebench(&["analyze", "--batch", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    for stem in ["a", "b"] {
        assert!(dir.path().join(format!("{stem}.analysis.json")).exists());
    }
    assert!(!dir.path().join("notes.analysis.json").exists());
}

#[test]
fn batch_reports_which_inputs_failed() {
    let dir = TempDir::new().unwrap();
    let good = all_void_raster(dir.path(), "good.pbm");
    let solid = dir.path().join("solid.pbm");
    write_raster(&PoreImage::filled(4, 4, false).unwrap(), &solid).unwrap();

    let out = porebench(&[
        "analyze",
        "--batch",
        good.to_str().unwrap(),
        solid.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(doc["error"]["kind"], "batch");
    let message = doc["error"]["message"].as_str().unwrap();
    assert!(message.contains("solid.pbm") && message.contains("1 of 2"));
    // The good input still produced its report.
    assert!(dir.path().join("good.analysis.json").exists());
}

#[test]
fn average_of_a_constant_is_the_constant() {
    let dir = TempDir::new().unwrap();
    let mask_path = dir.path().join("mask.pbm");
    let mut mask = PoreImage::filled(8, 8, true).unwrap();
    mask.set_void(3, 3, false);
    write_raster(&mask, &mask_path).unwrap();

    let field_path = dir.path().join("field.psf");
    ScalarField::from_fn(mask.clone(), |_, _| 2.5)
        .write_psf1(&field_path)
        .unwrap();

    // The whole-domain mean of a constant comes back as that constant, as a
    // JSON scalar on stdout.
    let doc = porebench_ok(&[
        "average",
        "--field",
        field_path.to_str().unwrap(),
        "--image",
        mask_path.to_str().unwrap(),
        "--scheme",
        "full",
        "--weighting",
        "intrinsic",
    ]);
    assert_eq!(doc["scheme"], "full");
    assert_eq!(doc["weighting"], "intrinsic");
    assert_eq!(doc["value"], 2.5);
}

#[test]
fn average_decomposition_writes_variation_and_preview() {
    let dir = TempDir::new().unwrap();
    let mask_path = dir.path().join("mask.pbm");
    let mask = PoreImage::filled(6, 4, true).unwrap();
    write_raster(&mask, &mask_path).unwrap();

    let field_path = dir.path().join("field.psf");
    ScalarField::from_fn(mask.clone(), |x, y| x + 10.0 * y)
        .write_psf1(&field_path)
        .unwrap();

    let avg_path = dir.path().join("avg.json");
    let var_path = dir.path().join("var.psf");
    let preview_path = dir.path().join("avg.pgm");
    let out = porebench(&[
        "average",
        "--field",
        field_path.to_str().unwrap(),
        "--image",
        mask_path.to_str().unwrap(),
        "--scheme",
        "subgrids",
        "--nx",
        "3",
        "--ny",
        "2",
        "--weighting",
        "superficial",
        "--output",
        avg_path.to_str().unwrap(),
        "--variation",
        var_path.to_str().unwrap(),
        "--preview",
        preview_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    // Block means land in a ny-by-nx JSON table; the variation stays a field.
    let doc: Value = serde_json::from_slice(&fs::read(&avg_path).unwrap()).unwrap();
    assert_eq!(doc["scheme"], "subgrids");
    assert_eq!(doc["nx"], 3);
    assert_eq!(doc["ny"], 2);
    let rows = doc["values"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|row| row.as_array().unwrap().len() == 3));

    let variation = ScalarField::read_psf1(&var_path, mask).unwrap();
    assert!(variation.values().iter().all(|v| v.is_finite()));
    // Block mean plus variation reconstructs the ramp at the first pixel.
    let first = rows[0][0].as_f64().unwrap() + variation.values()[0];
    assert!((first - (0.5 + 10.0 * 0.5)).abs() < 1e-12);
    assert!(fs::read(&preview_path).unwrap().starts_with(b"P5"));
}

#[test]
fn moving_average_writes_a_field_and_requires_an_output() {
    let dir = TempDir::new().unwrap();
    let mask_path = dir.path().join("mask.pbm");
    let mask = PoreImage::filled(6, 4, true).unwrap();
    write_raster(&mask, &mask_path).unwrap();

    let field_path = dir.path().join("field.psf");
    ScalarField::from_fn(mask.clone(), |_, _| 1.25)
        .write_psf1(&field_path)
        .unwrap();

    let base: Vec<String> = [
        "average",
        "--field",
        field_path.to_str().unwrap(),
        "--image",
        mask_path.to_str().unwrap(),
        "--scheme",
        "moving",
        "--filter-width",
        "3",
        "--filter-height",
        "3",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    // Without a destination there is nowhere to put a whole field.
    let args: Vec<&str> = base.iter().map(String::as_str).collect();
    assert_eq!(porebench(&args).status.code(), Some(2));

    let out_path = dir.path().join("avg.psf");
    let mut with_out = base.clone();
    with_out.push("--output".into());
    with_out.push(out_path.to_str().unwrap().into());
    let args: Vec<&str> = with_out.iter().map(String::as_str).collect();
    assert!(porebench(&args).status.success());

    let averaged = ScalarField::read_psf1(&out_path, mask).unwrap();
    assert!(averaged.values().iter().all(|&v| v == 1.25));
}

#[test]
fn subgrid_scheme_requires_counts() {
    let dir = TempDir::new().unwrap();
    let mask_path = dir.path().join("mask.pbm");
    write_raster(&PoreImage::filled(4, 4, true).unwrap(), &mask_path).unwrap();
    let out = porebench(&[
        "average",
        "--field",
        "absent.psf",
        "--image",
        mask_path.to_str().unwrap(),
        "--scheme",
        "subgrids",
        "--output",
        "out.psf",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_recovers_a_line_from_csv() {
    let dir = TempDir::new().unwrap();
    let samples = dir.path().join("samples.csv");
    // tau = 2.2 - 1.5 phi, four exact points.
    fs::write(&samples, "phi,tau\n0.2,1.9\n0.4,1.6\n0.6,1.3\n0.8,1.0\n").unwrap();

    let doc = porebench_ok(&[
        "fit",
        "--samples",
        samples.to_str().unwrap(),
        "--model",
        "linear",
        "--loss",
        "mse",
    ]);
    assert_eq!(doc["model"], "linear");
    assert_eq!(doc["loss"], "mse");
    assert_eq!(doc["converged"], true);
    assert_eq!(doc["underdetermined"], false);
    let alpha = doc["alpha"].as_array().unwrap();
    assert!((alpha[0].as_f64().unwrap() - 2.2).abs() < 1e-6);
    assert!((alpha[1].as_f64().unwrap() + 1.5).abs() < 1e-6);
    assert_eq!(doc["residuals"].as_array().unwrap().len(), 4);
}

#[test]
fn fit_reads_json_samples_and_writes_to_a_file() {
    let dir = TempDir::new().unwrap();
    let samples = dir.path().join("samples.json");
    fs::write(
        &samples,
        r#"{"features": [[0.0], [1.0], [2.0]], "targets": [3.0, 3.0, 3.0]}"#,
    )
    .unwrap();
    let out_path = dir.path().join("fit.json");

    let out = porebench(&[
        "fit",
        "--samples",
        samples.to_str().unwrap(),
        "--model",
        "constant",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());

    let doc: Value = serde_json::from_slice(&fs::read(&out_path).unwrap()).unwrap();
    assert!((doc["alpha"][0].as_f64().unwrap() - 3.0).abs() < 1e-6);
}

#[test]
fn fit_rejects_exact_zero_targets_under_mape() {
    let dir = TempDir::new().unwrap();
    let samples = dir.path().join("samples.csv");
    fs::write(&samples, "x,t\n1.0,0.0\n2.0,1.0\n").unwrap();
    let kind = porebench_err(&[
        "fit",
        "--samples",
        samples.to_str().unwrap(),
        "--loss",
        "mape",
    ]);
    assert_eq!(kind, "mape_zero_target");
}

#[test]
fn corrupt_field_magic_is_reported() {
    let dir = TempDir::new().unwrap();
    let mask_path = dir.path().join("mask.pbm");
    write_raster(&PoreImage::filled(2, 2, true).unwrap(), &mask_path).unwrap();
    let field_path = dir.path().join("bad.psf");
    let mut bytes = b"PSF9".to_vec();
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&[0; 4]);
    bytes.extend_from_slice(&[0; 32]);
    fs::write(&field_path, bytes).unwrap();

    let kind = porebench_err(&[
        "average",
        "--field",
        field_path.to_str().unwrap(),
        "--image",
        mask_path.to_str().unwrap(),
        "--scheme",
        "full",
        "--output",
        dir.path().join("out.psf").to_str().unwrap(),
    ]);
    assert_eq!(kind, "unsupported_magic");
}

#[test]
fn missing_input_file_is_an_io_error() {
    assert_eq!(porebench_err(&["analyze", "/nonexistent/cell.pbm"]), "io");
}

#[test]
fn usage_errors_exit_two() {
    let out = porebench(&["analyze"]);
    assert_eq!(out.status.code(), Some(2));
    let out = porebench(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
