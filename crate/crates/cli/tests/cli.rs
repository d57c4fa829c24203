use isochrone_cli::config::{schema_json, RunConfig};
use isochrone_cli::{run, EXIT_ERROR, EXIT_NOT_ISOCHRONOUS, EXIT_OK, EXIT_USAGE};
use serde_json::Value;
use std::process::Command;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("isochrone").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn odd_from_even_of_one() {
    let v = json(&["series", "odd-from-even", "--coeffs", "1"]);
    assert_eq!(v, serde_json::json!({"a3": "10/9"}));
    let v = json(&["series", "odd-from-even", "--coeffs", "1,0"]);
    assert_eq!(v["a5"], "-56/27");
}

#[test]
fn series_recursions_on_rationals() {
    // b = (1) gives the harmonic potential
    let v = json(&["series", "g-from-f", "--coeffs", "0", "--order", "4"]);
    assert_eq!(v["c2"], "1/2");
    assert_eq!(v["c3"], "0");
    let v = json(&["series", "urabe-h", "--coeffs", "0,0,1/2,0,1/4"]);
    assert_eq!(v["odd"], false);
}

#[test]
fn isotonic_landau_certificate() {
    let (code, out, _) = call(&["certify", "--family", "isotonic", "--alpha", "1", "--criterion", "landau", "--tol", "1e-8"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["reports"][0]["verdict"], "Isochronous");
}

#[test]
fn harmonic_period_table() {
    let v = json(&["period", "--family", "harmonic", "--emin", "0.1", "--emax", "10", "--n", "5"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!((r["T"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-12);
    }
    assert_eq!(rows[0]["E"].as_f64().unwrap(), 0.1);
}

#[test]
fn expect_isochronous_fails_on_quartic() {
    let (code, out, _) = call(&["certify", "--family", "quartic", "--criterion", "i,iii", "--expect-isochronous"]);
    assert_eq!(code, EXIT_NOT_ISOCHRONOUS);
    let v: Value = serde_json::from_str(&out).unwrap();
    for r in v["reports"].as_array().unwrap() {
        assert_eq!(r["verdict"], "NotIsochronous");
    }
    // without the flag the same run succeeds
    assert_eq!(call(&["certify", "--family", "quartic", "--criterion", "iii"]).0, EXIT_OK);
}

#[test]
fn usage_errors_print_the_schema() {
    for args in [&["bogus"][..], &["period"][..], &[][..], &["certify", "--family", "harmonic", "--tol", "x"][..]] {
        let (code, _, err) = call(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(err.contains("\"$schema\""), "{err}");
    }
}

#[test]
fn numeric_errors_carry_the_error_name() {
    let (code, _, err) = call(&["oracle", "spectrum", "--family", "family1", "--levels", "3"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("MarginError"), "{err}");
    let (code, _, err) = call(&["period", "--family", "nope"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("ParameterDomainError"), "{err}");
    let (code, _, err) = call(&["certify", "--family", "harmonic", "--criterion", "vi"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("unknown criterion"), "{err}");
}

#[test]
fn config_round_trips_and_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["certify", "--family", "three-param", "--a", "0.1", "--tol", "1e-9", "--n", "4", "--points", "-0.3,0.2"];
    let (_, dumped, _) = call(&[&args[..], &["--dump-config"]].concat());
    let cfg: RunConfig = serde_json::from_str(&dumped).unwrap();
    assert_eq!(serde_json::to_string_pretty(&cfg).unwrap() + "\n", dumped);
    let again: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(again, cfg);

    let path = dir.path().join("run.json");
    std::fs::write(&path, &dumped).unwrap();
    let (c1, direct, _) = call(&args);
    let (c2, from_file, _) = call(&["--config", path.to_str().unwrap()]);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(direct, from_file);
    let (_, third, _) = call(&args);
    assert_eq!(direct, third);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"command": {"id": "families"}, "colour": "red"}"#,
        r#"{"command": {"id": "period", "potential": {"family": "harmonic", "gamma": 1}, "energies": {"emin": 0.1, "emax": 1, "n": 2}}}"#,
        r#"{"command": {"id": "period", "potential": {"family": "harmonic"}, "energies": {"emin": 0.1, "emax": 1, "n": 2}, "extra": 0}}"#,
    ];
    for text in cases {
        let path = dir.path().join("bad.json");
        std::fs::write(&path, text).unwrap();
        let (code, _, err) = call(&["--config", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE, "{text}: {err}");
        assert!(err.contains("unknown field"), "{err}");
    }
}

#[test]
fn csv_and_json_agree() {
    let base = ["period", "--family", "family2", "--emin", "0.1", "--emax", "1", "--n", "3"];
    let (_, j, _) = call(&base);
    let (_, c, _) = call(&[&base[..], &["--format", "csv"]].concat());
    let v: Value = serde_json::from_str(&j).unwrap();
    let lines: Vec<&str> = c.lines().collect();
    assert_eq!(lines[0], "E,T,T_prime");
    assert!(!c.contains('\r'));
    for (row, line) in v["rows"].as_array().unwrap().iter().zip(&lines[1..]) {
        let cells: Vec<&str> = line.split(',').collect();
        // the JSON text carries the same literal as the CSV cell
        for (k, cell) in ["E", "T", "T_prime"].iter().zip(&cells) {
            assert_eq!(row[*k].as_f64().unwrap(), cell.parse::<f64>().unwrap());
            assert!(j.contains(cell), "{cell}");
        }
    }
}

#[test]
fn output_file_and_families() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fam.csv");
    let (code, out, _) = call(&["families", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (EXIT_OK, ""));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("id,description\nharmonic,"));
    assert!(text.contains("\nfamily4,"));
}

#[test]
fn published_schema_is_current() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/run-config.schema.json");
    let on_disk = std::fs::read_to_string(path).expect("docs/run-config.schema.json exists");
    assert_eq!(on_disk.trim_end(), schema_json(), "regenerate with `isochrone --schema`");
}

#[test]
fn binary_respects_thread_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_isochrone"))
        .args(["wkb", "--family", "isotonic", "--order", "2", "--levels", "3"])
        .env("ISOCHRONE_MAX_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["levels"].as_array().unwrap().len(), 3);

    let bad = Command::new(env!("CARGO_BIN_EXE_isochrone"))
        .arg("families")
        .env("ISOCHRONE_MAX_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}

#[test]
fn compare_joins_both_spectra() {
    let v = json(&["compare", "--family", "harmonic", "--levels", "3", "--order", "2"]);
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 3);
    for l in levels {
        assert!(l["diff"].as_f64().unwrap().abs() < 1e-3, "{l}");
    }
}
