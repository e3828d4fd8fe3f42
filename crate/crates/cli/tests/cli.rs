use std::fs;
use std::path::Path;
use std::process::Command;

use eigentomo::field::read_field_csv;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    report: Value,
    stderr: String,
}

fn eigentomo(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_eigentomo")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        report: serde_json::from_slice(&out.stdout).unwrap_or(Value::Null),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["result"]["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn nullbasis_dimensions() {
    for (n, dim) in [("1", 0), ("2", 1), ("8", 343)] {
        let r = eigentomo(&["nullbasis", "--N", n]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert_eq!(r.report["status"], "ok");
        assert_eq!(r.report["result"]["dim"], dim);
    }
}

#[test]
fn report_embeds_the_config() {
    let r = eigentomo(&["verify", "--N", "3", "--m", "17", "--nu", "0.3", "--basis-index", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let config = &r.report["config"];
    assert_eq!(config["N"], 3);
    assert_eq!(config["m"], 17);
    assert_eq!(config["nu"], 0.3);
    assert_eq!(config["E"], 1.0);
    assert_eq!(config["seed"], 1729);
    assert_eq!(config["command"]["name"], "verify");
    assert_eq!(config["command"]["basis_index"], 4);
}

#[test]
fn basis_and_zero_fields_verify() {
    for args in [&["verify"][..], &["verify", "--zero"], &["verify", "--N", "4", "--basis-index", "26"]] {
        let r = eigentomo(args);
        assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
        assert!(r.report["result"]["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    }
}

#[test]
fn corrupted_potential_fails_the_eps22_check() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "potential.json");
    assert_eq!(eigentomo(&["export", "--format", "json", "--out", &file]).code, 0);
    let mut pot: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    let a = &mut pot["a"][0][1];
    *a = Value::from(a.as_f64().unwrap() + 0.1);
    fs::write(&file, pot.to_string()).unwrap();
    let r = eigentomo(&["verify", "--potential", &file]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["status"], "failed");
    assert_eq!(check(&r.report, "eps22")["pass"], false);
}

#[test]
fn exported_files_round_trip_through_verify() {
    let dir = TempDir::new().unwrap();
    let json = path(&dir, "p.json");
    let csv = path(&dir, "f.csv");
    assert_eq!(eigentomo(&["--N", "3", "export", "--basis-index", "5", "--format", "json", "--out", &json]).code, 0);
    assert_eq!(eigentomo(&["--m", "17", "export", "--potential", &json, "--out", &csv]).code, 0);
    let r = eigentomo(&["verify", "--potential", &json]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = eigentomo(&["--m", "17", "verify", "--field", &csv]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.report["result"]["diagnostics"]["max_div_analytic"].is_null());
}

#[test]
fn vtk_and_pgm_exports_have_their_headers() {
    let dir = TempDir::new().unwrap();
    let vtk = path(&dir, "f.vtk");
    let pgm = path(&dir, "s.pgm");
    assert_eq!(eigentomo(&["--m", "9", "export", "--format", "vtk", "--out", &vtk]).code, 0);
    assert!(fs::read_to_string(&vtk).unwrap().starts_with("# vtk DataFile"));
    assert_eq!(eigentomo(&["export", "--format", "pgm", "--slice-res", "32", "--out", &pgm]).code, 0);
    let bytes = fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5\n32 32\n255\n"));
    assert_eq!(bytes.len(), "P5\n32 32\n255\n".len() + 32 * 32);
}

#[test]
fn sampled_fields_cannot_export_coefficients() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "f.csv");
    assert_eq!(eigentomo(&["--m", "9", "export", "--out", &csv]).code, 0);
    let r = eigentomo(&["--m", "9", "export", "--field", &csv, "--format", "json", "--out", &path(&dir, "x.json")]);
    assert_eq!(r.code, 2);
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(eigentomo(&["--nu", "0.7", "nullbasis"]).code, 2);
    assert_eq!(eigentomo(&["verify", "--potential", "/nonexistent/p.json"]).code, 2);
    assert_eq!(eigentomo(&["export"]).code, 2);
    assert_eq!(eigentomo(&["verify", "--zero", "--basis-index", "0"]).code, 2);
    assert_eq!(eigentomo(&["verify", "--basis-index", "1"]).code, 2);
    assert_eq!(eigentomo(&["fit", "--component", "s99"]).code, 2);
}

#[test]
fn zero_inputs_recover_zero() {
    let dir = TempDir::new().unwrap();
    for mode in ["diagonal-from-shear", "shear-from-diagonal"] {
        let out = path(&dir, "r.csv");
        let r = eigentomo(&["--m", "9", "recover", "--mode", mode, "--zero", "--out", &out]);
        assert_eq!(r.code, 0, "{mode}: {}", r.stderr);
        let field = read_field_csv(std::io::BufReader::new(fs::File::open(Path::new(&out)).unwrap())).unwrap();
        assert_eq!(field.max_abs_all(), 0.0);
    }
    let r = eigentomo(&["--m", "9", "recover", "--mode", "shear-from-diagonal", "--zero"]);
    assert_eq!(r.report["result"]["report"]["boundary"], "dirichlet");
    assert!(r.report["result"]["report"]["min_singular_value_relative"].as_f64().unwrap() > 1e-8);
}

#[test]
fn diagonal_recovery_matches_the_series() {
    let r = eigentomo(&["--m", "17", "recover", "--mode", "diagonal-from-shear"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report = &r.report["result"]["report"];
    assert!(report["error_vs_oracle"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["consistent"], true);
}

#[test]
fn reduce_builtin_example() {
    let r = eigentomo(&["reduce"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let result = &r.report["result"];
    assert_eq!(result["identity_holds"], true);
    assert_eq!(result["certificate"]["feasible"], false);
    assert_eq!(result["e"][1], result["e"][2]);
}

#[test]
fn reduce_reads_an_eigenstrain_file() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "eps.json");
    let r = eigentomo(&["reduce", "--random-degree", "3", "--out", &file]);
    assert_eq!(r.code, 0);
    fs::write(&file, r.report["result"]["eigenstrain"].to_string()).unwrap();
    let again = eigentomo(&["reduce", "--input", &file]);
    assert_eq!(again.code, 0, "{}", again.stderr);
    assert_eq!(again.report["result"]["u"], r.report["result"]["u"]);
}

#[test]
fn poorly_checks_pass_and_the_bracket_is_informational() {
    let r = eigentomo(&["poorly", "--random-degree", "4", "--bracket-random"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.report["result"]["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert!(r.report["result"]["bracket"]["is_poorly"].is_boolean());
}

#[test]
fn poorly_accepts_spw_parameters() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "spw.json");
    let r = eigentomo(&["poorly", "--out", &file]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let spw: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    fs::write(&file, spw["spw"].to_string()).unwrap();
    let again = eigentomo(&["poorly", "--params", &file]);
    assert_eq!(again.code, 0, "{}", again.stderr);
    assert_eq!(again.report["result"]["tau"], r.report["result"]["tau"]);
}

#[test]
fn disk_fit_sweep_writes_a_sign_image() {
    let dir = TempDir::new().unwrap();
    let pgm = path(&dir, "fit.pgm");
    let r = eigentomo(&[
        "fit",
        "--pattern",
        "disk",
        "--pattern-size",
        "32",
        "--sweep",
        "2,3,4",
        "--slice-res",
        "32",
        "--out",
        &pgm,
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.report["result"]["strictly_decreasing"], true);
    assert_eq!(r.report["result"]["runs"].as_array().unwrap().len(), 3);
    assert!(fs::read(&pgm).unwrap().starts_with(b"P5\n32 32\n"));
}

#[test]
fn fit_reads_a_pgm_target() {
    let dir = TempDir::new().unwrap();
    let image = dir.path().join("target.pgm");
    let bytes = b"P2\n3 3\n255\n255 0 0\n0 0 0\n0 0 0\n".to_vec();
    fs::write(&image, bytes).unwrap();
    let r = eigentomo(&["--N", "3", "fit", "--image", image.to_str().unwrap(), "--slice-res", "16"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.report["result"]["target"]["width"], 3);
    assert!(r.report["result"]["rms_residuals"][0].as_f64().unwrap() < 1.0);
}

#[test]
fn seeded_runs_repeat_and_seeds_matter() {
    let a = eigentomo(&["reduce", "--random-degree", "3", "--seed", "11"]);
    let b = eigentomo(&["reduce", "--random-degree", "3", "--seed", "11"]);
    let c = eigentomo(&["reduce", "--random-degree", "3", "--seed", "12"]);
    assert_eq!(a.report, b.report);
    assert_ne!(a.report["result"]["eigenstrain"], c.report["result"]["eigenstrain"]);
}
