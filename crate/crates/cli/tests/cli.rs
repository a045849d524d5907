use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn msl(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msl"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("msl runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (headers, rows)
}

fn col(headers: &[String], name: &str) -> usize {
    headers.iter().position(|h| h == name).unwrap()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn eigs_on_half_order_problem_gives_integer_rho() {
    let dir = tempfile::tempdir().unwrap();
    let out = msl(&["eigs"], &configs().join("half_order.toml"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("eigs.csv"));
    assert_eq!(&h[..5], ["n", "q", "rho_re", "rho_im", "multiplicity"]);
    let contour_rows: Vec<_> = rows.iter().filter(|r| r[0] != "0").collect();
    assert_eq!(contour_rows.len(), 30);
    for r in contour_rows {
        let n = f(&r[0]);
        assert!((f(&r[col(&h, "rho_re")]) - n).abs() < 1e-10);
        assert!(f(&r[col(&h, "rho_im")]).abs() < 1e-10);
        assert_eq!(r[col(&h, "multiplicity")], "1");
    }
    let low: Vec<_> = rows.iter().filter(|r| r[0] == "0").collect();
    assert_eq!(low.len(), 1);
    assert!(f(&low[0][col(&h, "rho_re")]).abs() < 1e-6);
    assert!((f(&low[0][col(&h, "w_11_re")]) - 1.0 / PI).abs() < 1e-8);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("eigs.json")).unwrap()).unwrap();
    assert_eq!(json["contours"].as_array().unwrap().len(), 30);
    assert!(json["asymptotics"]["groups"][0]["fit"].is_object());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("eigs.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "eigs");
    assert_eq!(manifest["contour"]["weight_tol"], 1e-9);
}

#[test]
fn weights_on_half_order_problem_are_two_over_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = msl(&["weights"], &configs().join("half_order.toml"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("weights.csv"));
    let (w, a) = (col(&h, "w_11_re"), col(&h, "a_11_re"));
    for r in rows.iter().filter(|r| r[0] != "0") {
        assert!((f(&r[w]) - 2.0 / PI).abs() < 1e-8, "{r:?}");
        assert!((f(&r[a]) - 2.0 / PI).abs() < 1e-8);
    }
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("problem.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn malformed_nu_ordering_is_an_input_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[order]\nnu = [0.3, 0.7]\n[boundary]\nlength = 1.0\n");
    let out = msl(&["eigs"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["kind"], "input");
    assert!(record["message"].as_str().unwrap().contains("order.nu"));
    assert!(!dir.path().join("eigs.csv").exists());
}

#[test]
fn nonpositive_tolerances_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[order]\nnu = [0.5]\n[boundary]\nlength = 1.0\n[solver.contour]\nnewton_tol = 0.0\n",
    );
    let out = msl(&["eigs"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.contour.newton_tol"));
    let half = configs().join("half_order.toml");
    let out = msl(&["eigs", "--tol-scale", "-1"], &half, dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_output_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = configs().join("half_order.toml");
    for cmd in ["eigs", "fss"] {
        assert!(msl(&[cmd], &cfg, a.path()).status.success());
        assert!(msl(&[cmd, "--jobs", "1"], &cfg, b.path()).status.success());
        for ext in ["csv", "json"] {
            let name = format!("{cmd}.{ext}");
            assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn output_defaults_to_the_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[order]\nnu = [0.5]\n[boundary]\nlength = 3.141592653589793\n[tasks.fss]\nlambda = [4.0, 0.0]\nx = [0.5]\nfamilies = [\"C1\", \"S1\"]\n",
    );
    let out = Command::new(env!("CARGO_BIN_EXE_msl"))
        .args(["fss", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("fss.csv"));
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!((f(&r[col(&h, "value_re")]) - (PI / 2.0 * 2.0).cos()).abs() < 1e-12);
    }
}

#[test]
fn verify_passes_on_half_order_problem_and_reports_the_sector_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("half_order.toml");
    let out = msl(&["verify"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("verify.csv"));
    assert!(rows.iter().all(|r| r[col(&h, "passed")] == "true"));
    assert!(rows.iter().any(|r| r[0] == "oracle"));

    let mixed = configs().join("mixed.toml");
    let text: String = fs::read_to_string(mixed)
        .unwrap()
        .lines()
        .map(|l| if l.starts_with("# sector_rho") { "sector_rho = 30.0\n".to_string() } else { format!("{l}\n") })
        .collect();
    let cfg = write_config(dir.path(), &text);
    let out = msl(&["verify"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let (h, rows) = read_csv(&dir.path().join("verify.csv"));
    let failed: Vec<_> = rows.iter().filter(|r| r[col(&h, "passed")] == "false").collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|r| r[1].starts_with("cross-sector")));
}
