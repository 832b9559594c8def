use std::path::Path;
use std::process::{Command, Output};

fn run(sub: &str, config: &str, out: &Path) -> Output {
    let cfg = out.join("run.cfg");
    std::fs::create_dir_all(out).unwrap();
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_strainlim"))
        .args([sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "1"])
        .output()
        .unwrap()
}

#[test]
fn validate_writes_csv_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("validate", "[validate]\nn = 1\nt = 1\nlevels = 1, 2\ntol = 1e-4\n", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("h,n,t,e_u,eoc_u,e_T,eoc_T,iterations,quotient,converged"));
    assert_eq!(lines.count(), 2);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), csv);
}

#[test]
fn csv_output_is_deterministic() {
    let cfg = "tol = 1e-4\n[n_sweep]\nns = 1, 2\nt_mode = both\nlevel = 2\n";
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run("n-sweep", cfg, a.path()).status.code(), Some(0));
    assert_eq!(run("n-sweep", cfg, b.path()).status.code(), Some(0));
    let read = |d: &Path| std::fs::read(d.join("n_sweep.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(std::fs::read_to_string(a.path().join("n_sweep.csv")).unwrap().lines().count(), 5);
}

#[test]
fn non_converged_rows_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("validate", "[validate]\nlevels = 2\nmax_outer = 1\ntol = 1e-12\n", dir.path());
    assert_eq!(out.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",false"));
}

#[test]
fn bad_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("crack", "[crack]\nwidth = 3\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("width"));
    let out = run("validate", "[validate]\ntau = -1\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn crack_writes_vtk_per_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("crack", "[crack]\nlevel = 0\nforces = 0.25, 0.5\nvtk = true\ntau = 2\n", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["0.25", "0.5"] {
        let vtk = std::fs::read_to_string(dir.path().join(format!("crack_f{f}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
        assert!(vtk.contains("VECTORS u"));
    }
    assert_eq!(std::fs::read_to_string(dir.path().join("crack.csv")).unwrap().lines().count(), 3);
}

#[test]
fn infsup_and_checkerboard_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("infsup", "[infsup]\nlevels = 1, 2, 3\nstress = q0, q1disc\n", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("infsup.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",Q1disc,")).count(), 3);

    let out = run("checkerboard", "[checkerboard]\nn_interior = 3, 7\nexponents = 1\n", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("checkerboard.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
