//! End-to-end tests of the `earlysim` binary: exit codes, output files and
//! determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn earlysim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_earlysim"))
        .args(args)
        .current_dir(dir)
        .env_remove("EARLYSIM_CONFIG")
        .env_remove("EARLYSIM_OUT")
        .env_remove("EARLYSIM_NT")
        .env_remove("EARLYSIM_SCHEME")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

const RC_CONFIG: &str = "\
[early]
va = -50.0
s = 10.0

[circuit]
vcc = 10.0
r = 150.0
c = 250e-9

[stimulus]
offset = 60e-6
amplitude = 60e-6
f = 1000.0

[sim]
nt = 12001
";

#[test]
fn thd_command_succeeds_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = earlysim(&["--nt", "12001", "thd"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("thd = "), "{stdout}");

    let csv = fs::read_to_string(dir.path().join("thd.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "thd,n_harmonics,fundamental_rms");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let thd: f64 = row[0].parse().unwrap();
    // The reference resistive setup distorts at the few-percent level.
    assert!((thd - 0.0414).abs() < 0.001, "thd = {thd}");
    assert_eq!(row[1], "3");
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RC_CONFIG.replace("va = -50.0", "va = 50.0"));
    let out = earlysim(&["--config", cfg.to_str().unwrap(), "thd"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("va"), "{stderr}");
    assert!(!dir.path().join("thd.csv").exists());
}

#[test]
fn missing_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = earlysim(&["--config", "nope.toml", "thd"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_errors_exit_2_and_leave_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // s * i_b peaks at 10 * 0.4 = 4.0 > pi/2: the stimulus leaves the fan
    // domain mid-cycle.
    let cfg = write_config(
        dir.path(),
        &RC_CONFIG
            .replace("offset = 60e-6", "offset = 0.2")
            .replace("amplitude = 60e-6", "amplitude = 0.2")
            .replace("c = 250e-9", "c = 0.0"),
    );
    let out = earlysim(
        &["--config", cfg.to_str().unwrap(), "transient"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("tan domain"), "{stderr}");
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn transient_resistive_trace_is_collinear() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RC_CONFIG.replace("c = 250e-9", "c = 0.0"));
    let out = earlysim(
        &["--config", cfg.to_str().unwrap(), "transient"],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,i_b,i,v_c,v_p");
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (i, v_c) = (f[2], f[3]);
        assert!((v_c + 150.0 * i - 10.0).abs() < 1e-9);
        rows += 1;
    }
    assert_eq!(rows, 12001);
}

#[test]
fn op_point_prints_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = earlysim(&["op-point", "--ib", "60e-6"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("i_b,i,v_c,v_p\n"));
    let row: Vec<f64> = stdout
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((row[1] - 0.03302752657183788).abs() < 1e-12);
    assert!((row[2] - 5.045871014224319).abs() < 1e-12);
}

#[test]
fn spectrum_fundamental_reads_zero_db() {
    let dir = tempfile::tempdir().unwrap();
    let out = earlysim(&["--nt", "12001", "spectrum"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let bins: Vec<&str> = csv.lines().skip(1).collect();
    // Three analysis cycles: the fundamental sits in bin 3.
    let row: Vec<&str> = bins[3].split(',').collect();
    let db: f64 = row[1].parse().unwrap();
    assert_eq!(db, 0.0);
}

#[test]
fn sweep_surface_has_constant_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = earlysim(
        &[
            "--nt", "12001", "sweep", "--va-min", "-200", "--va-max", "-50", "--s-min", "2.5",
            "--s-max", "10", "--n-va", "3", "--n-s", "2",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("surface.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# s_axis: "));
    assert!(lines[1].starts_with("# va_axis: "));
    let rows: Vec<Vec<f64>> = lines[2..]
        .iter()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        for (j, value) in row.iter().enumerate() {
            let rel = (value - rows[0][j]).abs() / rows[0][j];
            assert!(rel < 1e-6, "column {j} varies across va: {rel}");
        }
    }
}

#[test]
fn beta_scan_writes_fit_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &RC_CONFIG
            .replace("va = -50.0", "va = -200.0")
            .replace("s = 10.0", "s = 2.5")
            .replace("c = 250e-9", "c = 0.0"),
    );
    let out = earlysim(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "beta-scan",
            "--n-points",
            "50",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("beta_scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "i_b,beta,fit_slope,fit_intercept,fit_r2"
    );
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(row[4] > 0.999, "fit r2 = {}", row[4]);
}

#[test]
fn outputs_are_deterministic() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let out = earlysim(&["--nt", "12001", "thd"], dir);
        assert!(out.status.success());
        let out = earlysim(&["--nt", "12001", "spectrum"], dir);
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(dir_a.path().join("thd.csv")).unwrap(),
        fs::read(dir_b.path().join("thd.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir_a.path().join("spectrum.csv")).unwrap(),
        fs::read(dir_b.path().join("spectrum.csv")).unwrap()
    );
}

#[test]
fn env_variable_overrides_nt() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_earlysim"))
        .args(["transient"])
        .current_dir(dir.path())
        .env("EARLYSIM_NT", "12001")
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12002);
}

#[test]
fn figures_recipe_selection_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = earlysim(&["--nt", "12001", "figures", "rc-loops"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [20, 70, 300, 1000] {
        assert!(dir
            .path()
            .join(format!("figures/rc_loop_f{f}.csv"))
            .exists());
    }
    let metrics = fs::read_to_string(dir.path().join("figures/rc_loop_metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(lines.next().unwrap(), "f_hz,detachment,closed");
    let detachments: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(detachments.len(), 4);
    assert!(detachments.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn figures_rejects_unknown_recipe() {
    let dir = tempfile::tempdir().unwrap();
    let out = earlysim(&["figures", "nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scheme_flag_accepts_trapezoidal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RC_CONFIG);
    let out = earlysim(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--scheme",
            "trapezoidal",
            "thd",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = earlysim(
        &["--config", cfg.to_str().unwrap(), "--scheme", "rk4", "thd"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}
