use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn iddm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iddm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("iddm-cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn critical_population() {
    let out = iddm(&[
        "critical", "--omega", "400", "--omega0", "1", "--kappa", "-0.5", "--lambda", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "delta_c = 0.5\n");
}

#[test]
fn critical_coupling_without_impurity_coupling() {
    let out = iddm(&[
        "critical", "--omega", "400", "--omega0", "1", "--kappa", "0", "--delta", "0.3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "lambda_c = 10\n");
}

#[test]
fn critical_population_out_of_range() {
    let out = iddm(&[
        "critical", "--omega", "400", "--kappa", "-0.5", "--lambda", "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "no-transition\n");
}

#[test]
fn critical_requires_one_target() {
    let neither = iddm(&["critical", "--omega", "400"]);
    assert_eq!(neither.status.code(), Some(1));
    assert!(stderr(&neither).contains("--lambda"));
    let both = iddm(&["critical", "--lambda", "5", "--delta", "0"]);
    assert_eq!(both.status.code(), Some(1));
}

#[test]
fn invalid_values_name_the_flag() {
    let out = iddm(&["meanfield", "--delta", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--delta"), "{}", stderr(&out));

    let out = iddm(&["meanfield", "--delta", "0", "--omega", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--omega"), "{}", stderr(&out));

    let out = iddm(&["measure", "--z", "0.4", "--target", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--target"), "{}", stderr(&out));

    let out = iddm(&["sweep", "--lambda-count", "zero"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--lambda-count"), "{}", stderr(&out));

    let out = iddm(&["ed", "--n", "4", "--delta", "0", "--max-dim", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--max-dim"), "{}", stderr(&out));
}

#[test]
fn help_exits_cleanly() {
    let out = iddm(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    for sub in [
        "critical",
        "meanfield",
        "sweep",
        "deriv",
        "spectrum",
        "ed",
        "measure",
    ] {
        assert!(stdout(&out).contains(sub));
    }
}

#[test]
fn measurement_sets_population() {
    let out = iddm(&[
        "measure",
        "--z",
        "0.8",
        "--theta",
        "0.5235987755982988",
        "--sign",
        "plus",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("delta = 0.4"));
    assert!(text.contains("rho_00 = 0.7\n"));
    assert!(text.contains("rho_11 = 0.3\n"));

    let steered = iddm(&["measure", "--z", "0.9", "--target", "-0.3"]);
    assert_eq!(steered.status.code(), Some(0));
    assert!(stdout(&steered).starts_with("delta = -0.3\n"));
    assert!(stdout(&steered).contains("sign = minus\n"));
}

#[test]
fn derivative_scan_shows_second_derivative_step() {
    let out = iddm(&[
        "deriv", "--wrt", "delta", "--from", "0", "--to", "1", "--step", "1e-3", "--omega", "400",
        "--kappa", "-0.5", "--lambda", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,value,e0,d1,d2"));
    let rows: Vec<(f64, Option<f64>)> = lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            assert_eq!(cells.len(), 5);
            assert_eq!(cells[0], "delta");
            (cells[1].parse().unwrap(), cells[4].parse().ok())
        })
        .collect();
    assert_eq!(rows.len(), 1001);
    assert!(rows[0].1.is_none() && rows[1000].1.is_none());
    for &(delta, d2) in &rows[1..1000] {
        let d2 = d2.unwrap();
        if delta < 0.499 {
            assert!(d2.abs() < 1e-2, "d2 = {d2} at {delta}");
        } else if delta > 0.501 {
            assert!((d2 + 0.5).abs() < 1e-2, "d2 = {d2} at {delta}");
        }
    }
}

#[test]
fn ed_normal_phase_has_few_photons() {
    let out = iddm(&[
        "ed", "--n", "16", "--delta", "0", "--omega", "400", "--kappa", "-0.5", "--lambda", "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    let record: serde_json::Value = serde_json::from_str(text.trim_end()).unwrap();
    assert_eq!(record["n_atoms"], 16);
    assert!(record["photons_over_n"].as_f64().unwrap() <= 1e-3);
    assert_eq!(record["converged"], true);
}

#[test]
fn ed_emits_one_record_per_atom_number() {
    let out = iddm(&[
        "ed", "--n", "2,4,6", "--delta", "1", "--omega", "4", "--kappa", "-0.5", "--lambda", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let ns: Vec<u64> = stdout(&out)
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["n_atoms"]
                .as_u64()
                .unwrap()
        })
        .collect();
    assert_eq!(ns, [2, 4, 6]);
}

#[test]
fn sweep_csv_contract() {
    let out = iddm(&["sweep", "--delta-count", "5", "--lambda-count", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = out.stdout.clone();
    assert!(!bytes.contains(&b'\r'));
    assert!(bytes.ends_with(b"\n"));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("delta,lambda,alpha2,beta2,e0,jz_over_n,i_over_n,phase,error")
    );
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 35);
    for line in body {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 9);
        let delta: f64 = cells[0].parse().unwrap();
        let lambda: f64 = cells[1].parse().unwrap();
        let expected = if lambda * lambda + 50.0 * delta - 50.0 < 0.0 {
            "normal"
        } else {
            "superradiant"
        };
        if (lambda * lambda + 50.0 * delta - 50.0).abs() > 1e-9 {
            assert_eq!(cells[7], expected, "{line}");
        }
    }
}

#[test]
fn sweep_is_byte_reproducible_and_thread_independent() {
    let a = iddm(&["sweep", "--delta-count", "41", "--lambda-count", "25"]);
    let b = iddm(&["sweep", "--delta-count", "41", "--lambda-count", "25"]);
    let single = Command::new(env!("CARGO_BIN_EXE_iddm"))
        .args(["sweep", "--delta-count", "41", "--lambda-count", "25"])
        .env("IDDM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, single.stdout);
}

#[test]
fn ed_is_byte_reproducible() {
    let args = [
        "ed", "--n", "4,8", "--delta", "1", "--omega", "4", "--kappa", "-0.5", "--lambda", "2",
    ];
    assert_eq!(iddm(&args).stdout, iddm(&args).stdout);
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_iddm"))
        .args(["critical", "--lambda", "5"])
        .env("IDDM_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("IDDM_THREADS"));
}

#[test]
fn config_plus_flags_equals_expanded_flags() {
    let path = scratch("sweep.json");
    fs::write(
        &path,
        r#"{"omega": 400, "kappa": -0.5, "delta_count": 9, "lambda_min": 2, "lambda_max": 10, "lambda_count": 5}"#,
    )
    .unwrap();
    let via_config = iddm(&[
        "sweep",
        "--config",
        path.to_str().unwrap(),
        "--lambda-count",
        "17",
    ]);
    let expanded = iddm(&[
        "sweep",
        "--omega",
        "400",
        "--kappa",
        "-0.5",
        "--delta-count",
        "9",
        "--lambda-min",
        "2",
        "--lambda-max",
        "10",
        "--lambda-count",
        "17",
    ]);
    assert_eq!(via_config.status.code(), Some(0), "{}", stderr(&via_config));
    assert_eq!(via_config.stdout, expanded.stdout);
    assert_eq!(stdout(&via_config).lines().count(), 1 + 9 * 17);
}

#[test]
fn config_covers_measurement_and_output() {
    let path = scratch("measure.json");
    let target = scratch("measure.txt");
    fs::write(
        &path,
        format!(
            r#"{{"z": 0.8, "theta": 0.5235987755982988, "sign": "minus", "output": {:?}}}"#,
            target.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = iddm(&["measure", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(&target)
        .unwrap()
        .starts_with("delta = -0.4\n"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let path = scratch("typo.json");
    fs::write(&path, r#"{"lamda": 5}"#).unwrap();
    let out = iddm(&["critical", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("--config") && err.contains("lamda"), "{err}");
}

#[test]
fn curve_reports_missing_transition() {
    let out = iddm(&[
        "curve",
        "--delta-min",
        "0",
        "--delta-max",
        "1",
        "--delta-count",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,lambda_c");
    let lambda_c: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((lambda_c - 50f64.sqrt()).abs() < 1e-12);
    assert!(lines[3].ends_with(",no-transition"));
}

#[test]
fn meanfield_methods_agree() {
    let closed = iddm(&["meanfield", "--delta", "0.8", "--format", "json-lines"]);
    let numeric = iddm(&[
        "meanfield",
        "--delta",
        "0.8",
        "--format",
        "json-lines",
        "--method",
        "numeric",
    ]);
    let parse =
        |o: &Output| serde_json::from_str::<serde_json::Value>(stdout(o).trim_end()).unwrap();
    let (a, b) = (parse(&closed), parse(&numeric));
    assert_eq!(a["phase"], "superradiant");
    for key in ["alpha2", "beta2", "e0"] {
        assert!((a[key].as_f64().unwrap() - b[key].as_f64().unwrap()).abs() < 1e-8);
    }
}

#[test]
fn spectrum_softens_at_the_transition() {
    let out = iddm(&[
        "spectrum",
        "--delta",
        "0",
        "--lambda",
        "7.0710678118654755",
        "--format",
        "json-lines",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim_end()).unwrap();
    assert!(v["eps_minus"].as_f64().unwrap() <= 1e-3);
}
