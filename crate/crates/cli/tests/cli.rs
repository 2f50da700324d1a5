use std::process::{Command, Output};

fn exflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn flow_sign_change_at_0_475() {
    let out = exflow(&["flow", "--n", "5", "--dt", "0.05", "--k", "1..4"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout(&out));
    let want: Vec<String> = std::iter::once("t_over_period".to_string())
        .chain((1..=4).map(|k| format!("phi_tau_c1_k{k}")))
        .chain((1..=4).map(|k| format!("phi_tau_c0_k{k}")))
        .collect();
    assert_eq!(header, want);
    assert_eq!(rows.len(), 401);
    let at = rows.iter().position(|r| r[0] == 0.475).unwrap();
    let (before, on, after) = (&rows[at - 1], &rows[at], &rows[at + 1]);
    assert!(before[1..].iter().all(|v| *v > 0.0));
    assert!(on[1..].iter().all(|v| v.abs() <= 1e-12));
    assert!(after[1..].iter().all(|v| *v < 0.0));
}

#[test]
fn entropy_vanishes_at_start() {
    let out = exflow(&["entropy", "--n", "5", "--k", "1", "--class", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["t_over_period", "entropy_c1_k1"]);
    assert_eq!(rows[0], [0.0, 0.0]);
}

#[test]
fn verify_passes_for_five_qubits() {
    let out = exflow(&["verify", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "suite,cases,max_residual,tolerance,status");
    let suites: Vec<&str> = lines.collect();
    assert!(suites.len() >= 10);
    assert!(suites.iter().all(|l| l.ends_with(",pass")));
}

#[test]
fn output_is_deterministic_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = exflow(&["fisher", "--n", "4", "--steps", "50", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn every_dataset_has_a_time_column() {
    let cases: [&[&str]; 7] = [
        &["amplitudes", "--n", "5"],
        &["flow", "--n", "6"],
        &["bloch-traj", "--n", "5"],
        &["bloch-domain", "--n", "5", "--dt", "0.125"],
        &["entropy", "--n", "5", "--class", "0"],
        &["fisher-decomp", "--n", "5", "--t1", "0.4", "--theta", "n"],
        &["infer", "--n", "5"],
    ];
    for args in cases {
        let mut full = args.to_vec();
        full.extend(["--steps", "20"]);
        let out = exflow(&full);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let (header, rows) = parse_csv(&stdout(&out));
        assert_eq!(header[0], "t_over_period", "{args:?}");
        assert_eq!(rows.len(), 21, "{args:?}");
        assert!(rows.iter().all(|r| r.len() == header.len()), "{args:?}");
    }
}

#[test]
fn values_carry_seventeen_significant_digits() {
    let out = exflow(&["amplitudes", "--n", "3", "--steps", "3"]);
    let text = stdout(&out);
    let cell = text.lines().nth(2).unwrap().split(',').nth(1).unwrap().to_string();
    let mantissa = cell.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{cell}");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["flow", "--n", "5", "--bogus"][..],
        &["flow", "--n", "5", "--steps", "1"],
        &["flow", "--n", "5", "--k", "2..7"],
        &["flow", "--n", "5", "--dt", "0"],
        &["entropy", "--n", "5", "--k", "5", "--class", "0"],
        &["amplitudes", "--n", "1"],
        &["flow", "--n", "5", "--class", "2"],
        &["amplitudes"],
    ] {
        assert_eq!(exflow(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn singular_start_exits_three_and_names_t1() {
    for args in [
        &["bloch-traj", "--n", "2", "--t1", "0.5"][..],
        &["fisher-decomp", "--n", "2", "--t1", "1.5"],
    ] {
        let out = exflow(args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains("t1 = "), "{err}");
    }
}

#[test]
fn singular_cells_in_sweeps_are_nan() {
    let out = exflow(&["flow", "--n", "4", "--k", "2", "--class", "1", "--steps", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = parse_csv(&stdout(&out));
    assert!(rows[2][1].is_nan());
    assert!(String::from_utf8(out.stderr).unwrap().contains("t = 0.5"));
}
