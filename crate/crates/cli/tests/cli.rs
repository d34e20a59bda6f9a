use std::process::Command;

fn quadrix(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_quadrix")).args(args).output().unwrap()
}

#[test]
fn invalid_range_exits_one() {
    let out = quadrix(&["sks", "--k-max", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_exits_one() {
    let out = quadrix(&["spectral", "--p", "2", "--s", "0.5", "--frobnicate", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exponents_table_values() {
    let out = quadrix(&["exponents", "--family", "sl", "--n-max", "4"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("-2/3"));
    assert!(s.contains("-1/2"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args =
        ["discrepancy", "--p", "2", "--s-max", "1", "--samples", "40", "--seed", "11", "--r", "0.4"];
    let a = quadrix(&args);
    let b = quadrix(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn spectral_rows_match_library() {
    let out = quadrix(&["spectral", "--p", "2", "--s", "0.5", "--height-max", "3"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    let rows = quadrix_core::spectral::spectral_sweep(2, 0.5, 3).unwrap();
    for r in &rows {
        let line = s
            .lines()
            .find(|l| l.starts_with(&format!("{},", r.s_height)))
            .expect("row present");
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], r.m_b.to_string());
        assert_eq!(cols[2].parse::<f64>().unwrap(), r.norm);
    }
}

#[test]
fn selftest_passes() {
    let out = quadrix(&["selftest"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("all ok"));
}

#[test]
fn count_emits_json_with_meta() {
    let out = quadrix(&[
        "count", "--form", "sq4", "--h", "2", "--window", "box:-2,-2,-2,-2:2,2,2,2",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["form"], "sq4");
    assert!(v["meta"]["version"].is_string());
    // r_4(4) = 24: the full representation count fits in the box
    assert_eq!(v["count"], "24");
}
