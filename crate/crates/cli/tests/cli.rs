use std::path::Path;
use std::process::{Command, Output};

fn ichan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ichan")).args(args).output().expect("binary runs")
}

fn lsp_args<'a>(out: &'a str, freq: &'a str) -> Vec<&'a str> {
    vec![
        "generate-lsp", "--condition", "LOS", "--freq-ghz", freq, "--tx-pos", "0,-20", "--track", "5,0;65,0",
        "--spacing", "1", "--seed", "7", "--tx-height", "5", "--out", out,
    ]
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_string)
        .collect()
}

#[test]
fn generate_lsp_is_byte_identical_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(ichan(&lsp_args(a.to_str().unwrap(), "5.4")).status.success());
    assert!(ichan(&lsp_args(b.to_str().unwrap(), "5.4")).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(data_rows(&a).len(), 61);
    let text = std::fs::read_to_string(&a).unwrap();
    for key in ["# scenario = industrial_combined LOS", "# seed = 7", "# version = "] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn fixed_link_path_loss_column_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pl.csv");
    let status = ichan(&[
        "generate-lsp", "--condition", "LOS", "--freq-ghz", "3.5", "--tx-track", "0,0;0,10", "--track", "50,0;50,10",
        "--out", out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 11);
    for r in rows {
        let pl: f64 = r.split(',').nth(6).unwrap().parse().unwrap();
        assert!((pl - 78.0).abs() <= 0.1, "{pl}");
    }
}

#[test]
fn single_position_gives_one_cir_block() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cir.txt");
    let run = || {
        ichan(&[
            "generate-cir", "--condition", "NLOS", "--tx-pos", "0,0", "--track", "30,4", "--bandwidth-hz", "200e6",
            "--seed", "3", "--out", out.to_str().unwrap(),
        ])
    };
    assert!(run().status.success());
    let first = std::fs::read(&out).unwrap();
    assert!(run().status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.matches("[snapshot ").count(), 1);
    assert!(text.contains("# scenario_sha256 = "));
    assert_eq!(text.lines().filter(|l| l.starts_with("path ")).count(), 25);
    assert!(text.lines().filter(|l| l.starts_with("tap ")).count() >= 840);
}

#[test]
fn fit_round_trip_writes_a_loadable_fragment() {
    let dir = tempfile::tempdir().unwrap();
    let low = dir.path().join("low.csv");
    let high = dir.path().join("high.csv");
    assert!(ichan(&lsp_args(low.to_str().unwrap(), "2.37")).status.success());
    assert!(ichan(&lsp_args(high.to_str().unwrap(), "5.4")).status.success());
    let frag = dir.path().join("fit.scn");
    let report = dir.path().join("fit.txt");
    let out = ichan(&[
        "fit", "--input", low.to_str().unwrap(), "--input", high.to_str().unwrap(), "--out",
        frag.to_str().unwrap(), "--report", report.to_str().unwrap(),
    ]);
    // One TX height only, so the height terms that are free cannot be fitted.
    let report = std::fs::read_to_string(report).unwrap();
    assert!(report.contains("[LOS] 122 records"), "{report}");
    assert!(report.contains("tx_height"), "{report}");
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(frag).unwrap();
    assert!(text.starts_with("name = industrial_combined_fit"));
    let generated = Command::new(env!("CARGO_BIN_EXE_ichan"))
        .args(["generate-lsp", "--scenario", dir.path().join("fit.scn").to_str().unwrap()])
        .args(["--condition", "LOS", "--tx-pos", "0,0", "--track", "10,0"])
        .output()
        .unwrap();
    assert!(generated.status.success(), "{}", String::from_utf8_lossy(&generated.stderr));
}

#[test]
fn single_frequency_fit_reports_the_frequency_term() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one.csv");
    assert!(ichan(&lsp_args(csv.to_str().unwrap(), "5.4")).status.success());
    let out = ichan(&["fit", "--input", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("frequency"), "{stderr}");
}

#[test]
fn empty_csv_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "").unwrap();
    let out = ichan(&["fit", "--input", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "position_x,position_y\n1,2\n").unwrap();
    let out = ichan(&["fit", "--input", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("f_ghz"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(ichan(&["generate-lsp", "--track", "1,1"]).status.code(), Some(2));
    let bad = ichan(&["generate-lsp", "--condition", "LOS", "--tx-pos", "0,0", "--track", "0,0"]);
    assert_eq!(bad.status.code(), Some(2));
    let scenario = ichan(&["generate-lsp", "--scenario", "warehouse", "--condition", "LOS", "--tx-pos", "0,0", "--track", "5,0"]);
    assert_eq!(scenario.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&scenario.stderr).contains("warehouse"));
    let paths = ichan(&["generate-cir", "--condition", "LOS", "--tx-pos", "0,0", "--track", "5,0", "--paths", "1"]);
    assert_eq!(paths.status.code(), Some(2));
}
