use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nqtensor(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nqtensor"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `computed` column of the row named `quantity`.
fn field(report: &str, quantity: &str) -> String {
    report
        .lines()
        .find(|l| l.split('\t').next() == Some(quantity))
        .unwrap_or_else(|| panic!("no row {quantity} in\n{report}"))
        .split('\t')
        .nth(1)
        .unwrap()
        .to_string()
}

#[test]
fn build_writes_tensor_and_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let o = nqtensor(dir.path(), &["build", "--function", "eq", "--n", "1", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tsr = fs::read_to_string(dir.path().join("eq_1_3.tsr")).unwrap();
    assert_eq!(tsr, "3\n2 2 2\n0 0 0 1/1 0/1\n1 1 1 1/1 0/1\n");
    let dec = fs::read_to_string(dir.path().join("eq_1_3.dec")).unwrap();
    assert!(dec.starts_with("3 2 2 2 2\n"));
    assert_eq!(dec.lines().count(), 1 + 2 * 3);
    assert_eq!(field(&stdout(&o), "term_count"), "2");
    assert_eq!(fs::read_to_string(dir.path().join("build.tsv")).unwrap(), stdout(&o));
}

#[test]
fn gip_certificate_reports_both_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = nqtensor(dir.path(), &["gip-cert", "--n", "2", "--k", "3"]);
    let report = stdout(&o);
    assert_eq!(field(&report, "rank_T_prime"), "3");
    assert_eq!(field(&report, "summation_bound"), "4");
    // the unfolding row is a checked quantity and falls short of the bound
    assert_eq!(field(&report, "mode1_rank_ge_summation_bound"), "3");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAIL mode1_rank_ge_summation_bound"));
}

#[test]
fn nof_sweep_for_hamming() {
    let dir = tempfile::tempdir().unwrap();
    let o = nqtensor(dir.path(), &["protocol", "nof", "--function", "hamming_neq1", "--n", "2", "--k", "3", "--sweep"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    assert_eq!(field(&report, "qubit_cost"), "3");
    assert_eq!(field(&report, "wrong_decisions"), "0");

    let sweep = nqtensor(dir.path(), &["protocol", "sweep", "--function", "hamming_neq1", "--n", "2", "--k", "3"]);
    assert_eq!(sweep.status.code(), Some(0));
}

#[test]
fn single_input_run_and_dummy_choice() {
    let dir = tempfile::tempdir().unwrap();
    for dummy in ["0", "1"] {
        let o = nqtensor(
            dir.path(),
            &["protocol", "nof", "--function", "eq", "--n", "1", "--k", "3", "--x", "1,1,1", "--lift-dummy", dummy],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(field(&stdout(&o), "decision"), "1");
    }
    let bad = nqtensor(dir.path(), &["protocol", "nof", "--function", "eq", "--n", "1", "--k", "3", "--lift-dummy", "2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn nih_extract_writes_grouped_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = nqtensor(dir.path(), &["nih-extract", "--n", "1", "--k", "3", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "grouped_rank_le_family_size"), "2");
    let mat = fs::read_to_string(dir.path().join("eq_1_3_grouped.mat")).unwrap();
    assert!(mat.starts_with("2 4\n"));
}

#[test]
fn nih_extract_from_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("const.scn");
    fs::write(&scenario, "mode nih\nplayers 3\nbits 1\ndims 2 2 2\nturn 1 channel-not\n").unwrap();
    let o = nqtensor(
        dir.path(),
        &["nih-extract", "--scenario", scenario.to_str().unwrap(), "--function", "const1"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    fs::write(&scenario, "mode nih\nbits 1\ndims 2 2 2\nturn 1 write-bit slot=0 src=2 bit=1\n").unwrap();
    let o = nqtensor(dir.path(), &["nih-extract", "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn rank_and_unfold_from_files() {
    let dir = tempfile::tempdir().unwrap();
    nqtensor(dir.path(), &["build", "--function", "hamming_neq1", "--n", "2", "--k", "3"]);
    let tsr = dir.path().join("hamming_neq1_2_3.tsr");
    let dec = dir.path().join("hamming_neq1_2_3.dec");
    let o = nqtensor(dir.path(), &["rank", "--input", tsr.to_str().unwrap(), "--dec", dec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "bracket_lower_le_upper"), "[3,3]");

    let u = nqtensor(dir.path(), &["unfold", "--function", "eq", "--n", "1", "--k", "3", "--mode", "2"]);
    assert_eq!(u.status.code(), Some(0));
    let mat = fs::read_to_string(dir.path().join("eq_1_3_mode2.mat")).unwrap();
    assert!(mat.starts_with("2 4\n"));
}

#[test]
fn truth_table_input() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("and.txt");
    fs::write(&table, "0 0 0\n0 1 0\n1 0 0\n1 1 1\n").unwrap();
    let o = nqtensor(dir.path(), &["build", "--truth-table", table.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("and_1_2.tsr").exists());

    fs::write(&table, "0 0 0\n0 1 0\n1 0 2\n").unwrap();
    let o = nqtensor(dir.path(), &["build", "--truth-table", table.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"));
}

#[test]
fn probe_reports_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let o = nqtensor(dir.path(), &["probe", "--function", "eq", "--n", "1", "--k", "3", "--trials", "10", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "probe_min_lower_bound"), "2");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nqtensor(dir.path(), &["build", "--function", "nope", "--n", "1", "--k", "3"]).status.code(), Some(2));
    assert_eq!(nqtensor(dir.path(), &["build", "--function", "eq", "--k", "3"]).status.code(), Some(2));
    assert_eq!(nqtensor(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(nqtensor(dir.path(), &["gip-cert", "--n", "1", "--k", "3"]).status.code(), Some(2));
}

#[test]
fn corrupted_tensor_is_a_usage_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsr");
    fs::write(&bad, "3\n2 2 2\n0 0 0 1/1 0/1\n1 1 1 1/0 0/1\n").unwrap();
    let o = nqtensor(dir.path(), &["verify-all", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    let o = nqtensor(dir.path(), &["rank", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_all_skips_degenerate_gip_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = nqtensor(dir.path(), &["verify-all", "--n", "1", "--k", "3", "--seed", "4"]);
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("criterion 3 SKIP")), "{out}");
    assert!(out.contains("criterion_3.gip_certificate\t(1,3) skipped"));
}

#[test]
fn verify_all_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = nqtensor(a.path(), &["verify-all", "--seed", "9"]);
    let second = nqtensor(b.path(), &["verify-all", "--seed", "9"]);
    assert_eq!(first.status.code(), second.status.code());
    let ra = fs::read(a.path().join("verify_all.tsv")).unwrap();
    let rb = fs::read(b.path().join("verify_all.tsv")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(first.stdout, second.stdout);
    for id in 1..=10 {
        assert!(stdout(&first).lines().any(|l| l.starts_with(&format!("criterion {id} "))));
    }
}
