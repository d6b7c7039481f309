//! End-to-end runs of the `tubal-bench` binary.

use std::path::Path;
use std::process::{Command, Output};

use tubal::{Tensor3f64, ObservationMask};
use tubal_bench::io::{read_file, read_tensor, write_mask, write_tensor, TensorFile};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubal-bench")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = bench(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let mut out = vec![r.headers().unwrap().iter().map(String::from).collect()];
    out.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
    out
}

fn column(table: &[Vec<String>], name: &str) -> Vec<String> {
    let c = table[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    table[1..].iter().map(|r| r[c].clone()).collect()
}

fn strip_wall(csv: &str) -> Vec<Vec<String>> {
    let t = rows(csv);
    let c = t[0].iter().position(|h| h == "wall_ms").unwrap();
    t.into_iter().map(|mut r| {
        r.remove(c);
        r
    }).collect()
}

#[test]
fn multiply_study_row_layout() {
    let args = ["bench-multiply", "--n1", "2000", "--n2", "200", "--n3", "5", "--rank", "50", "--slices", "230", "--reps", "10", "--seed", "7"];
    let t = rows(&stdout(&args));
    assert_eq!(t.len(), 1 + 22);
    assert_eq!(t[0], ["experiment", "method", "params", "rep", "seed", "drawn", "rfe", "rse_spec", "wall_ms"]);
    let reps = column(&t, "rep");
    assert_eq!(reps.iter().filter(|r| *r == "-1").count(), 2);
    let methods = column(&t, "method");
    assert_eq!(methods.iter().filter(|m| *m == "uniform").count(), 11);
    assert_eq!(methods.iter().filter(|m| *m == "leverage").count(), 11);
}

#[test]
fn multiply_with_every_slice_is_exact() {
    let t = rows(&stdout(&["bench-multiply", "--n1", "60", "--n2", "20", "--n3", "3", "--rank", "4", "--density", "0.3", "--slices", "60", "--methods", "uniform"]));
    assert_eq!(t.len(), 2);
    let rfe: f64 = column(&t, "rfe")[0].parse().unwrap();
    assert!(rfe <= 1e-12, "rfe {rfe}");
    assert_eq!(column(&t, "drawn")[0], "60");
}

#[test]
fn auto_slice_count() {
    let t = rows(&stdout(&["bench-multiply", "--n1", "80", "--n2", "20", "--n3", "2", "--rank", "6", "--density", "0.3"]));
    assert!(column(&t, "params")[0].contains("slices=11"));
}

#[test]
fn multiply_is_reproducible() {
    let args = ["bench-multiply", "--n1", "200", "--n2", "30", "--n3", "3", "--rank", "5", "--density", "0.1", "--reps", "1", "--seed", "11"];
    assert_eq!(strip_wall(&stdout(&args)), strip_wall(&stdout(&args)));
}

#[test]
fn decompose_configurations() {
    let t = rows(&stdout(&["decompose", "--n1", "60", "--n2", "50", "--n3", "8", "--rank", "5", "--scores", "deterministic,randomized", "--c", "25,35", "--reps", "2"]));
    // 4 configurations x 2 reps + 4 mean rows
    assert_eq!(t.len(), 1 + 12);
    for v in column(&t, "rse_frob") {
        assert!(v.parse::<f64>().unwrap() <= 1e-8);
    }
    let full = rows(&stdout(&["decompose", "--n1", "30", "--n2", "20", "--n3", "3", "--rank", "3", "--noise", "0.2", "--scores", "uniform", "--c", "20", "--methods", "cx,cur", "--l", "30"]));
    for v in column(&full, "rse_frob") {
        assert!(v.parse::<f64>().unwrap() <= 1e-10, "{v}");
    }
}

#[test]
fn decompose_saves_factors() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&["decompose", "--n1", "20", "--n2", "15", "--n3", "2", "--rank", "2", "--methods", "cur", "--scores", "norm", "--c", "6", "--save-dir", dir.path().to_str().unwrap()]);
    for f in ["C", "U", "R"] {
        let t = read_tensor(&dir.path().join(format!("cur-norm-c6-l6_{f}.tns"))).unwrap();
        assert_eq!(t.n3(), 2);
    }
}

#[test]
fn missing_input_is_an_io_error() {
    let out = bench(&["decompose", "--input", "/definitely/missing.tns"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/missing.tns"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bench(&["rpca", "--bogus"]).status.code(), Some(2));
    assert_eq!(bench(&["bench-multiply", "--reps", "0"]).status.code(), Some(2));
    assert_eq!(bench(&["decompose", "--rank", "99", "--n1", "10", "--n2", "10", "--n3", "2"]).status.code(), Some(2));
    assert_eq!(bench(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bench(&["--help"]).status.code(), Some(0));
}

#[test]
fn non_finite_input_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nan.tns");
    let mut bytes = tubal_bench::io::encode_tensor(&Tensor3f64::zeros(2, 2, 1));
    bytes[35..43].copy_from_slice(&f64::NAN.to_le_bytes());
    std::fs::write(&path, bytes).unwrap();
    assert_eq!(bench(&["rpca", "--input", path.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn rpca_full_and_cur_rows() {
    let t = rows(&stdout(&["rpca", "--methods", "full,cur", "--c", "20", "--l", "20", "--seed", "3"]));
    assert_eq!(t.len(), 3);
    assert_eq!(column(&t, "method"), ["full", "cur"]);
    let rse: Vec<f64> = column(&t, "rse_frob").iter().map(|v| v.parse().unwrap()).collect();
    assert!(rse[0] <= 1e-3 && rse[1] <= 5e-2, "{rse:?}");
}

#[test]
fn completion_row() {
    let t = rows(&stdout(&["complete", "--mask-rate", "0.5", "--methods", "full"]));
    let rse: f64 = column(&t, "rse_frob")[0].parse().unwrap();
    assert!(rse <= 1e-2, "{rse}");
}

#[test]
fn rse_column_needs_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let (x, truth, mask) = (dir.path().join("x.tns"), dir.path().join("t.tns"), dir.path().join("m.tns"));
    stdout(&["gen", "--kind", "rpca", "--n1", "20", "--n2", "20", "--n3", "3", "--save", x.to_str().unwrap(), "--truth-out", truth.to_str().unwrap(), "--mask-out", mask.to_str().unwrap()]);
    assert!(matches!(read_file(&mask).unwrap(), TensorFile::Mask(_)));
    let without = rows(&stdout(&["rpca", "--input", x.to_str().unwrap(), "--methods", "full"]));
    assert!(!without[0].contains(&"rse_frob".to_string()));
    for c in ["dl", "de", "feasibility", "iters"] {
        assert!(without[0].contains(&c.to_string()));
    }
    let with = rows(&stdout(&["rpca", "--input", x.to_str().unwrap(), "--truth", truth.to_str().unwrap(), "--methods", "full"]));
    assert!(with[0].contains(&"rse_frob".to_string()));
}

#[test]
fn completion_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let (x, m) = (dir.path().join("x.tns"), dir.path().join("m.tns"));
    stdout(&["gen", "--kind", "lowrank", "--n1", "20", "--n2", "20", "--n3", "3", "--save", x.to_str().unwrap()]);
    stdout(&["gen", "--kind", "mask", "--n1", "20", "--n2", "20", "--n3", "3", "--rate", "0.7", "--save", m.to_str().unwrap()]);
    let t = rows(&stdout(&["complete", "--input", x.to_str().unwrap(), "--mask", m.to_str().unwrap(), "--methods", "full,cur", "--c", "10", "--l", "10"]));
    assert_eq!(t.len(), 3);
    assert_eq!(bench(&["complete", "--input", x.to_str().unwrap()]).status.code(), Some(2));
    let wrong = dir.path().join("w.tns");
    write_mask(&wrong, &ObservationMask::full((3, 3, 3)).unwrap()).unwrap();
    assert_eq!(bench(&["complete", "--input", x.to_str().unwrap(), "--mask", wrong.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn json_mirrors_csv_keys() {
    let args = ["decompose", "--n1", "20", "--n2", "15", "--n3", "2", "--rank", "2", "--c", "8", "--scores", "uniform"];
    let header = rows(&stdout(&args))[0].clone();
    let json = stdout(&[&args[..], &["--format", "json"]].concat());
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let keys: Vec<String> = v[0].as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, header);
}

#[test]
fn metrics_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let printed = stdout(&["gen", "--kind", "gaussian", "--n1", "3", "--n2", "3", "--n3", "2", "--save", dir.path().join("g.tns").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(printed.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("experiment,method,params,rep,seed,nonzeros"));
    assert_eq!(bench(&["gen", "--kind", "gaussian", "--save", "/definitely/missing/dir/g.tns"]).status.code(), Some(3));
}

#[test]
fn tensor_file_roundtrip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.tns");
    let x = tubal::gen_gaussian::<f64>(4, 5, 3, 99).scale(1e-300);
    write_tensor(&p, &x).unwrap();
    let y = read_tensor(&p).unwrap();
    assert!(x.data().iter().zip(y.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    let bytes = std::fs::read(&p).unwrap();
    std::fs::write(&p, &bytes[..bytes.len() - 1]).unwrap();
    assert!(matches!(read_tensor(&p), Err(tubal_bench::BenchError::Format { .. })));
    assert_eq!(bench(&["rpca", "--input", p.to_str().unwrap()]).status.code(), Some(3));
}

fn write_pgm(path: &Path, w: usize, h: usize, px: &[u8]) {
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend_from_slice(px);
    std::fs::write(path, bytes).unwrap();
}

#[test]
fn pgm_stack_conversion() {
    let dir = tempfile::tempdir().unwrap();
    write_pgm(&dir.path().join("b.pgm"), 2, 2, &[5, 6, 7, 8]);
    write_pgm(&dir.path().join("a.pgm"), 2, 2, &[0, 1, 2, 255]);
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let out = dir.path().join("s.tns");
    stdout(&["convert-pgm", "--dir", dir.path().to_str().unwrap(), "--save", out.to_str().unwrap()]);
    let t = read_tensor(&out).unwrap();
    assert_eq!(t.dims(), (2, 2, 2));
    // frame "a" first, row-major pixels: (row, col)
    assert_eq!(t[(0, 1, 0)], 1.0 / 255.0);
    assert_eq!(t[(1, 0, 0)], 2.0 / 255.0);
    assert_eq!(t[(1, 1, 0)], 1.0);
    assert_eq!(t[(0, 0, 1)], 5.0 / 255.0);
    stdout(&["convert-pgm", "--dir", dir.path().to_str().unwrap(), "--layout", "lateral", "--save", out.to_str().unwrap()]);
    let l = read_tensor(&out).unwrap();
    assert_eq!(l[(1, 1, 0)], 7.0 / 255.0);
    assert_eq!(l[(1, 0, 1)], 1.0);

    write_pgm(&dir.path().join("c.pgm"), 3, 1, &[1, 2, 3]);
    let bad = bench(&["convert-pgm", "--dir", dir.path().to_str().unwrap(), "--save", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("c.pgm"));
}

fn determinism_case(args: &[&str]) {
    let one = strip_wall(&stdout(&[args, &["--threads", "1"]].concat()));
    let again = strip_wall(&stdout(&[args, &["--threads", "1"]].concat()));
    let four = strip_wall(&stdout(&[args, &["--threads", "4"]].concat()));
    assert_eq!(one, again, "{args:?}");
    assert_eq!(one, four, "{args:?}");
}

#[test]
fn commands_are_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.tns");
    determinism_case(&["bench-multiply", "--n1", "300", "--n2", "40", "--n3", "4", "--rank", "6", "--density", "0.1", "--reps", "2", "--seed", "5"]);
    determinism_case(&["decompose", "--n1", "30", "--n2", "20", "--n3", "4", "--rank", "3", "--noise", "0.1", "--methods", "cx,cur", "--scores", "deterministic,randomized,norm", "--c", "8", "--seed", "2"]);
    determinism_case(&["rpca", "--n1", "24", "--n2", "24", "--n3", "4", "--c", "10", "--l", "10", "--seed", "4"]);
    determinism_case(&["complete", "--n1", "24", "--n2", "24", "--n3", "4", "--c", "10", "--l", "10", "--seed", "4"]);
    determinism_case(&["gen", "--kind", "rpca", "--n1", "10", "--n2", "10", "--n3", "3", "--save", g.to_str().unwrap(), "--seed", "9"]);
}
