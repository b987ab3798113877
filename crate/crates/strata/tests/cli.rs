//! End-to-end runs of the command line binary: closed-form examples, exit
//! codes, certificate round trips, and byte-level determinism.

use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::Command;

use strata::field::Field;
use strata::support::SupportSet;
use strata::tensor::Tensor;

fn tmp_dir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_raw(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_strata")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn run(args: &[&str]) -> (i32, Value) {
    let (code, stdout) = run_raw(args);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["schema"], "v1");
    (code, v)
}

fn write_json(path: &Path, v: &Value) {
    std::fs::write(path, serde_json::to_string(v).unwrap()).unwrap();
}

fn diag2_path(dir: &Path) -> String {
    let f = Field::prime(5).unwrap();
    let t = Tensor::diagonal(&f, 2, 3);
    let p = dir.join("diag2.json");
    write_json(&p, &t.to_json());
    p.to_str().unwrap().to_string()
}

fn unstable_path(dir: &Path) -> String {
    let f = Field::prime(5).unwrap();
    let mut t = Tensor::zeros(&f, vec![2, 2, 1]).unwrap();
    t.set(&[0, 0, 0], f.one());
    let p = dir.join("unstable.json");
    write_json(&p, &t.to_json());
    p.to_str().unwrap().to_string()
}

#[test]
fn zeta_reproduces_the_matmul_closed_form() {
    let dir = tmp_dir("zeta");
    let f = Field::prime(5).unwrap();
    let t = Tensor::matrix_mult(&f, 2, 3, 4).unwrap();
    let p = dir.join("mm_2_3_4.json");
    write_json(&p, &t.to_json());
    let (code, v) = run(&["zeta", p.to_str().unwrap(), "--rho", "1/2", "--mode", "3"]);
    assert_eq!(code, 0);
    let want = 3.0 * 8.0f64.sqrt();
    assert!((v["result"]["value"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(v["result"]["blocks"], json!([[6, 12]]));
    assert_eq!(v["options"]["rho"], "1/2");
}

#[test]
fn acr_on_the_split_diagonal_pair() {
    let dir = tmp_dir("acr");
    let f = Field::prime(7).unwrap();
    let t = Tensor::matrix_mult(&f, 3, 1, 1)
        .unwrap()
        .direct_sum(&Tensor::matrix_mult(&f, 1, 1, 3).unwrap())
        .unwrap();
    let p = dir.join("diag_sum.json");
    write_json(&p, &t.to_json());
    let (code, v) = run(&["acr", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!((v["result"]["value"].as_f64().unwrap() - 2.0 * 3.0f64.sqrt()).abs() < 1e-9);
    assert!((v["result"]["argmin_rho"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn extraction_certificates_round_trip_and_reject_tampering() {
    let dir = tmp_dir("verify");
    let tensor = diag2_path(&dir);
    let (code, v) = run(&["compress", &tensor, "--power", "2", "--rho", "1/2"]);
    assert_eq!(code, 0);
    assert!((v["result"]["bound"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let ext = dir.join("ext.json");
    write_json(&ext, &v["result"]["extraction"]);
    let (code, v) = run(&["verify", ext.to_str().unwrap(), &tensor, "--rho", "1/2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["verified"], true);
    assert!((v["result"]["bound"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let mut bad: Value =
        serde_json::from_str(&std::fs::read_to_string(&ext).unwrap()).unwrap();
    bad["maps"][0][0][0] = if bad["maps"][0][0][0] == "0" { json!("1") } else { json!("0") };
    let ext_bad = dir.join("ext_bad.json");
    write_json(&ext_bad, &bad);
    let (code, v) = run(&["verify", ext_bad.to_str().unwrap(), &tensor]);
    assert_eq!(code, 3);
    assert!(v["error"].as_str().unwrap().contains("rejected"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tmp_dir("determinism");
    let tensor = diag2_path(&dir);
    let first = run_raw(&["hn", &tensor]);
    let second = run_raw(&["hn", &tensor]);
    assert_eq!(first.0, 0);
    assert_eq!(first, second);
    let a = run_raw(&["acr", &tensor, "--seed", "123"]);
    let b = run_raw(&["acr", &tensor, "--seed", "123"]);
    assert_eq!(a, b);
}

#[test]
fn invalid_inputs_exit_two() {
    let dir = tmp_dir("invalid");
    let (code, v) = run(&["hn", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(v["error"].as_str().unwrap().contains("missing.json"));

    let garbage = dir.join("garbage.json");
    std::fs::write(&garbage, "not json").unwrap();
    assert_eq!(run(&["hn", garbage.to_str().unwrap()]).0, 2);

    let wrong = dir.join("wrong.json");
    std::fs::write(&wrong, "{\"a\": 1}").unwrap();
    assert_eq!(run(&["acr", wrong.to_str().unwrap()]).0, 2);

    let tensor = diag2_path(&dir);
    assert_eq!(run(&["zeta", &tensor, "--rho", "3/2"]).0, 2);

    let unstable = unstable_path(&dir);
    assert_eq!(run(&["compress", &unstable, "--p", "1"]).0, 2);

    assert_eq!(run(&["lab", "nonsense"]).0, 2);
}

#[test]
fn balance_reports_distributions_and_violators() {
    let dir = tmp_dir("balance");
    let phi = SupportSet::new(vec![2, 2], vec![vec![0, 0], vec![1, 1]]).unwrap();
    let good = dir.join("diag.json");
    write_json(&good, &phi.to_json());
    let (code, v) = run(&["balance", good.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["balanced"], true);
    let dist = v["result"]["distribution"].as_array().unwrap();
    assert_eq!(dist.len(), 2);
    assert!(dist.iter().all(|e| e["weight"] == "1/2"));

    let phi = SupportSet::new(vec![2, 2], vec![vec![0, 0], vec![0, 1]]).unwrap();
    let bad = dir.join("row.json");
    write_json(&bad, &phi.to_json());
    let (code, v) = run(&["balance", bad.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["balanced"], false);
    assert_eq!(v["result"]["violator"], json!([2]));
}

#[test]
fn entropy_exact_and_iterative_agree() {
    let dir = tmp_dir("entropy");
    let phi = SupportSet::new(vec![2, 2], vec![vec![0, 0], vec![1, 1]]).unwrap();
    let p = dir.join("diag.json");
    write_json(&p, &phi.to_json());
    let (code, v) = run(&["entropy", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!((v["result"]["exact"]["bits"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["result"]["iterative"]["converged"], true);
    assert_eq!(v["result"]["agree"], true);
}

#[test]
fn cr_sandwich_on_matmul() {
    let dir = tmp_dir("cr");
    let f = Field::prime(1009).unwrap();
    let t = Tensor::matrix_mult(&f, 2, 2, 2).unwrap();
    let p = dir.join("mm222.json");
    write_json(&p, &t.to_json());
    let (code, v) = run(&["cr", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["cr"], 4);
    assert_eq!(v["result"]["ncr"], 4);
    assert_eq!(v["result"]["sandwich"], true);
    assert_eq!(v["result"]["method"]["kind"], "exact");
}

#[test]
fn lab_families_report_their_closed_forms() {
    let (code, v) = run(&["lab", "gap", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["power_value"], "59049");
    assert_eq!(v["result"]["best_term"], "8064");
    assert_eq!(v["result"]["best_k"], 5);
    assert_eq!(v["result"]["within_exponential_bound"], true);
    assert_eq!(v["result"]["strict_gap"], true);

    let (code, v) = run(&["lab", "cycle", "2", "3", "1", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["flow"], 2);
    assert_eq!(v["result"]["matches"], true);

    let (code, v) = run(&["lab", "tpq", "4", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["separated"], false);
    assert!((v["result"]["acr12"].as_f64().unwrap() - 8.0).abs() < 1e-9);
    assert!((v["result"]["acr34"].as_f64().unwrap() - 8.0).abs() < 1e-9);
}

#[test]
fn compress_and_shift_emit_verified_certificates() {
    let dir = tmp_dir("compress");
    let tensor = diag2_path(&dir);
    let (code, v) = run(&["compress", &tensor, "--p", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["verified"], true);
    assert_eq!(v["result"]["meets_floor"], true);
    assert!(v["result"]["lambda"].as_u64().unwrap() >= 1);

    let (code, v) = run(&["shift", &tensor]);
    assert_eq!(code, 0);
    let lambdas: Vec<u64> =
        v["result"]["lambdas"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert!(!lambdas.is_empty());
    assert!(lambdas.windows(2).all(|w| w[0] >= w[1]));
    assert!(lambdas[0] >= 1);
    assert_eq!(lambdas.iter().sum::<u64>(), 2);
}

#[test]
fn semistability_verdicts_carry_witnesses() {
    let dir = tmp_dir("semistable");
    let tensor = diag2_path(&dir);
    let (code, v) = run(&["semistable", &tensor]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["semistable"], true);

    let unstable = unstable_path(&dir);
    let (code, v) = run(&["semistable", &unstable]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["semistable"], false);
    assert_eq!(v["result"]["witness"]["dim"], 1);
    assert!(v["result"]["deficiency"].as_u64().unwrap() >= 1);
}

#[test]
fn gauge_reports_flattening_ranks() {
    let dir = tmp_dir("gauge");
    let f = Field::prime(5).unwrap();
    let t = Tensor::matrix_mult(&f, 2, 3, 4).unwrap();
    let p = dir.join("mm.json");
    write_json(&p, &t.to_json());
    let (code, v) = run(&["gauge", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["ranks"], json!([6, 12, 8]));
}
