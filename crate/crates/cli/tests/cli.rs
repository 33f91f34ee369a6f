use std::path::{Path, PathBuf};
use std::process::Command;

use mpdo_core::linalg::CMat;
use mpdo_core::nonneg::slack_matrix_tgon;
use mpdo_core::sampling;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mpdo-kit"))
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", self.stdout))
    }
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = bin();
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn real_json(rows: &[Vec<f64>]) -> String {
    json!({ "rows": rows.len(), "cols": rows[0].len(), "data": rows }).to_string()
}

fn complex_json(m: &CMat) -> Value {
    let data: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!({ "rows": m.nrows(), "cols": m.ncols(), "data": data })
}

fn quantity<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["quantities"]
        .as_array()
        .unwrap()
        .iter()
        .find(|q| q["name"] == name)
        .unwrap_or_else(|| panic!("no quantity {name} in {report}"))
}

fn column(report: &Value, name: &str) -> Vec<Value> {
    let cols = report["table"]["columns"].as_array().unwrap();
    let k = cols.iter().position(|c| c == name).unwrap();
    report["table"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[k].clone())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_embedded_identity() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "sigma.json",
        &real_json(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ]),
    );
    let r = run(&["analyze", path_str(&f), "--json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.json();
    assert_eq!(rep["schema"], "mpdo-kit/1");
    assert_eq!(quantity(&rep, "osr")["value"], 2);
    assert_eq!(quantity(&rep, "osr")["certificate"], "mpo");
    assert_eq!(quantity(&rep, "puri_rank")["interval"], json!([2, 2]));
    assert_eq!(quantity(&rep, "sep_rank")["interval"], json!([2, 2]));
    assert!(rep["checks"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn analyze_bell_projector() {
    let dir = TempDir::new().unwrap();
    let h = 0.5;
    let f = write(
        dir.path(),
        "bell.json",
        &real_json(&[
            vec![h, 0.0, 0.0, h],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![h, 0.0, 0.0, h],
        ]),
    );
    let rep = run(&["analyze", path_str(&f), "--json"]).json();
    assert_eq!(quantity(&rep, "osr")["value"], 4);
    assert_eq!(quantity(&rep, "puri_rank")["interval"], json!([2, 2]));
}

#[test]
fn analyze_product_state() {
    let dir = TempDir::new().unwrap();
    // |0><0| (x) |+><+| with complex-pair entries
    let f = write(
        dir.path(),
        "prod.json",
        r#"{"rows":4,"cols":4,"data":[[[0.5,0],[0.5,0],0,0],[[0.5,0],[0.5,0],0,0],[0,0,0,0],[0,0,0,0]]}"#,
    );
    let rep = run(&["analyze", path_str(&f), "--json"]).json();
    assert_eq!(quantity(&rep, "osr")["value"], 1);
    assert_eq!(quantity(&rep, "puri_rank")["interval"], json!([1, 1]));
    assert_eq!(quantity(&rep, "q_sqrt_rank")["value"], 1);
    assert_eq!(quantity(&rep, "sep_rank")["value"], 1);
}

#[test]
fn analyze_parse_error_names_byte_offset() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "bad.json", r#"{"rows":2,"cols":2,"data":[[1,0],[0,1]"#);
    let r = run(&["analyze", path_str(&f)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("byte offset"), "{}", r.stderr);
}

#[test]
fn analyze_rejects_inconsistent_sites() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "id.csv", "1,0,0\n0,1,0\n0,0,1\n");
    assert_eq!(run(&["analyze", path_str(&f)]).code, 2);
    assert_eq!(run(&["analyze", path_str(&f), "--sites", "2,2"]).code, 2);
    let r = run(&["analyze", path_str(&f), "--sites", "3", "--json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(quantity(&r.json(), "osr")["value"], 1);
}

#[test]
fn factorize_cp_rejects_swap() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "swap.csv", "0,1\n1,0\n");
    let r = run(&["factorize", "--kind", "cp", path_str(&f), "--json"]);
    assert_eq!(r.code, 3);
    let rep = r.json();
    assert_eq!(rep["status"], "rejected");
    assert!(rep["notes"][0].as_str().unwrap().contains("not psd"));
}

#[test]
fn factorize_sqrt_of_swap() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "swap.csv", "0,1\n1,0\n");
    let r = run(&["factorize", "--kind", "sqrt", path_str(&f), "--json"]);
    assert_eq!(r.code, 0);
    let rep = r.json();
    assert_eq!(quantity(&rep, "sqrt_rank")["value"], 2);
    assert_eq!(rep["certificates"]["factor"]["kind"], "sqrt");
}

#[test]
fn factorize_minimal_slack_matrix() {
    let dir = TempDir::new().unwrap();
    let s = slack_matrix_tgon(20).unwrap();
    let rows: Vec<Vec<f64>> = (0..20).map(|i| (0..20).map(|j| s.get(i, j)).collect()).collect();
    let f = write(dir.path(), "s20.json", &real_json(&rows));
    let rep = run(&["factorize", "--kind", "minimal", path_str(&f), "--json"]).json();
    assert_eq!(quantity(&rep, "minimal_rank")["value"], 3);
}

#[test]
fn factorize_every_kind_on_a_small_matrix() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "m.csv", "2,1\n1,2\n");
    for kind in ["minimal", "nonneg", "psd", "symmetric", "cp", "cpsdt", "sqrt"] {
        let r = run(&["factorize", "--kind", kind, path_str(&f), "--json"]);
        assert_eq!(r.code, 0, "{kind}: {}", r.stderr);
        let rep = r.json();
        assert!(
            rep["checks"].as_array().unwrap().iter().all(|c| c["holds"] == true),
            "{kind}: {rep}"
        );
    }
    let r = run(&["factorize", "--kind", "bogus", path_str(&f)]);
    assert_eq!(r.code, 2);
}

#[test]
fn factorize_search_exhaustion_exits_one() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "id.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let r = run(&["factorize", "--kind", "nonneg", "--r", "2", "--restarts", "2", "--iters", "50", path_str(&f)]);
    assert_eq!(r.code, 1, "{}", r.stderr);
}

#[test]
fn convert_planted_psd_factorization() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let planted = sampling::planted_psd(&mut rng, 3, 4, 2);
    let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..4).map(|j| planted.m.get(i, j)).collect()).collect();
    let m = write(dir.path(), "m.json", &real_json(&rows));
    let cert = json!({
        "kind": "psd",
        "inner_dim": 2,
        "payload": {
            "e": planted.e.iter().map(complex_json).collect::<Vec<_>>(),
            "f": planted.f.iter().map(complex_json).collect::<Vec<_>>(),
        }
    });
    let c = write(dir.path(), "cert.json", &cert.to_string());
    let r = run(&["convert", "--kind", "iii", path_str(&m), "--factor", path_str(&c), "--json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.json();
    assert_eq!(rep["certificates"]["state"]["type"], "purification");
    assert_eq!(rep["certificates"]["state"]["inner_dim"], 2);
    assert_eq!(quantity(&rep, "state_inner_dim")["value"], 2);
    assert!(quantity(&rep, "state_inner_dim")["residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn convert_rank_both_directions() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m = sampling::random_nonneg(&mut rng, 3, 3);
    let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| m.get(i, j)).collect()).collect();
    let mf = write(dir.path(), "m.json", &real_json(&rows));
    let r = run(&["convert", "--kind", "i", path_str(&mf), "--json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["verdict"], "exact-match");

    let sigma = mpdo_core::correspondence::diag_embed(&m);
    let sf = write(dir.path(), "sigma.json", &complex_json(sigma.data()).to_string());
    let r = run(&[
        "convert",
        "--kind",
        "i",
        "--direction",
        "state-to-matrix",
        path_str(&sf),
        "--json",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.json();
    assert_eq!(rep["verdict"], "exact-match");
    assert_eq!(quantity(&rep, "factor_inner_dim")["value"], 3);
}

#[test]
fn convert_preconditions() {
    let dir = TempDir::new().unwrap();
    let asym = write(dir.path(), "asym.csv", "1,2\n0,1\n");
    assert_eq!(run(&["convert", "--kind", "iv", path_str(&asym)]).code, 2);
    let bell = write(
        dir.path(),
        "bell.json",
        &real_json(&[
            vec![0.5, 0.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0, 0.5],
        ]),
    );
    let r = run(&["convert", "--kind", "i", "--direction", "state-to-matrix", path_str(&bell)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("not diagonal"));
}

#[test]
fn experiment_wstate() {
    let rep = run(&["experiment", "wstate", "--n", "4..9", "--json"]).json();
    let ns = column(&rep, "n");
    assert_eq!(ns.len(), 6);
    for (k, n) in ns.iter().enumerate() {
        let n = n.as_u64().unwrap() as usize;
        assert!(column(&rep, "open_residual")[k].as_f64().unwrap() <= 1e-12);
        assert!(column(&rep, "cyclic_residual")[k].as_f64().unwrap() <= 1e-12);
        assert_eq!(column(&rep, "periodic")[k], true);
        let bound = column(&rep, "ti_lower_bound")[k].as_u64().unwrap() as usize;
        assert!(bound * bound >= n && (bound - 1) * (bound - 1) < n);
    }
}

#[test]
fn experiment_tgon() {
    let rep = run(&["experiment", "tgon", "--t", "3..50", "--json"]).json();
    let ranks = column(&rep, "rank");
    assert_eq!(ranks.len(), 48);
    assert!(ranks.iter().all(|r| r == 3));
}

#[test]
fn experiment_mixedw_pair() {
    let rep = run(&["experiment", "mixedw", "--n", "2", "--json"]).json();
    assert_eq!(column(&rep, "sep_bond"), vec![json!(2)]);
    assert_eq!(column(&rep, "certificate_scale")[0].as_f64().unwrap(), 2.0);
    assert_eq!(column(&rep, "diagonal"), vec![json!(true)]);
}

#[test]
fn experiment_unknown_name() {
    let r = run(&["experiment", "nope"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("unknown experiment"));
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn reports_are_deterministic_given_seed() {
    let args = ["experiment", "bounds", "--n", "2..3", "--samples", "8", "--seed", "7", "--json"];
    let a = run(&args);
    let b = run_env(&args, &[("MPDO_KIT_THREADS", "1")]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(b.code, 0, "{}", b.stderr);
    assert_eq!(without_timestamp(a.json()), without_timestamp(b.json()));
    assert_eq!(a.json()["seed"], 7);

    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "m.csv", "1,0.5,0.2\n0.3,1,0.7\n0.9,0.1,1\n");
    let fa = ["factorize", "--kind", "nonneg", "--r", "3", "--seed", "3", path_str(&f), "--json"];
    let x = run(&fa);
    let y = run_env(&fa, &[("MPDO_KIT_THREADS", "2")]);
    assert_eq!(without_timestamp(x.json()), without_timestamp(y.json()));
}

#[test]
fn invalid_thread_count_is_a_usage_error() {
    let r = run_env(&["experiment", "tgon", "--t", "3"], &[("MPDO_KIT_THREADS", "zero")]);
    assert_eq!(r.code, 2);
}
