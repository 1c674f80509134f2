use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cils::fixtures::example1;
use cils::instance_file::{
    instance_to_json, load_instance, load_planted, parse_instance, planted_path,
};
use cils::{Alphabet, IntMatrix, ProblemInstance, RealMatrix};
use tempfile::TempDir;

fn cils(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cils"))
        .args(args)
        .env_remove("CILS_ORACLE_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_instance(dir: &TempDir, name: &str, inst: &ProblemInstance) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, instance_to_json(inst).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut args = vec![
        "gen",
        "--rows",
        "2",
        "--cols",
        "5",
        "--m",
        "3",
        "--out",
        s(&path),
    ];
    args.extend_from_slice(extra);
    let out = cils(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn solve_example_prints_x_a() {
    let dir = TempDir::new().unwrap();
    let path = write_instance(&dir, "ex.json", &example1().instance);
    let out = cils(&["solve", s(&path)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(
        text.contains("1 1 -1 -1 0 0 0\n0 -1 -1 1 1 0 0\n0 1 0 1 0 -1 -1\n"),
        "{text}"
    );
    assert!(text.contains("objective = "));
}

#[test]
fn solve_json_and_stats() {
    let dir = TempDir::new().unwrap();
    let path = write_instance(&dir, "ex.json", &example1().instance);
    let out = cils(&["solve", s(&path), "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["x"][2], serde_json::json!([0, 1, 0, 1, 0, -1, -1]));
    assert_eq!(v["stats"]["f_size"], 7);
    assert_eq!(v["trace"].as_array().unwrap().len(), 7);

    let out = cils(&["solve", s(&path), "--stats", "--radius", "2.0"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("f_size = 7"));
}

#[test]
fn solve_k_above_l_is_input_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    let text = instance_to_json(&example1().instance)
        .unwrap()
        .replace("\"K\": 4", "\"K\": 8");
    std::fs::write(&path, text).unwrap();
    let out = cils(&["solve", s(&path)]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("exceeds L"), "{err}");
    assert!(err.contains("line "), "{err}");

    let out = cils(&["solve", s(&path), "--json"]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["exit"], 1);
}

#[test]
fn solve_missing_file_is_input_error() {
    assert_eq!(code(&cils(&["solve", "/nonexistent/instance.json"])), 1);
}

#[test]
fn solve_identity_constraint_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let mut inst = example1().instance;
    inst.a = IntMatrix::identity(7).unwrap();
    let path = write_instance(&dir, "inf.json", &inst);
    let out = cils(&["solve", s(&path)]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&cils(&["check", s(&path)])), 2);
}

#[test]
fn check_example() {
    let dir = TempDir::new().unwrap();
    let path = write_instance(&dir, "ex.json", &example1().instance);
    let out = cils(&["check", s(&path)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("same X = true"));
}

#[test]
fn check_oversized_refuses() {
    let dir = TempDir::new().unwrap();
    // 3^16 candidate rows exceed the default budget of 10^7
    let l = 16;
    let inst = ProblemInstance::new(
        RealMatrix::from_element(2, l, 1.0),
        RealMatrix::from_element(2, 1, 1.0),
        IntMatrix::zeros(1, l).unwrap(),
        Alphabet::range(-1, 1).unwrap(),
        4,
        1,
        None,
    )
    .unwrap();
    let path = write_instance(&dir, "big.json", &inst);
    assert_eq!(code(&cils(&["check", s(&path)])), 3);

    let small = write_instance(&dir, "ex.json", &example1().instance);
    let out = Command::new(env!("CARGO_BIN_EXE_cils"))
        .args(["check", s(&small)])
        .env("CILS_ORACLE_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
}

#[test]
fn check_seeded_fixtures() {
    let dir = TempDir::new().unwrap();
    for seed in 0..5 {
        let seed = seed.to_string();
        let path = gen(
            &dir,
            &format!("g{seed}.json"),
            &["--seed", &seed, "--k", "3"],
        );
        let out = cils(&["check", s(&path)]);
        assert_eq!(code(&out), 0, "seed {seed}: {}", stdout(&out));
    }
}

#[test]
fn noiseless_gen_solves_to_zero() {
    let dir = TempDir::new().unwrap();
    let path = gen(&dir, "clean.json", &["--sigma", "0", "--seed", "11"]);
    let out = cils(&["solve", s(&path), "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["objective"].as_f64().unwrap() < 1e-20);
    let planted = load_planted(&planted_path(&path)).unwrap();
    assert_eq!(v["x"], serde_json::json!(planted.to_i64_rows().unwrap()));
}

#[test]
fn gen_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = gen(&dir, "a.json", &["--seed", "99"]);
    let b = gen(&dir, "b.json", &["--seed", "99"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(planted_path(&a)).unwrap(),
        std::fs::read(planted_path(&b)).unwrap()
    );
    let c = gen(&dir, "c.json", &["--seed", "100"]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn gen_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = gen(&dir, "rt.json", &["--seed", "5", "--d0", "0.75"]);
    let text = std::fs::read_to_string(&path).unwrap();
    let inst = load_instance(&path).unwrap();
    assert_eq!(inst.d0, Some(0.75));
    assert_eq!(instance_to_json(&inst).unwrap(), text);
    assert_eq!(parse_instance(&text).unwrap(), inst);
}

#[test]
fn gen_rejects_bad_alphabet() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("x.json");
    let out = cils(&[
        "gen",
        "--rows",
        "2",
        "--cols",
        "5",
        "--m",
        "3",
        "--alphabet",
        "1,x",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bench_two_specs() {
    let dir = TempDir::new().unwrap();
    let specs = dir.path().join("specs.json");
    std::fs::write(
        &specs,
        r#"[
  {"n_rows": 2, "l": 5, "m": 3, "alphabet": [-1, 0, 1], "seed": 1, "trials": 2},
  {"n_rows": 3, "l": 6, "m": 4, "alphabet": [-1, 0, 1], "seed": 2, "trials": 2}
]"#,
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let out = cils(&["bench", s(&specs), "--out", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "size,rank,n,avg_time_s,avg_nodes,recovered,trials"
    );
    assert!(lines[1].starts_with("2x5,2,10,"));
    assert!(lines[2].starts_with("3x6,3,18,"));
    assert!(lines[2].ends_with(",2"));
}
