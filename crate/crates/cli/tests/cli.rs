use std::process::{Command, Output};

use negen_cli::output::format_float;
use serde_json::Value;

fn negen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_negen"))
        .args(args)
        .output()
        .expect("runs negen")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn help_succeeds() {
    assert_eq!(code(&negen(&["--help"])), 0);
    assert_eq!(code(&negen(&["sweep", "--help"])), 0);
}

#[test]
fn usage_errors_exit_1() {
    let o = negen(&["search", "--family", "cat-state"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown family"));
    assert_eq!(
        code(&negen(&[
            "sweep", "--family", "zhang", "--sweep", "q=0:1:4"
        ])),
        1
    );
    assert_eq!(
        code(&negen(&[
            "sweep", "--family", "zhang", "--set", "r", "--sweep", "r=0:1:4"
        ])),
        1
    );
    assert_eq!(
        code(&negen(&[
            "density",
            "--family",
            "zhang",
            "--geometry",
            "spiral:1:1"
        ])),
        1
    );
    assert_eq!(code(&negen(&["frobnicate"])), 1);
}

#[test]
fn sweep_writes_steps_plus_one_rows() {
    let o = negen(&[
        "sweep",
        "--family",
        "vacuum-squeezed",
        "--set",
        "eta=-1",
        "--sweep",
        "r=0:5:50",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r,n,R,F");
    assert_eq!(lines.count(), 51);

    let o = negen(&["sweep", "--family", "barnett-radmore", "--sweep", "r=0:1:4"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "r,n1,n2,R1,R2,R3,R4,F");
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn degenerate_points_leave_empty_cells() {
    // |r⟩ − |−r⟩ vanishes at r = 0
    let o = negen(&[
        "sweep",
        "--family",
        "superposed-squeezed",
        "--set",
        "eta=-1",
        "--sweep",
        "r=0:1:2",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[1], format!("{},,,", format_float(0.0)));
    assert!(rows[2].split(',').all(|c| !c.is_empty()));
}

#[test]
fn nothing_computable_is_a_numeric_failure() {
    let o = negen(&[
        "sweep",
        "--family",
        "superposed-squeezed",
        "--set",
        "eta=-1",
        "--sweep",
        "r=0:0:1",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn csv_values_round_trip() {
    let o = negen(&["sweep", "--family", "ecs-f", "--sweep", "sigma=0:3:30"]);
    for line in stdout(&o).lines().skip(1) {
        for cell in line.split(',') {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(format_float(x), cell);
        }
    }
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let o = negen(&[
            "search",
            "--family",
            "coherent-pair",
            "--starts",
            "8",
            "--seed",
            "5",
            "--format",
            "json",
            "--out",
            p,
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn single_start_gives_single_record() {
    let o = negen(&[
        "search",
        "--family",
        "coherent-pair",
        "--starts",
        "1",
        "--seed",
        "9",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["command"], "search");
    assert_eq!(doc["seed"], 9);
    assert_eq!(doc["extrema"].as_array().unwrap().len(), 1);
    assert_eq!(doc["extrema"][0]["hits"], 1);
}

#[test]
fn search_respects_fixed_parameters() {
    let o = negen(&[
        "search",
        "--family",
        "vacuum-squeezed",
        "--set",
        "eta=-1",
        "--set",
        "eta_phase=0",
        "--starts",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().ends_with(",hits,r"));
}

fn min_row(text: &str) -> f64 {
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("min,"));
    last.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn density_two_mode_squeezed_minimum() {
    let o = negen(&[
        "density",
        "--family",
        "barnett-radmore",
        "--set",
        "r=1",
        "--geometry",
        "traveling:1:1:1",
        "--grid",
        "32",
    ]);
    assert_eq!(code(&o), 0);
    let expected = -2.0 * 1f64.sinh() * (1f64.cosh() - 1f64.sinh());
    assert!((min_row(&stdout(&o)) - expected).abs() < 1e-7);
    assert!((expected + 0.864665).abs() < 1e-6);
}

#[test]
fn density_of_vacuum_is_zero() {
    let o = negen(&[
        "density",
        "--family",
        "squeezed-vacuum",
        "--geometry",
        "standing:1:2",
        "--grid",
        "16",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 17 * 17 + 1);
    for line in text.lines().skip(1) {
        assert_eq!(
            line.rsplit(',').next().unwrap().parse::<f64>().unwrap(),
            0.0
        );
    }
}

#[test]
fn density_json_has_minimum() {
    let o = negen(&[
        "density",
        "--family",
        "zhang",
        "--set",
        "r=0.3",
        "--set",
        "theta=0.5pi",
        "--geometry",
        "traveling:1:2:0",
        "--grid",
        "16",
        "--format",
        "json",
    ]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc["min_found"]["rho"].as_f64().unwrap() < 0.0);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 17 * 17 + 1);
}

#[test]
fn verify_with_no_draws_passes() {
    let o = negen(&[
        "verify",
        "--draws",
        "0",
        "--families",
        "zhang,barnett-radmore",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(
        text.lines().next().unwrap(),
        "check,name,at,value,reference,deviation,tolerance,pass"
    );
    let family_rows: Vec<&str> = text.lines().filter(|l| l.starts_with("family,")).collect();
    assert_eq!(family_rows.len(), 2);
    assert!(family_rows.iter().all(|l| l.ends_with(",true")));
}

#[test]
fn verify_reports_adjudication() {
    let o = negen(&[
        "verify",
        "--draws",
        "3",
        "--families",
        "squeezed-vacuum",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let adj = doc["report"]["adjudication"].as_array().unwrap();
    let at1 = adj.iter().find(|a| a["r"] == 1.0).unwrap();
    assert!(at1["deviation_tanh_squared"].as_f64().unwrap() < 1e-10);
    assert!(at1["deviation_linear_tanh"].as_f64().unwrap() > 1e-3);
}
