use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn games() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/games")
}

fn game(name: &str) -> String {
    games().join(name).to_string_lossy().into_owned()
}

fn cheaptalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cheaptalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn analyze_reports_the_triangle() {
    let r = json(&cheaptalk(&["analyze", &game("triangle.json")]));
    let vertices: Vec<Value> = serde_json::from_str(r#"[["1/3","1/3"],["1","1/3"],["2/3","2/3"]]"#).unwrap();
    assert_eq!(r["e_polygon"]["vertices"].as_array().unwrap(), &vertices);
    assert_eq!(r["invariant_measure"], serde_json::json!(["1/3", "1/3", "1/3"]));
    assert_eq!(r["babbling_value"], "1/3");
    assert_eq!(r["e_hat"]["nonempty"], true);
    assert_eq!(r["assumption_a"]["holds"], true);
}

#[test]
fn analyze_aligned_game_has_a_single_point() {
    let r = json(&cheaptalk(&["analyze", &game("aligned.json")]));
    assert_eq!(r["e_polygon"]["vertices"], serde_json::json!([["1", "1"]]));
    assert_eq!(r["e_hat"]["nonempty"], false);
    assert_eq!(r["condition_b"]["holds"], false);
}

#[test]
fn analyze_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"states\": [").unwrap();
    assert_eq!(cheaptalk(&["analyze", broken.to_str().unwrap()]).status.code(), Some(2));

    let reducible = dir.path().join("reducible.json");
    std::fs::write(
        &reducible,
        r#"{"states":["a","b"],"actions":["x","y"],"u1":[[1,0],[0,1]],"u2":[[1,0],[0,1]],
            "transition":[[1,0],["1/2","1/2"]]}"#,
    )
    .unwrap();
    assert_eq!(
        cheaptalk(&["analyze", reducible.to_str().unwrap()]).status.code(),
        Some(3)
    );

    let missing = dir.path().join("missing.json");
    assert_eq!(
        cheaptalk(&["analyze", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        &game("triangle.json"),
        "--N",
        "12",
        "--delta",
        "0.99",
        "--seed",
        "7",
        "--replications",
        "200",
    ];
    let first = cheaptalk(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, cheaptalk(&args).stdout);
    let text = stdout(&first);
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("N,delta,distance_L1,sender_value,receiver_value,receiver_gap,seed"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..2], ["12", "99/100"]);
    assert_eq!(row[6], "7");
    assert!(row[8..].iter().all(|c| c.parse::<f64>().is_ok()));
}

#[test]
fn simulate_without_replications_leaves_monte_carlo_empty() {
    let out = cheaptalk(&["simulate", &game("triangle.json"), "--N", "4,6", "--delta", "9/10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3);
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",,,,"), "{line}");
        assert!(line.split(',').nth(2).unwrap().contains('/'));
    }
}

#[test]
fn simulate_requires_a_strict_strategy() {
    let aligned = game("aligned.json");
    let out = cheaptalk(&["simulate", &aligned, "--N", "4", "--delta", "0.9"]);
    assert_eq!(out.status.code(), Some(4));
    let forced = cheaptalk(&["simulate", &aligned, "--N", "4", "--delta", "0.9", "--force"]);
    assert!(forced.status.success());
    let bad_delta = cheaptalk(&["simulate", &game("triangle.json"), "--N", "4", "--delta", "1"]);
    assert_eq!(bad_delta.status.code(), Some(2));
}

#[test]
fn coupling_passes_for_swap_and_identity() {
    for copula in ["swap", "mu0", "random"] {
        let r = json(&cheaptalk(&[
            "coupling",
            &game("two_state.json"),
            "--copula",
            copula,
            "--horizon",
            "4",
            "--seed",
            "3",
            "--replications",
            "500",
        ]));
        assert_eq!(r["property_p"]["holds"], true, "{copula}");
        assert_eq!(r["law"]["all_hold"], true, "{copula}");
        assert!(r["kernel_violations"].as_object().unwrap().values().all(|v| v == "0"));
        assert!(r["payoff_identity"]["analytic"].is_array());
    }
}

#[test]
fn coupling_reports_a_violating_copula() {
    let r = json(&cheaptalk(&[
        "coupling",
        &game("five_cycle.json"),
        "--copula",
        "violating",
        "--horizon",
        "2",
    ]));
    assert_eq!(r["property_p"]["holds"], false);
    assert_eq!(r["law"]["all_hold"], false);
    assert_ne!(r["kernel_violations"]["pushed_forward_marginal"], "0");
    assert!(r["payoff_identity"]["skipped"].is_string());
}

#[test]
fn coupling_rejects_invalid_copulas() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("mu.json");
    std::fs::write(&file, r#"[["1/2", 0], [0, "1/4"]]"#).unwrap();
    let out = cheaptalk(&["coupling", &game("two_state.json"), "--copula", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    std::fs::write(&file, r#"[["1/4", "1/4"], ["1/4", "1/4"]]"#).unwrap();
    let ok = json(&cheaptalk(&[
        "coupling",
        &game("two_state.json"),
        "--copula",
        file.to_str().unwrap(),
    ]));
    assert_eq!(ok["property_p"]["holds"], true);
}

#[test]
fn examples_pass_on_the_bundled_games() {
    let out = cheaptalk(&["examples"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS")));
    let r = json(&cheaptalk(&["examples", "--json"]));
    assert_eq!(r["failed"], 0);
    assert_eq!(r["games"].as_array().unwrap().len(), 6);
}

#[test]
fn examples_detect_edited_and_corrupted_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(cheaptalk(&["examples", "--export", d]).status.success());
    assert!(cheaptalk(&["examples", "--dir", d]).status.success());

    // shifting every receiver payoff in the triangle moves its babbling value
    let path = dir.path().join("triangle.json");
    let mut triangle: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for row in triangle["u2"].as_array_mut().unwrap() {
        for x in row.as_array_mut().unwrap() {
            let v: f64 = match &*x {
                Value::String(s) => cheaptalk::rational::to_f64(&cheaptalk::rational::parse_rational(s).unwrap()),
                other => other.as_f64().unwrap(),
            };
            *x = serde_json::json!(v + 1.0);
        }
    }
    std::fs::write(&path, serde_json::to_string(&triangle).unwrap()).unwrap();
    let out = cheaptalk(&["examples", "--dir", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL triangle.json: babbling value"));

    std::fs::write(dir.path().join("device.json"), "not json").unwrap();
    assert_eq!(cheaptalk(&["examples", "--dir", d]).status.code(), Some(2));
}
