use std::process::{Command, Output};

use serde_json::Value;

fn berk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berk")).args(args).env_remove("BERK_PRECISION").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = berk(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn image_of_a_ball_under_squaring() {
    let v = json(&["image", "--backend", "padic:p=3,prec=40", "--map", "z^2", "--point", r#"{"t":"II","c":"0","logr":"1"}"#]);
    assert_eq!(v["point"], serde_json::json!({"t":"II","c":"0","logr":"2"}));
    assert_eq!(v["local_degree"]["value"], 2);
    assert_eq!(v["local_degree"]["tag"], "exact");
}

#[test]
fn entropy_bounds_for_good_reduction() {
    let v = json(&["entropy-bounds", "--map", "z^2+1", "--backend", "padic:p=3"]);
    assert_eq!(v["h_lower"]["value"].as_f64().unwrap(), 0.0);
    assert!((v["degtop_log"]["value"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert!(v["degtop_log"]["tag"].as_str().unwrap().starts_with("approx"));
}

#[test]
fn usage_and_computation_errors() {
    assert_eq!(berk(&["image", "--map", "z^2"]).status.code(), Some(2));
    assert_eq!(berk(&["no-such-command"]).status.code(), Some(2));
    let out = berk(&["image", "--map", "z^2", "--point", "{"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error"].is_string() && v["message"].is_string());
    let out = berk(&["degtop", "--backend", "padic:p=4", "--map", "z^2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn preimages_round_trip_through_image() {
    let target = r#"{"t":"II","c":"1","logr":"2"}"#;
    let v = json(&["preimages", "--map", "z^2+z/3", "--point", target]);
    let fiber = v["fiber"].as_array().unwrap();
    let total: u64 = fiber.iter().map(|e| e["mult"].as_u64().unwrap()).sum();
    assert_eq!(total, 2);
    assert_eq!(v["total_multiplicity"]["value"], 2);
    let want = v["target"].clone();
    for e in fiber {
        let p = e["point"].to_string();
        let img = json(&["image", "--map", "z^2+z/3", "--point", &p]);
        assert_eq!(img["point"], want);
        assert_eq!(img["local_degree"]["value"], e["mult"]);
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["equilibrium", "--map", "(z^2+z)/3", "--n", "3", "--partition", "residue:depth=1"];
    let a = berk(&args);
    let b = berk(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["total_mass"]["value"], "1");
    assert_eq!(v["invariance_defect"]["value"], "0");
}

#[test]
fn constants_and_precision_override() {
    let v = json(&["degtop", "--const", "a=1/3", "--map", "z^3/(1+(a*z)^5)"]);
    assert_eq!(v["degree"]["value"], 5);
    let out = Command::new(env!("CARGO_BIN_EXE_berk"))
        .args(["eval-norm", "--poly", "z-1", "--point", r#"{"t":"I","v":"1"}"#])
        .env("BERK_PRECISION", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn skeleton_reports() {
    let v = json(&["skeleton", "--example", "R0", "--d", "5", "--alog", "1", "--report", "entropies,invariant-set"]);
    assert!((v["entropies"]["h_eq"]["value"].as_f64().unwrap() - 0.673012).abs() < 5e-7);
    assert_eq!(v["invariant_set"]["kind"], "CANTOR");
    let v = json(&["skeleton", "--example", "R1", "--report", "cylinders", "--depth", "2"]);
    let cyl = v["cylinders"]["cylinders"].as_array().unwrap();
    assert_eq!(cyl.len(), 9);
    let dot = berk(&["skeleton", "--example", "R0", "--format", "dot", "--depth", "2"]);
    assert!(String::from_utf8(dot.stdout).unwrap().starts_with("digraph"));
}

#[test]
fn shift_against_solver() {
    let v = json(&["shift", "--p", "2", "--depth", "4", "--check-against-solver"]);
    let counts: Vec<u64> = v["levels"].as_array().unwrap().iter().map(|l| l["count"]["value"].as_u64().unwrap()).collect();
    assert_eq!(counts, [1, 2, 4, 8, 16]);
    assert_eq!(v["solver_fibers_checked"]["value"], 7);
}

#[test]
fn run_all_passes() {
    let out = berk(&["examples", "run-all"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    for row in ["R0", "R1", "LATTES", "SHIFT", "CHAR-P", "DETECTION"] {
        assert!(text.lines().any(|l| l.starts_with(row) && l.contains("PASS")), "{row}\n{text}");
    }
}
