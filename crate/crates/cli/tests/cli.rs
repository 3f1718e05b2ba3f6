use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn ordist(args: &[&str], cache: Option<&Path>) -> (i32, Value, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ordist"));
    cmd.args(args);
    match cache {
        Some(dir) => cmd.env("ORDIST_CACHE", dir),
        None => cmd.env_remove("ORDIST_CACHE").arg("--no-cache"),
    };
    let out = cmd.output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json, stdout)
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

fn assert_integral(v: &Value) {
    match v {
        Value::Number(n) => assert!(n.is_i64() || n.is_u64(), "non-integer number {n}"),
        Value::Array(xs) => xs.iter().for_each(assert_integral),
        Value::Object(m) => m.values().for_each(assert_integral),
        _ => {}
    }
}

#[test]
fn field_report() {
    let (code, v, _) = ordist(&["field", "-d", "7"], None);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], "ordist.report/1");
    assert_eq!(v["result"]["disc"], -7);
    assert_eq!(v["result"]["w"], 2);
    assert_eq!(v["result"]["h"], 1);
    let (_, v, _) = ordist(&["field", "-d", "23"], None);
    assert_eq!(v["result"]["h"], 3);
    let (_, v, _) = ordist(&["field", "-d", "1"], None);
    assert_eq!(v["result"]["w"], 4);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(ordist(&["field", "-d", "4"], None).0, 1);
    assert_eq!(ordist(&["frobnicate"], None).0, 1);
    assert_eq!(ordist(&["torsion", "-d", "7", "-m", "p:7:5"], None).0, 1);
    assert_eq!(ordist(&["rayclass", "-d", "7", "-m", "x:3"], None).0, 1);
    // norm 11^10 needs the slow opt-in
    assert_eq!(ordist(&["torsion", "-d", "7", "-m", "p:11:0^10"], None).0, 1);
    assert_eq!(ordist(&["toralg-sweep", "--ell", "5"], None).0, 1);
}

#[test]
fn help_exits_0() {
    let out = Command::new(env!("CARGO_BIN_EXE_ordist")).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn certify_without_admissible_primes_exits_2() {
    let (code, v, _) = ordist(&["certify", "-d", "5", "-p", "3", "-p", "7", "-p", "11"], None);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "hypothesis");
    let (code, _, _) = ordist(&["certify", "-d", "7", "-p", "p:7", "-p", "p:11:0"], None);
    assert_eq!(code, 2);
}

#[test]
fn search_reports_triples() {
    let (code, v, _) = ordist(&["search", "-d", "5"], None);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], 0);
    let (_, v, _) = ordist(&["search", "-d", "7", "--bound", "25"], None);
    let triples = v["result"]["triples"].as_array().unwrap();
    assert!(triples.contains(&serde_json::json!(["p:7", "p:11:0", "p:23:0"])), "{triples:?}");
}

#[test]
fn certify_q7_triple() {
    let (code, v, _) = ordist(&["certify", "-d", "7", "-p", "p:7", "-p", "p:11:0", "-p", "p:23:0"], None);
    assert_eq!(code, 0);
    let r = &v["result"];
    assert_eq!(r["in_kernel"], true);
    assert_eq!(r["nu_r"], 165);
    assert_eq!(r["parity"]["all_even"], true);
    assert_eq!(r["conclusion"], true);
    assert_integral(&v);
}

#[test]
fn torsion_cache_hit_matches_miss() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["torsion", "-d", "7", "-m", "p:7,p:11:0,p:23:0"];
    let (code, miss, _) = ordist(&args, Some(dir.path()));
    assert_eq!(code, 0);
    assert_eq!(miss["result"]["torsion_invariants"], serde_json::json!([2]));
    assert_eq!(miss["result"]["rank"], 660);
    assert_eq!(miss["result"]["bounds"]["order_divides_borne"], true);
    assert!(dir.path().join("v0.1.0").join("torsion").exists());
    let (code, hit, _) = ordist(&args, Some(dir.path()));
    assert_eq!(code, 0);
    assert_eq!(without_timing(miss.clone()), without_timing(hit));
    let (_, uncached, _) = ordist(&args, None);
    assert_eq!(without_timing(miss.clone()), without_timing(uncached));
    assert_integral(&miss);
}

#[test]
fn no_cache_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ordist"))
        .args(["--no-cache", "rayclass", "-d", "7", "-m", "p:11:0"])
        .env("ORDIST_CACHE", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn rayclass_report_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["rayclass", "-d", "23", "-m", "p:3:0,p:13:1"];
    let (_, a, _) = ordist(&args, Some(dir.path()));
    let (_, b, _) = ordist(&args, Some(dir.path()));
    let (_, c, _) = ordist(&args, None);
    assert_eq!(a["result"]["modulus"], "p:3:0,p:13:1");
    let strip = |v: Value| serde_json::to_string(&without_timing(v)).unwrap();
    assert_eq!(strip(a.clone()), strip(b));
    assert_eq!(strip(a), strip(c));
}

#[test]
fn toralg_sweep_ell_2() {
    let (code, v, _) = ordist(&["toralg-sweep", "--ell", "2", "--max-m", "4"], None);
    assert_eq!(code, 0);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for row in rows {
        let m = row["m"].as_u64().unwrap();
        let expected_nonzero = m >= 3 && m % 2 == 1;
        assert_eq!(!row["torsion_invariants"].as_array().unwrap().is_empty(), expected_nonzero, "{row}");
        assert_eq!(row["verdict"], true);
    }
    assert_integral(&v);
}

#[test]
fn text_format() {
    let out = Command::new(env!("CARGO_BIN_EXE_ordist"))
        .args(["--no-cache", "--format", "text", "field", "-d", "3"])
        .output()
        .unwrap();
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("result.w = 6"), "{s}");
    assert!(s.contains("schema = \"ordist.report/1\""));
}
