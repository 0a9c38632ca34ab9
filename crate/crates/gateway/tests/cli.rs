use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

fn fairq(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fairq")).args(args).output().unwrap();
    (out.status.success(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

fn instance() -> Value {
    json!({
        "m": 6, "n": 2,
        "goods": ["apple", "book", "cup", "desk", "ear", "fan"],
        "agents": [
            { "name": "ann", "valuation": { "type": "additive", "weights": [1, 1, 1, 1, 1, 1] } },
            { "name": "bo", "valuation": { "type": "additive", "weights": ["1/2", 3, 0, 2, 2, 1] } }
        ]
    })
}

#[test]
fn run_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", &instance());
    let out = dir.path().join("alloc.json");
    let (ok, _, err) = fairq(&["run", "--protocol", "two_agent_ef1", "--instance", &inst, "--out", out.to_str().unwrap()]);
    assert!(ok, "{err}");
    let alloc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(alloc["bundles"].as_array().unwrap().len(), 2);
    assert!(alloc["queries"].as_u64().unwrap() <= 10);

    let (ok, stdout, err) = fairq(&["check", "--instance", &inst, "--allocation", out.to_str().unwrap()]);
    assert!(ok, "{err}");
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["ef1"], true);
    for key in ["ef", "efx", "proportional"] {
        assert!(report[key].is_boolean());
    }
}

#[test]
fn check_accepts_a_plain_bundle_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", &instance());
    let alloc = write(dir.path(), "alloc.json", &json!({ "bundles": [[0, 1, 2, 3, 4, 5], []] }));
    let (ok, stdout, _) = fairq(&["check", "--instance", &inst, "--allocation", &alloc]);
    assert!(ok);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report, json!({ "ef": false, "efx": false, "ef1": false, "proportional": false }));
    let bad = write(dir.path(), "bad.json", &json!({ "bundles": [[0, 1], [1, 2, 3, 4, 5]] }));
    let (ok, _, err) = fairq(&["check", "--instance", &inst, "--allocation", &bad]);
    assert!(!ok && err.contains("error"));
}

#[test]
fn run_with_a_line_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "inst.json",
        &json!({ "m": 5, "n": 3, "agents": (0..3).map(|i| json!({ "name": format!("a{i}"), "valuation": { "type": "additive", "weights": [4, 1, 3, 2, 2] } })).collect::<Vec<_>>() }),
    );
    let line = write(dir.path(), "line.json", &json!([4, 3, 2, 1, 0]));
    let (ok, stdout, err) = fairq(&["run", "--protocol", "three_identical_contiguous_ef1", "--instance", &inst, "--line", &line]);
    assert!(ok, "{err}");
    let alloc: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(alloc["bundles"].as_array().unwrap().len(), 3);
    let (ok, _, err) = fairq(&["run", "--protocol", "separate_designated_goods", "--instance", &inst, "--designated", "0,2,4"]);
    assert!(ok, "{err}");
}

#[test]
fn adversary_transcript() {
    let (ok, stdout, err) = fairq(&["adversary", "--kind", "additive-ef", "--m", "6", "--driver", "random", "--seed", "3"]);
    assert!(ok, "{err}");
    let t: Value = serde_json::from_str(&stdout).unwrap();
    for key in ["answers", "materializations", "verdicts"] {
        assert!(t.get(key).is_some());
    }
    assert_eq!(t["materializations"][0]["consistent"], true);
    let (ok, stdout, _) = fairq(&["adversary", "--kind", "pairs", "--m", "256", "--n", "4", "--driver", "envy_cycle_elimination"]);
    assert!(ok);
    let t: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(t["materializations"][0]["allocation_ef1"], true);
    let (ok, _, _) = fairq(&["adversary", "--kind", "efx", "--m", "4", "--driver", "budget:1"]);
    assert!(!ok);
    let (ok, _, _) = fairq(&["adversary", "--kind", "nope", "--m", "4"]);
    assert!(!ok);
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let cfg = write(
        dir.path(),
        "cfg.json",
        &json!({ "protocol": "two_agent_ef1", "family": "additive-zipf", "m": [16, 64], "n": 2, "seeds": { "from": 0, "to": 3 }, "output": csv }),
    );
    let (ok, _, err) = fairq(&["bench", "--config", &cfg]);
    assert!(ok, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("protocol,m,n,seed,queries,bound_ratio,ef1,wall_ms\n"));
    assert_eq!(text.lines().count(), 7);
    let bad = write(dir.path(), "bad.json", &json!({ "protocol": "size_dominant_n2", "family": "additive-zipf", "m": [4], "n": 2, "seeds": { "from": 0, "to": 1 } }));
    assert!(!fairq(&["bench", "--config", &bad]).0);
}

fn http(port: u16, method: &str, path: &str, body: &str) -> Option<(u16, String)> {
    let mut s = TcpStream::connect(("127.0.0.1", port)).ok()?;
    s.set_read_timeout(Some(Duration::from_secs(5))).ok()?;
    let req = format!(
        "{method} {path} HTTP/1.1\r\nhost: localhost\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
        body.len()
    );
    s.write_all(req.as_bytes()).ok()?;
    let mut resp = String::new();
    s.read_to_string(&mut resp).ok()?;
    let status = resp.split_whitespace().nth(1)?.parse().ok()?;
    let body = resp.split_once("\r\n\r\n")?.1.to_string();
    Some((status, body))
}

#[test]
fn serve_answers_http() {
    let dir = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let store = dir.path().join("events.jsonl");
    let mut child = Command::new(env!("CARGO_BIN_EXE_fairq"))
        .args(["serve", "--port", &port.to_string(), "--store", store.to_str().unwrap()])
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let start = Instant::now();
    let created = loop {
        if let Some(r) = http(port, "POST", "/sessions", r#"{"n":2,"m":6,"protocol":"two_agent_ef1"}"#) {
            break r;
        }
        assert!(start.elapsed() < Duration::from_secs(20), "server did not start");
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().ok();
    child.wait().ok();
    assert_eq!(created.0, 201);
    assert!(created.1.contains("awaiting_answer"));
    assert!(std::fs::read_to_string(&store).unwrap().contains("\"created\""));
}
