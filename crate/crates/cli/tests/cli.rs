use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn kondo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kondo")).args(args).output().unwrap()
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn map() -> String {
    fixtures().join("apartment.map").display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_is_deterministic_and_matches_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = kondo(&["generate", "--map", &map(), "--seed", "7", "--n", "6", "--out", p(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    assert_eq!(a, std::fs::read(fixtures().join("apartment_n6_seed7.json")).unwrap());
}

#[test]
fn bad_difficulty_is_a_usage_error() {
    let o = kondo(&["generate", "--map", &map(), "--seed", "7", "--n", "13"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("multiple of 6"));
    assert_eq!(kondo(&["generate", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(kondo(&["solve", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn solve_fixture_exactly() {
    let scenario = fixtures().join("apartment_n6_seed7.json");
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = kondo(&["solve", p(&scenario), "--map", &map(), "--exact", "--validate", "--out", p(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("cost: 152.3259018078045"), "{}", stdout(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["cost"], 152.3259018078045);
    assert_eq!(json["solver"], "exact");
    assert_eq!(json["valid"], true);
}

fn write_instance(dir: &Path) -> PathBuf {
    let path = dir.join("instance.json");
    std::fs::write(
        &path,
        r#"{"v":1,"n":2,"capacity":2,
            "dist":[0,1,2,3,4, 1,0,1,2,3, 2,1,0,1,2, 3,2,1,0,1, 4,3,2,1,0],
            "delivery":{"1":3,"2":4}}"#,
    )
    .unwrap();
    path
}

#[test]
fn solve_heuristic_with_zero_budget() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_instance(dir.path());
    let o = kondo(&["solve", p(&instance), "--heuristic", "--budget", "0", "--validate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("solver: heuristic"), "{out}");
    assert!(out.contains("valid: yes"));
}

#[test]
fn infeasible_prefix_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_instance(dir.path());
    // dropoff 3 before its pickup
    let o = kondo(&["solve", p(&instance), "--prefix", "0,3"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let o = kondo(&["solve", p(&instance), "--prefix", "0,1", "--exact"]);
    assert!(stdout(&o).starts_with("route: [0, 1"), "{}", stdout(&o));
}

#[test]
fn batch_writes_one_trace_per_episode() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"map": {:?}, "difficulties": [6, 12], "fidelities": ["optimal", "none"],
                "policies": [{{"kind": "compliant"}}], "seeds": 2}}"#,
            map()
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = kondo(&["batch", "--config", p(&config), "--out", p(&out), "--n", "6", "--fidelity", "optimal"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_dir(out.join("traces")).unwrap().count(), 2);
    let csv = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("optimal,6,compliant,0,0,2,"), "{row}");

    let again = dir.path().join("again");
    kondo(&["batch", "--config", p(&config), "--out", p(&again), "--n", "6", "--fidelity", "optimal"]);
    assert_eq!(csv, std::fs::read_to_string(again.join("summary.csv")).unwrap());

    let o = kondo(&["batch", "--config", p(&config), "--out", p(&out), "--policy", "lazy"]);
    assert_eq!(o.status.code(), Some(2));
    let o = kondo(&["batch", "--config", p(&config)]);
    assert_eq!(o.status.code(), Some(2));
}

struct Server(std::process::Child, String);

impl Drop for Server {
    fn drop(&mut self) {
        self.0.kill().ok();
        self.0.wait().ok();
    }
}

fn start_server(ui: Option<&Path>) -> Server {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kondo"));
    cmd.args(["serve", "--map", &map(), "--addr", "127.0.0.1:0"]);
    if let Some(ui) = ui {
        cmd.args(["--ui", p(ui)]);
    }
    let mut child = cmd.stdout(Stdio::piped()).spawn().unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.as_mut().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").unwrap().to_string();
    Server(child, addr)
}

#[test]
fn serve_speaks_ndjson_and_static_http() {
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<h1>kondo</h1>").unwrap();
    let server = start_server(Some(ui.path()));

    let mut stream = TcpStream::connect(&server.1).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let start = r#"{"v":1,"type":"start","seq":5,"body":{"scenario":{"generate":{"map":"apartment","seed":7,"n":6}},"fidelity":"optimal"}}"#;
    writeln!(stream, "{start}").unwrap();
    let mut line = String::new();
    reader.read_line(&mut line).unwrap();
    let reply: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(reply["type"], "state");
    assert_eq!(reply["seq"], 5);
    assert_eq!(reply["body"]["snapshot"]["objects"].as_array().unwrap().len(), 6);
    writeln!(stream, "garbage").unwrap();
    line.clear();
    reader.read_line(&mut line).unwrap();
    assert!(line.contains("\"bad_frame\""), "{line}");

    let mut http = TcpStream::connect(&server.1).unwrap();
    http.write_all(b"GET / HTTP/1.1\r\nHost: x\r\n\r\n").unwrap();
    let mut page = String::new();
    http.read_to_string(&mut page).unwrap();
    assert!(page.starts_with("HTTP/1.1 200"), "{page}");
    assert!(page.ends_with("<h1>kondo</h1>"));

    let mut http = TcpStream::connect(&server.1).unwrap();
    http.write_all(b"GET /../Cargo.toml HTTP/1.1\r\n\r\n").unwrap();
    let mut page = String::new();
    http.read_to_string(&mut page).unwrap();
    assert!(page.starts_with("HTTP/1.1 404"), "{page}");
}

#[test]
fn serve_upgrades_web_sockets() {
    let server = start_server(None);
    let stream = TcpStream::connect(&server.1).unwrap();
    let (mut ws, _) = tungstenite::client(format!("ws://{}/session", server.1), stream).unwrap();
    ws.send(tungstenite::Message::Text(r#"{"v":1,"type":"assist","session_id":"s9","seq":3,"body":{}}"#.into()))
        .unwrap();
    let reply = ws.read().unwrap().into_text().unwrap();
    let reply: serde_json::Value = serde_json::from_str(&reply).unwrap();
    assert_eq!(reply["body"]["code"], "unknown_session");
    assert_eq!(reply["seq"], 3);
}
