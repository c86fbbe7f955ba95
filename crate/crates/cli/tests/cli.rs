mod common;

use std::path::Path;

use common::{stderr, stdout, win, ServeProcess};
use serde_json::Value;
use win_core::archive::LOG_FILE;
use win_testkit::http::request;

fn store_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn auto(store: &Path, domain: &str, policy: &str, steps: &str, every: &str, seed: &str) -> std::process::Output {
    win(&[
        "auto", "--store", store_arg(store), "--domain", domain, "--policy", policy, "--steps", steps,
        "--publish-every", every, "--seed", seed,
    ])
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(win(&["auto", "--store", "x", "--domain", "bitstring", "--policy", "onemax", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(win(&["validate-store", "--store", "x", "--bogus"]).status.code(), Some(2));
    assert_eq!(win(&["export", "--store", "x", "--domain", "d", "--format", "svg"]).status.code(), Some(2));
    let missing = win(&["serve", "--config", "/definitely/not/here.conf"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("cannot read config"));
}

#[test]
fn export_formats() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path();
    let empty = win(&["export", "--store", store_arg(store), "--domain", "bitstring", "--format", "dot"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(stdout(&empty), "digraph phylogeny {\n}\n");

    let unknown = win(&["export", "--store", store_arg(store), "--domain", "nope"]);
    assert_eq!(unknown.status.code(), Some(3));

    let run = auto(store, "bitstring", "onemax", "12", "3", "5");
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let ids: Vec<String> = stdout(&run).lines().map(String::from).collect();
    assert_eq!(ids.len(), 4);

    let out = dir.path().join("tree.dot");
    let dot = win(&["export", "--store", store_arg(store), "--domain", "bitstring", "-o", out.to_str().unwrap()]);
    assert_eq!(dot.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("[label=")).count(), 4);
    assert_eq!(text.lines().filter(|l| l.contains("->")).count(), 3);

    let json = win(&["export", "--store", store_arg(store), "--domain", "bitstring", "--format", "json"]);
    let graph: Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(graph["nodes"].as_array().unwrap().len(), 4);
    assert_eq!(graph["roots"].as_array().unwrap().len(), 1);
}

#[test]
fn auto_random_picture_publishes_every_k_steps() {
    let dir = tempfile::tempdir().unwrap();
    let run = auto(dir.path(), "cppn-picture", "random", "20", "5", "9");
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    assert_eq!(stdout(&run).lines().count(), 4);
    let log = std::fs::read_to_string(dir.path().join(LOG_FILE)).unwrap();
    assert_eq!(log.lines().count(), 4);
    assert_eq!(win(&["validate-store", "--store", store_arg(dir.path())]).status.code(), Some(0));
}

#[test]
fn auto_unknown_domain_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(auto(dir.path(), "nope", "random", "3", "1", "0").status.code(), Some(3));
    // onemax needs a fitness the picture domain does not have
    assert_eq!(auto(dir.path(), "cppn-picture", "onemax", "3", "1", "0").status.code(), Some(3));
}

fn corrupt_field(store: &Path, seq: usize, f: impl FnOnce(&mut Value)) {
    let path = store.join(LOG_FILE);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut v: Value = serde_json::from_str(&lines[seq - 1]).unwrap();
    f(&mut v);
    lines[seq - 1] = serde_json::to_string(&v).unwrap();
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn validate_store_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path();
    let fresh = win(&["validate-store", "--store", store_arg(store)]);
    assert_eq!(fresh.status.code(), Some(0));
    assert_eq!(auto(store, "bitstring", "onemax", "9", "3", "1").status.code(), Some(0));
    assert_eq!(win(&["validate-store", "--store", store_arg(store)]).status.code(), Some(0));

    let pristine = std::fs::read(store.join(LOG_FILE)).unwrap();

    corrupt_field(store, 2, |v| v["generation"] = Value::from(7));
    let bad_gen = win(&["validate-store", "--store", store_arg(store)]);
    assert_eq!(bad_gen.status.code(), Some(4));
    assert!(stdout(&bad_gen).contains("seq 2"), "{}", stdout(&bad_gen));
    assert!(stdout(&bad_gen).contains("generation 7"));

    std::fs::write(store.join(LOG_FILE), &pristine).unwrap();
    corrupt_field(store, 3, |v| v["author"] = Value::from("x"));
    assert_eq!(win(&["validate-store", "--store", store_arg(store)]).status.code(), Some(0), "author is not identity");
    corrupt_field(store, 3, |v| v["genome_blob"] = Value::from(format!("{{\"bits\":\"{}\"}}", "1".repeat(64))));
    let bad_id = win(&["validate-store", "--store", store_arg(store)]);
    assert_eq!(bad_id.status.code(), Some(4));
    assert!(stdout(&bad_id).contains("does not match content digest"));

    std::fs::write(store.join(LOG_FILE), &pristine).unwrap();
    let mut text = String::from_utf8(pristine.clone()).unwrap();
    let first_newline = text.find('\n').unwrap();
    text.insert_str(first_newline + 1, "{\"broken\n");
    std::fs::write(store.join(LOG_FILE), &text).unwrap();
    let corrupt = win(&["validate-store", "--store", store_arg(store)]);
    assert_eq!(corrupt.status.code(), Some(4));
    assert!(stdout(&corrupt).contains("line 2"));

    let mut torn = pristine.clone();
    torn.extend_from_slice(b"{\"artifact_id\":\"12");
    std::fs::write(store.join(LOG_FILE), &torn).unwrap();
    let tail = win(&["validate-store", "--store", store_arg(store)]);
    assert_eq!(tail.status.code(), Some(0));
    assert!(stderr(&tail).contains("interrupted write"));

    assert_eq!(win(&["validate-store", "--store", "/no/such/store"]).status.code(), Some(2));
}

#[test]
fn serve_reports_port_and_matches_export() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    assert_eq!(auto(&store, "bitstring", "onemax", "20", "4", "2").status.code(), Some(0));
    let config = dir.path().join("win.conf");
    std::fs::write(&config, format!("storage.path={}\nserver.port=1\n", store.display())).unwrap();

    let server = ServeProcess::start(&config);
    assert_ne!(server.addr.port(), 1, "--port overrides the config");
    let api = request(server.addr, "GET", "/api/phylogeny?domain_id=bitstring", &[], None).unwrap();
    assert_eq!(api.status, 200);
    let api = api.json();
    assert_eq!(server.stop().code(), Some(0));

    let json = win(&["export", "--store", store.to_str().unwrap(), "--domain", "bitstring", "--format", "json"]);
    let exported: Value = serde_json::from_str(&stdout(&json)).unwrap();
    for key in ["nodes", "edges", "roots"] {
        assert_eq!(exported[key].as_array().unwrap().len(), api[key].as_array().unwrap().len(), "{key}");
    }
    assert_eq!(exported["edges"], api["edges"]);
}

#[test]
fn bad_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("win.conf");
    std::fs::write(&config, "server.colour=blue\n").unwrap();
    let out = win(&["serve", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown key"));
}
