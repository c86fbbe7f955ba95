//! Recorded request/response fixtures for the HTTP API.
//!
//! A fixture holds the server config, a store image to start from, and a
//! list of steps. Each step's request may refer to values captured from
//! earlier responses as `{name}`. Volatile fields (`created_at`,
//! `session_id`) are masked before comparison.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::http::{request, HttpResponse};

/// Response headers worth pinning.
const PINNED_HEADERS: [&str; 3] = ["content-type", "etag", "cache-control"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixture {
    /// `key=value` config lines, `storage.path` excluded.
    pub config: Vec<String>,
    /// Lines of `artifacts.jsonl` present before the server starts.
    pub store: Vec<String>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Step {
    pub name: String,
    pub method: String,
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub headers: BTreeMap<String, String>,
    /// Pause before sending, in milliseconds.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub sleep_ms: u64,
    /// Variable name -> JSON pointer into the response body.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub capture: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
}

fn is_zero(n: &u64) -> bool {
    *n == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expect {
    pub status: u16,
    #[serde(default)]
    pub headers: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub png: Option<PngSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PngSummary {
    pub width: u32,
    pub height: u32,
    /// SHA-256 of the encoded file.
    pub sha256: String,
}

impl Step {
    pub fn new(name: &str, method: &str, path: &str) -> Step {
        Step { name: name.into(), method: method.into(), path: path.into(), ..Default::default() }
    }

    pub fn body(mut self, body: Value) -> Step {
        self.body = Some(body);
        self
    }

    pub fn header(mut self, k: &str, v: &str) -> Step {
        self.headers.insert(k.into(), v.into());
        self
    }

    pub fn capture(mut self, var: &str, pointer: &str) -> Step {
        self.capture.insert(var.into(), pointer.into());
        self
    }

    pub fn sleep_ms(mut self, ms: u64) -> Step {
        self.sleep_ms = ms;
        self
    }
}

impl Fixture {
    pub fn load(path: impl AsRef<Path>) -> Fixture {
        let text = std::fs::read_to_string(path.as_ref()).expect("fixture readable");
        serde_json::from_str(&text).expect("fixture parses")
    }

    pub fn save(&self, path: impl AsRef<Path>) {
        let mut text = serde_json::to_string_pretty(self).expect("serializes");
        text.push('\n');
        std::fs::write(path, text).expect("fixture writable");
    }

    /// Config file text for a server whose store lives in `store_dir`.
    pub fn config_text(&self, store_dir: &Path) -> String {
        let mut text = format!("storage.path={}\n", store_dir.display());
        for line in &self.config {
            text.push_str(line);
            text.push('\n');
        }
        text
    }

    /// Writes the initial store image into `store_dir`.
    pub fn prepare_store(&self, store_dir: &Path) {
        std::fs::create_dir_all(store_dir).expect("store dir");
        let mut text = String::new();
        for line in &self.store {
            text.push_str(line);
            text.push('\n');
        }
        std::fs::write(store_dir.join(win_core::archive::LOG_FILE), text).expect("store writable");
    }
}

fn substitute(text: &str, vars: &BTreeMap<String, String>) -> String {
    let mut out = text.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

fn mask(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map.iter_mut() {
                match k.as_str() {
                    "created_at" => *inner = Value::String("<ts>".into()),
                    "session_id" => *inner = Value::String("<sid>".into()),
                    _ => mask(inner),
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(mask),
        Value::String(text) => *text = mask_session_ids(text),
        _ => {}
    }
}

/// Replaces every standalone run of exactly 32 lowercase hex digits (a
/// session id) with `<sid>`. Artifact ids are 64 digits and stay.
fn mask_session_ids(text: &str) -> String {
    let is_hex = |c: char| c.is_ascii_digit() || ('a'..='f').contains(&c);
    let mut out = String::with_capacity(text.len());
    let mut run = String::new();
    let flush = |run: &mut String, out: &mut String| {
        if run.len() == 32 {
            out.push_str("<sid>");
        } else {
            out.push_str(run);
        }
        run.clear();
    };
    for c in text.chars() {
        if is_hex(c) {
            run.push(c);
        } else {
            flush(&mut run, &mut out);
            out.push(c);
        }
    }
    flush(&mut run, &mut out);
    out
}

/// Normalised view of a response, as stored in fixtures.
pub fn summarize(resp: &HttpResponse) -> Result<Expect, String> {
    let headers = PINNED_HEADERS
        .iter()
        .filter_map(|&h| resp.header(h).map(|v| (h.to_string(), v.to_string())))
        .collect();
    let mut expect = Expect { status: resp.status, headers, json: None, png: None };
    let content_type = resp.header("content-type").unwrap_or("");
    if resp.body.is_empty() {
        return Ok(expect);
    }
    if content_type.starts_with("image/png") {
        let img = image::load_from_memory_with_format(&resp.body, image::ImageFormat::Png)
            .map_err(|e| format!("undecodable PNG: {e}"))?;
        if img.color() != image::ColorType::L8 {
            return Err(format!("PNG is {:?}, not 8-bit grayscale", img.color()));
        }
        expect.png = Some(PngSummary {
            width: img.width(),
            height: img.height(),
            sha256: hex::encode(Sha256::digest(&resp.body)),
        });
    } else if content_type.starts_with("application/json") {
        let mut v: Value = serde_json::from_slice(&resp.body).map_err(|e| format!("invalid JSON body: {e}"))?;
        mask(&mut v);
        expect.json = Some(v);
    } else {
        return Err(format!("unexpected content-type {content_type:?}"));
    }
    Ok(expect)
}

fn send(addr: SocketAddr, step: &Step, vars: &BTreeMap<String, String>) -> Result<HttpResponse, String> {
    if step.sleep_ms > 0 {
        std::thread::sleep(std::time::Duration::from_millis(step.sleep_ms));
    }
    let path = substitute(&step.path, vars);
    let headers: Vec<(String, String)> =
        step.headers.iter().map(|(k, v)| (k.clone(), substitute(v, vars))).collect();
    let header_refs: Vec<(&str, &str)> = headers.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    let body = step.body.as_ref().map(|b| substitute(&b.to_string(), vars).into_bytes());
    request(addr, &step.method, &path, &header_refs, body.as_deref()).map_err(|e| format!("{}: {e}", step.name))
}

fn capture(step: &Step, resp: &HttpResponse, vars: &mut BTreeMap<String, String>) -> Result<(), String> {
    if step.capture.is_empty() {
        return Ok(());
    }
    let v: Value = serde_json::from_slice(&resp.body).map_err(|e| format!("{}: capture from non-JSON: {e}", step.name))?;
    for (var, pointer) in &step.capture {
        let found = v
            .pointer(pointer)
            .ok_or_else(|| format!("{}: nothing at {pointer}", step.name))?;
        let text = match found {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        vars.insert(var.clone(), text);
    }
    Ok(())
}

/// Runs `steps` against a live server and fills in their expectations.
pub fn record(addr: SocketAddr, steps: &mut [Step]) -> Result<(), String> {
    let mut vars = BTreeMap::new();
    for step in steps.iter_mut() {
        let resp = send(addr, step, &vars)?;
        step.expect = Some(summarize(&resp).map_err(|e| format!("{}: {e}", step.name))?);
        capture(step, &resp, &mut vars)?;
    }
    Ok(())
}

/// Runs a fixture's steps against a live server; returns one message per
/// step whose response differs from the recording.
pub fn replay(addr: SocketAddr, fixture: &Fixture) -> Vec<String> {
    let mut vars = BTreeMap::new();
    let mut mismatches = Vec::new();
    for step in &fixture.steps {
        let resp = match send(addr, step, &vars) {
            Ok(r) => r,
            Err(e) => {
                mismatches.push(e);
                continue;
            }
        };
        match summarize(&resp) {
            Ok(actual) if Some(&actual) == step.expect.as_ref() => {}
            Ok(actual) => mismatches.push(format!(
                "{}: expected {}, got {}",
                step.name,
                serde_json::to_string(&step.expect).unwrap_or_default(),
                serde_json::to_string(&actual).unwrap_or_default()
            )),
            Err(e) => mismatches.push(format!("{}: {e}", step.name)),
        }
        if let Err(e) = capture(step, &resp, &mut vars) {
            mismatches.push(e);
        }
    }
    mismatches
}
