#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::Path;
use std::thread::JoinHandle;

use tokio::sync::oneshot;
use win_core::archive::{compute_artifact_id, ArtifactRecord};
use win_core::domains::{BitstringDomain, BITSTRING_ID, PICTURE_ID};
use win_server::{AppState, Server, ServerConfig};

pub struct Running {
    pub addr: SocketAddr,
    pub state: AppState,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl Running {
    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            t.join().expect("server thread");
        }
    }
}

impl Drop for Running {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Starts a server on an ephemeral port in a background runtime.
pub fn start(config_text: &str) -> Running {
    let mut config = ServerConfig::parse(config_text).expect("config");
    config.port = 0;
    let (ready_tx, ready_rx) = std::sync::mpsc::channel();
    let (stop_tx, stop_rx) = oneshot::channel::<()>();
    let thread = std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let server = Server::bind(config).await.expect("bind");
            ready_tx.send((server.local_addr(), server.state().clone())).unwrap();
            server
                .run(async move {
                    let _ = stop_rx.await;
                })
                .await
                .expect("run");
        });
    });
    let (addr, state) = ready_rx.recv().expect("server started");
    Running { addr, state, stop: Some(stop_tx), thread: Some(thread) }
}

pub fn start_in(dir: &Path, extra: &str) -> Running {
    start(&format!("storage.path={}\n{extra}", dir.display()))
}

pub fn zeros_blob() -> String {
    BitstringDomain::encode(&[false; 64])
}

fn line(record: &ArtifactRecord) -> String {
    serde_json::to_string(record).unwrap()
}

/// A valid all-zeros bitstring root and a picture record whose genome does
/// not parse, as raw store lines.
pub fn seeded_store_lines() -> (Vec<String>, String, String) {
    let zeros = zeros_blob();
    let a = ArtifactRecord {
        artifact_id: compute_artifact_id::<&str>(BITSTRING_ID, zeros.as_bytes(), &[]),
        seq: 1,
        domain_id: BITSTRING_ID.into(),
        parent_ids: vec![],
        generation: 0,
        author: "fixture".into(),
        created_at: 1_700_000_000_000,
        tags: vec!["seed".into()],
        genome_blob: zeros,
    };
    let bad_blob = "{\"nodes\":[]}".to_string();
    let b = ArtifactRecord {
        artifact_id: compute_artifact_id::<&str>(PICTURE_ID, bad_blob.as_bytes(), &[]),
        seq: 2,
        domain_id: PICTURE_ID.into(),
        parent_ids: vec![],
        generation: 0,
        author: "fixture".into(),
        created_at: 1_700_000_000_001,
        tags: vec![],
        genome_blob: bad_blob,
    };
    (vec![line(&a), line(&b)], a.artifact_id, b.artifact_id)
}
