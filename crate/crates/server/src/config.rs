use std::net::IpAddr;
use std::path::{Path, PathBuf};

use thiserror::Error;
use win_core::session::{DEFAULT_POP_SIZE, MAX_POP_SIZE, MIN_POP_SIZE};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: {message}")]
    Invalid { line: usize, message: String },
}

/// Server settings, read from a `key=value` file.
///
/// Blank lines and lines starting with `#` are ignored. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub storage_path: PathBuf,
    pub port: u16,
    pub bind: IpAddr,
    pub session_ttl_seconds: u64,
    pub pop_size_default: usize,
    /// Directory served at `/` (the browser client build), if any.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            storage_path: PathBuf::from("win-store"),
            port: 8080,
            bind: IpAddr::from([127, 0, 0, 1]),
            session_ttl_seconds: 3600,
            pop_size_default: DEFAULT_POP_SIZE,
            static_dir: None,
        }
    }
}

impl ServerConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<ServerConfig, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        ServerConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ServerConfig, ConfigError> {
        let mut cfg = ServerConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let invalid = |message: String| ConfigError::Invalid { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad_value = |what: &str| invalid(format!("{key}: {value:?} is not {what}"));
            match key {
                "storage.path" => {
                    if value.is_empty() {
                        return Err(bad_value("a path"));
                    }
                    cfg.storage_path = PathBuf::from(value);
                }
                "server.port" => cfg.port = value.parse().map_err(|_| bad_value("a port number"))?,
                "server.bind" => cfg.bind = value.parse().map_err(|_| bad_value("an IP address"))?,
                "session.ttl_seconds" => {
                    cfg.session_ttl_seconds = value.parse().map_err(|_| bad_value("a number of seconds"))?
                }
                "session.pop_size_default" => {
                    let n: usize = value.parse().map_err(|_| bad_value("an integer"))?;
                    if !(MIN_POP_SIZE..=MAX_POP_SIZE).contains(&n) {
                        return Err(bad_value(&format!("in {MIN_POP_SIZE}..={MAX_POP_SIZE}")));
                    }
                    cfg.pop_size_default = n;
                }
                "server.static_dir" => cfg.static_dir = Some(PathBuf::from(value)),
                other => return Err(invalid(format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }
}
