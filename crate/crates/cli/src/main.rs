//! `win`: run the server, export phylogenies, drive automated evolution and
//! check store integrity.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 domain or data error,
//! 4 integrity failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use win_core::archive::{check_records, parse_log, LOG_FILE};
use win_core::session::{policy_by_name, run_automated, AutoRun, SessionConfig};
use win_core::{Archive, ArchiveError, DomainRegistry};
use win_server::{Server, ServerConfig, ServerError};

const USAGE: u8 = 2;
const DATA: u8 = 3;
const INTEGRITY: u8 = 4;

#[derive(Parser)]
#[command(name = "win", version, about = "Branchable interactive evolution server and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP server.
    Serve {
        /// key=value config file; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides server.port; 0 picks a free port.
        #[arg(long)]
        port: Option<u16>,
    },
    /// Write one domain's phylogeny as Graphviz DOT or JSON.
    Export {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        domain: String,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        /// Output file; stdout when omitted.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Evolve with an automated selection policy, publishing as it goes.
    Auto {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        domain: String,
        #[arg(long, value_enum)]
        policy: PolicyName,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        publish_every: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "auto")]
        author: String,
    },
    /// Check every archive invariant of a store.
    ValidateStore {
        #[arg(long)]
        store: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyName {
    Random,
    Onemax,
}

impl PolicyName {
    fn as_str(self) -> &'static str {
        match self {
            PolicyName::Random => "random",
            PolicyName::Onemax => "onemax",
        }
    }
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

impl From<ArchiveError> for Failure {
    fn from(e: ArchiveError) -> Failure {
        let code = match e {
            ArchiveError::CorruptStore { .. } => INTEGRITY,
            _ => DATA,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. }) { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level)).init();

    let result = match cli.command {
        Command::Serve { config, port } => serve(config.as_deref(), port),
        Command::Export { store, domain, format, output } => export(&store, &domain, format, output.as_deref()),
        Command::Auto { store, domain, policy, steps, publish_every, seed, author } => {
            let run = AutoRun { domain_id: domain, steps, publish_every, rng_seed: seed, author };
            auto(&store, &run, policy)
        }
        Command::ValidateStore { store } => validate_store(&store),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("win: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn open_archive(store: &Path) -> Result<Archive, Failure> {
    Ok(Archive::open(store, Arc::new(DomainRegistry::with_builtins()))?)
}

fn serve(config: Option<&Path>, port: Option<u16>) -> Result<(), Failure> {
    let mut cfg = match config {
        Some(path) => ServerConfig::load(path).map_err(|e| Failure::new(USAGE, e.to_string()))?,
        None => ServerConfig::default(),
    };
    if let Some(p) = port {
        cfg.port = p;
    }
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::new(DATA, e.to_string()))?;
    rt.block_on(async move {
        let server = Server::bind(cfg).await.map_err(|e| match e {
            ServerError::Bind { .. } => Failure::new(USAGE, e.to_string()),
            ServerError::Archive(a) => Failure::from(a),
            ServerError::Io(_) => Failure::new(DATA, e.to_string()),
        })?;
        println!("listening on http://{}", server.local_addr());
        let _ = std::io::stdout().flush();
        server
            .run(async {
                let _ = tokio::signal::ctrl_c().await;
                log::info!("shutting down");
            })
            .await
            .map_err(|e| Failure::new(DATA, e.to_string()))
    })
}

fn export(store: &Path, domain: &str, format: Format, output: Option<&Path>) -> Result<(), Failure> {
    let archive = open_archive(store)?;
    let graph = archive.phylogeny(domain)?;
    let text = match format {
        Format::Dot => graph.to_dot(),
        Format::Json => serde_json::to_string_pretty(&graph).expect("graph serializes") + "\n",
    };
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::new(DATA, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn auto(store: &Path, run: &AutoRun, policy: PolicyName) -> Result<(), Failure> {
    let archive = open_archive(store)?;
    let mut policy = policy_by_name(policy.as_str()).expect("every PolicyName is registered");
    let report = run_automated(&archive, &SessionConfig::default(), run, policy.as_mut())
        .map_err(|e| Failure::new(DATA, e.to_string()))?;
    archive.sync()?;
    let mut out = std::io::stdout().lock();
    for id in &report.published {
        let _ = writeln!(out, "{id}");
    }
    if let Some(best) = report.best_fitness.last() {
        log::info!("best fitness {best}");
    }
    Ok(())
}

fn validate_store(store: &Path) -> Result<(), Failure> {
    if !store.is_dir() {
        return Err(Failure::new(USAGE, format!("no store directory at {}", store.display())));
    }
    let path = store.join(LOG_FILE);
    let bytes = match std::fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(Failure::new(DATA, format!("cannot read {}: {e}", path.display()))),
    };
    let log = match parse_log(&bytes) {
        Ok(log) => log,
        Err(e) => {
            println!("{e}");
            return Err(Failure::new(INTEGRITY, "store is corrupt"));
        }
    };
    if log.torn_tail > 0 {
        eprintln!("warning: {} bytes of an interrupted write after the last record", log.torn_tail);
    }
    let report = check_records(&log.records, &DomainRegistry::with_builtins());
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.is_ok() {
        println!("ok: {} records", report.records);
        Ok(())
    } else {
        for v in &report.violations {
            println!("{v}");
        }
        Err(Failure::new(INTEGRITY, format!("{} violations in {} records", report.violations.len(), report.records)))
    }
}
