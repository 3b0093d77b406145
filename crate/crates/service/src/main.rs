use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;

use scenesuggest_core::priors::load_priors;
use scenesuggest_core::ModelDb;
use scenesuggest_service::{router, AppState, EventLog};

/// Serves context-driven placement suggestions over HTTP.
#[derive(Parser)]
#[command(name = "scenesuggest-server", version)]
struct Args {
    /// Learned priors file.
    #[arg(long)]
    priors: PathBuf,
    /// Model database file.
    #[arg(long)]
    models: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Interaction log (JSON lines, appended).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match run(args).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
    }
}

async fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let priors = load_priors(&args.priors)?;
    let models = ModelDb::load(&args.models)?;
    let log = match &args.log {
        Some(path) => EventLog::with_file(path)?,
        None => EventLog::in_memory(),
    };
    let state = Arc::new(AppState::new(priors, models, log));
    let addr: SocketAddr = format!("{}:{}", args.host, args.port).parse()?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
