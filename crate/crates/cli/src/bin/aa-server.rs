use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use aa_cli::server::{serve, App};
use aa_core::{FileJournal, Store, SuiteConfig, SystemClock};
use anyhow::Context;
use clap::Parser;

#[derive(Parser)]
#[command(name = "aa-server", version, about = "Shout server")]
struct Args {
    /// Suite configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bind: Option<String>,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    journal: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    threads: usize,
}

fn run(args: Args) -> anyhow::Result<()> {
    let mut config = SuiteConfig::resolve(args.config.as_deref())?;
    if let Some(b) = args.bind {
        config.bind = b;
    }
    if let Some(p) = args.port {
        config.port = p;
    }
    if let Some(j) = args.journal {
        config.journal = j;
    }
    let store = Store::open(
        FileJournal::new(&config.journal),
        Arc::new(SystemClock),
        config.store_config(),
    )
    .with_context(|| format!("opening journal {}", config.journal.display()))?;
    log::info!(
        "replayed {} shouts from {}",
        store.state().shouts_by_created().len(),
        config.journal.display()
    );
    let handle = serve(
        &format!("{}:{}", config.bind, config.port),
        Arc::new(App::new(store)),
        args.threads,
    )
    .map_err(anyhow::Error::msg)?;
    eprintln!("aa-server listening on {}", handle.url());
    handle.join();
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aa-server: {e:#}");
            ExitCode::FAILURE
        }
    }
}
