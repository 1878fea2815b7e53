use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;

use aa_cli::bot::{run, BotConfig, Handler, ReplyMode};
use aa_cli::client::{Client, Spool};
use aa_cli::config::load_toml;
use clap::Parser;

#[derive(Parser)]
#[command(
    name = "aa-bot",
    version,
    about = "IRC bot logging ';aa ' lines as shouts"
)]
struct Args {
    /// Bot configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// IRC server host:port.
    #[arg(long)]
    irc: Option<String>,
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    nick: Option<String>,
    /// Shout server base URL.
    #[arg(long, env = "AA_SERVER")]
    server: Option<String>,
    #[arg(long)]
    no_tls: bool,
    /// Reply by NOTICE to the sender instead of in the channel.
    #[arg(long)]
    notice: bool,
}

fn run_bot(args: Args) -> anyhow::Result<()> {
    let mut config: BotConfig = match &args.config {
        Some(p) => load_toml(p)?,
        None => BotConfig::default(),
    };
    if let Some(v) = args.irc {
        config.server = v;
    }
    if let Some(v) = args.channel {
        config.channel = v;
    }
    if let Some(v) = args.nick {
        config.nick = v;
    }
    if let Some(v) = args.server {
        config.aa_server = v;
    }
    if args.no_tls {
        config.tls = false;
    }
    if args.notice {
        config.reply_mode = ReplyMode::Notice;
    }
    let mut handler = Handler::new(
        Client::new(&config.aa_server),
        Some(Spool::new(&config.spool)),
    );
    run(&config, &mut handler, &AtomicBool::new(false))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run_bot(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aa-bot: {e:#}");
            ExitCode::FAILURE
        }
    }
}
