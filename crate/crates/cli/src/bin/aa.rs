use std::io::BufRead;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use aa_cli::client::{push, Client, Spool};
use aa_cli::config::{ClientConfig, Overrides};
use aa_cli::session::{session_loop, LinePrompter, LoopConfig};
use aa_core::{Source, Timestamp};
use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

const EXIT_SPOOLED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "aa",
    version,
    about = "Algorithmic Autoregulation terminal client"
)]
struct Cli {
    /// Shout server base URL.
    #[arg(long, global = true)]
    server: Option<String>,
    #[arg(long, global = true)]
    nick: Option<String>,
    /// Slot length, e.g. "15m".
    #[arg(long, global = true, value_parser = humantime::parse_duration)]
    slot: Option<Duration>,
    #[arg(long, global = true, value_parser = humantime::parse_duration)]
    tolerance: Option<Duration>,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    spool: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Log one shout.
    Shout {
        text: Vec<String>,
    },
    /// Open a session and prompt once per slot.
    Start {
        /// Only send the start message.
        #[arg(long)]
        detach: bool,
    },
    /// Close the open session, pushing the spool first.
    Stop,
    /// Send spooled shouts.
    Push,
    Status,
    Report {
        #[arg(short, long)]
        n: Option<usize>,
    },
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn flush_spool(client: &Client, spool: &Spool) -> anyhow::Result<bool> {
    if spool.is_empty()? {
        return Ok(true);
    }
    let out = push(client, spool)?;
    println!("pushed {} spooled shouts", out.sent.len());
    if let Some(e) = out.error {
        eprintln!("{} still spooled: {e}", out.remaining);
        return Ok(false);
    }
    Ok(true)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let config = ClientConfig::resolve(
        cli.config.as_deref(),
        &Overrides {
            server: cli.server,
            nick: cli.nick,
            slot: cli.slot,
            tolerance: cli.tolerance,
            spool: cli.spool,
        },
    )?;
    let client = Client::new(&config.server_url);
    let spool = Spool::new(&config.spool);
    match cli.command {
        Command::Shout { text } => {
            let text = text.join(" ");
            if text.trim().is_empty() {
                bail!("empty shout; nothing sent");
            }
            match client.shout(&config.nick, &text) {
                Ok(v) => println!("{}", v["id"]),
                Err(e) if e.is_transient() => {
                    spool.append(&config.nick, &text, Timestamp::now(), Source::Http)?;
                    eprintln!(
                        "{e}; spooled to {} ({} waiting)",
                        spool.path().display(),
                        spool.len()?
                    );
                    return Ok(ExitCode::from(EXIT_SPOOLED));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Start { detach: true } => {
            let v = client.message(&config.nick, "start", Some(Timestamp::now()), Source::Http)?;
            println!("{}", v["session"].as_str().unwrap_or_default());
        }
        Command::Start { detach: false } => {
            let (tx, rx) = std::sync::mpsc::channel();
            std::thread::spawn(move || {
                for line in std::io::stdin().lock().lines() {
                    let Ok(line) = line else { break };
                    if tx.send(line).is_err() {
                        break;
                    }
                }
            });
            let mut prompter = LinePrompter::new(rx, std::io::stdout());
            let outcome = session_loop(
                &client,
                &spool,
                &LoopConfig::new(&config.nick, config.slot, config.tolerance),
                &mut prompter,
            )?;
            if let Some(stopped) = &outcome.stopped {
                print_json(&stopped["report"]);
            }
            if !spool.is_empty()? {
                return Ok(ExitCode::from(EXIT_SPOOLED));
            }
        }
        Command::Stop => {
            let flushed = flush_spool(&client, &spool)?;
            let v = client.message(&config.nick, "stop", Some(Timestamp::now()), Source::Http)?;
            print_json(&v);
            if !flushed {
                return Ok(ExitCode::from(EXIT_SPOOLED));
            }
        }
        Command::Push => {
            if !flush_spool(&client, &spool)? {
                return Ok(ExitCode::from(EXIT_SPOOLED));
            }
        }
        Command::Status => {
            println!("server\t{}", config.server_url);
            println!("nick\t{}", config.nick);
            println!("spool\t{}\t{}", spool.path().display(), spool.len()?);
            match client.report(Some(0)) {
                Ok(report) => {
                    let open = report["open_sessions"]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .find(|s| s["user"] == config.nick.as_str());
                    match open {
                        Some(s) => println!(
                            "session\t{}\topen since {}",
                            s["id"].as_str().unwrap_or("?"),
                            s["start"].as_str().unwrap_or("?")
                        ),
                        None => println!("session\tnone"),
                    }
                }
                Err(e) => println!("reachable\tno ({e})"),
            }
        }
        Command::Report { n } => print_json(&client.report(n).context("fetching report")?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("aa: {e:#}");
            ExitCode::FAILURE
        }
    }
}
