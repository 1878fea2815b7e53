use std::path::PathBuf;
use std::process::ExitCode;

use aa_cli::tools::{mine_into, parse_mode};
use aa_core::miner::{DedupKey, SourceFile};
use aa_core::SuiteConfig;
use clap::Parser;

#[derive(Parser)]
#[command(
    name = "aa-mine",
    version,
    about = "Harvest shouts from logs and dumps"
)]
struct Args {
    /// Source specification file (TOML, one [[source]] table per input).
    #[arg(long)]
    source: PathBuf,
    /// prefix, tags or all.
    #[arg(long, default_value = "prefix")]
    mode: String,
    /// Tags for --mode tags; defaults to the ubiquitous set.
    #[arg(long = "tag")]
    tags: Vec<String>,
    /// Journals whose shouts count as already stored; defaults to --journal.
    #[arg(long)]
    corpus: Vec<PathBuf>,
    /// Journal receiving kept shouts. Stop the server first.
    #[arg(long)]
    journal: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Key duplicates on nick and text instead of text alone.
    #[arg(long)]
    by_nick: bool,
    #[arg(long)]
    dry_run: bool,
}

fn run(args: Args) -> anyhow::Result<()> {
    let config = SuiteConfig::resolve(args.config.as_deref())?;
    let journal = args.journal.unwrap_or(config.journal.clone());
    let specs = SourceFile::load(&args.source)?.sources;
    let mode = parse_mode(&args.mode, &args.tags)?;
    let corpus: Vec<&std::path::Path> = if args.corpus.is_empty() {
        vec![journal.as_path()]
    } else {
        args.corpus.iter().map(PathBuf::as_path).collect()
    };
    let key = if args.by_nick {
        DedupKey::NickText
    } else {
        DedupKey::Text
    };
    let report = mine_into(
        &specs,
        &mode,
        key,
        &corpus,
        &journal,
        config.store_config(),
        args.dry_run,
    )?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aa-mine: {e:#}");
            ExitCode::FAILURE
        }
    }
}
