use std::path::PathBuf;
use std::process::ExitCode;

use aa_cli::tools::{load_snapshot, read_stopwords, stats, StatsReport, Tabular};
use aa_core::stats::TextOptions;
use aa_core::SuiteConfig;
use clap::Parser;

#[derive(Parser)]
#[command(
    name = "aa-stats",
    version,
    about = "Activity, time and word statistics"
)]
struct Args {
    #[arg(long)]
    journal: Option<PathBuf>,
    /// summary, histogram:<scale>, tokens or graph.
    #[arg(long, default_value = "summary")]
    report: StatsReport,
    /// One stopword per line; replaces the built-in list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long, conflicts_with = "tsv")]
    json: bool,
    #[arg(long)]
    tsv: bool,
    /// Count tags as word tokens.
    #[arg(long)]
    include_tags: bool,
    /// Keep lost-timeslot markers in the text.
    #[arg(long)]
    include_machine: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run(args: Args) -> anyhow::Result<()> {
    let config = SuiteConfig::resolve(args.config.as_deref())?;
    let journal = args.journal.unwrap_or(config.journal.clone());
    let snapshot = load_snapshot(&journal, config.slot_secs)?;
    let mut options = TextOptions {
        exclude_machine: !args.include_machine,
        exclude_tags: !args.include_tags,
        ..TextOptions::default()
    };
    if let Some(p) = &args.stopwords {
        options.stopwords = read_stopwords(p)?;
    }
    let out = if args.json || (!args.tsv && args.report == StatsReport::Summary) {
        Tabular::Json
    } else {
        Tabular::Tsv
    };
    print!("{}", stats(&snapshot, args.report, &options, out));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aa-stats: {e:#}");
            ExitCode::FAILURE
        }
    }
}
