use std::path::PathBuf;
use std::process::ExitCode;

use aa_cli::tools::{export, load_snapshot};
use aa_core::rdf::vocab::Vocabulary;
use aa_core::rdf::RdfFormat;
use aa_core::SuiteConfig;
use clap::Parser;

const EXIT_VIOLATIONS: u8 = 4;

#[derive(Parser)]
#[command(name = "aa-export", version, about = "Export the journal as RDF")]
struct Args {
    #[arg(long)]
    journal: Option<PathBuf>,
    /// ntriples or turtle.
    #[arg(long, default_value = "ntriples")]
    format: RdfFormat,
    /// Namespace for vocabulary terms and instances.
    #[arg(long)]
    base: Option<String>,
    /// Report constraint violations on stderr and fail if any.
    #[arg(long)]
    validate: bool,
    /// Leave the ontology out.
    #[arg(long)]
    data_only: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run(args: Args) -> anyhow::Result<ExitCode> {
    let config = SuiteConfig::resolve(args.config.as_deref())?;
    let journal = args.journal.unwrap_or(config.journal.clone());
    let vocab = Vocabulary::new(args.base.as_deref().unwrap_or(&config.namespace));
    let snapshot = load_snapshot(&journal, config.slot_secs)?;
    let out = export(&snapshot, &vocab, args.format, !args.data_only);
    match &args.output {
        Some(p) => std::fs::write(p, &out.document)?,
        None => print!("{}", out.document),
    }
    if args.validate {
        eprintln!("{}", serde_json::to_string(&out.violations)?);
        if !out.violations.is_empty() {
            return Ok(ExitCode::from(EXIT_VIOLATIONS));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("aa-export: {e:#}");
            ExitCode::FAILURE
        }
    }
}
