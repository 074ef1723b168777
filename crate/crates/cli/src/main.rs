use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pdfqa_core::dataset::{export_training_set, validate_set};
use pdfqa_core::metrics::{evaluate, EvalPair};
use pdfqa_core::{parse_document, Sidecar, Store, TextMap};
use pdfqa_server::ServerConfig;

#[derive(Parser)]
#[command(name = "pdfqa", version, about = "Extractive question answering over PDFs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP server.
    Serve {
        /// TOML config file; PORT, DATA_DIR, MAX_UPLOAD_BYTES and BACKENDS override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the word layer of a PDF as sidecar JSON (or plain page text).
    Extract {
        pdf: PathBuf,
        #[arg(long)]
        text: bool,
    },
    /// Score a JSON array of {prediction, gold} pairs.
    Eval {
        pairs: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// List the sessions in a data directory.
    Sessions {
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
    /// Write the training set for the given sessions.
    Export {
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
        #[arg(long = "session", required = true)]
        sessions: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Serve { config } => serve(config.as_deref()),
        Command::Extract { pdf, text } => extract(&pdf, text),
        Command::Eval { pairs, json } => eval(&pairs, json),
        Command::Sessions { data_dir } => sessions(&data_dir),
        Command::Export { data_dir, sessions, out } => export(&data_dir, &sessions, out.as_deref()),
    }
}

fn serve(config: Option<&Path>) -> Result<()> {
    let config = ServerConfig::load(config)?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(pdfqa_server::run(config))?;
    Ok(())
}

fn extract(path: &Path, text: bool) -> Result<()> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let doc = parse_document(&bytes, &name)?;
    let mut out = std::io::stdout().lock();
    if text {
        for page in &doc.pages {
            writeln!(out, "{}", TextMap::build(page).page_text())?;
        }
    } else {
        serde_json::to_writer_pretty(&mut out, &Sidecar::from_document(&doc))?;
        writeln!(out)?;
    }
    Ok(())
}

fn eval(path: &Path, json: bool) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pairs: Vec<EvalPair> = serde_json::from_str(&text).context("expected an array of {prediction, gold}")?;
    let report = evaluate(&pairs);
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_table());
    }
    Ok(())
}

fn sessions(data_dir: &Path) -> Result<()> {
    let store = Store::open(data_dir)?;
    for s in store.list_sessions()? {
        println!(
            "{}  {:<12} docs={:<3} records={:<4} {}",
            s.session_id,
            s.user,
            s.doc_count,
            s.record_count,
            s.created_at.to_rfc3339()
        );
    }
    Ok(())
}

fn export(data_dir: &Path, sessions: &[String], out: Option<&Path>) -> Result<()> {
    let store = Store::open(data_dir)?;
    let records = store.select_for_training(sessions)?;
    if records.is_empty() {
        bail!("no annotations in {}", sessions.join(", "));
    }
    let set = export_training_set(&records, sessions.to_vec(), |id| store.document(id).ok().flatten())?;
    let problems = validate_set(&set);
    if let Some((i, what)) = problems.first() {
        bail!("example {i} is malformed: {what}");
    }
    let json = serde_json::to_string_pretty(&set)?;
    match out {
        Some(p) => {
            fs::write(p, json).with_context(|| format!("writing {}", p.display()))?;
            log::info!("wrote {} examples to {}", set.examples.len(), p.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}
