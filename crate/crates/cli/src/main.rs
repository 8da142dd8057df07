//! `oracheck`: run checker campaigns over a dataset and emit report bundles.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use oracheck::alignment::PhiMode;
use oracheck::harness::{
    ingest_docred, ingest_msrp, run_campaign, CampaignConfig, Dataset, ItemState, Mode, ReportBundle, BUNDLE_FILE,
};
use oracheck::linearity::ClassPool;
use oracheck::lingua::{LinguaAdapter, SidecarAdapter, StubAdapter};
use oracheck::oracle::{LiveBackend, Oracle, ReplayBackend, ScriptedBackend, Transcript};

const TRANSCRIPT_FILE: &str = "transcript.jsonl";

#[derive(Parser)]
#[command(name = "oracheck", version, about = "Check answers from an untrusted language-model oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linearity test of entity extraction over single sentences.
    Linearity(RunArgs),
    /// Prove the oracle's "yes" equivalence decisions.
    ProveYes(RunArgs),
    /// Test the oracle's "no" equivalence decisions.
    CheckNo(RunArgs),
    /// Ask the oracle to accept its own paraphrases.
    Roundtrip(RunArgs),
    /// Verify a bundle and print its markdown tables.
    Report {
        /// A bundle.json file or the directory holding one.
        bundle: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    /// `.tsv`/`.txt` as MSRP, anything else as DOCRED.
    Auto,
    Docred,
    Msrp,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdapterKind {
    Stub,
    Sidecar,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset file: a DOCRED JSON array or an MSRP TSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    format: InputFormat,
    /// live | scripted:<table.json> | replay:<transcript.jsonl>
    #[arg(long, default_value = "live")]
    oracle: OracleSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extractions per sentence in the linearity test.
    #[arg(long, default_value_t = 11)]
    repeats: usize,
    /// Linearity trials per sentence.
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value = "or")]
    phi: PhiMode,
    /// Paraphrase tests per "no" claim.
    #[arg(long, default_value_t = 1)]
    n_tests: usize,
    /// Prompt 6 replies per phrase pair.
    #[arg(long, default_value_t = 1)]
    decision_repeats: usize,
    /// Transcript used as a reply cache; read if present, rewritten after the run.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AdapterKind::Stub)]
    adapter: AdapterKind,
    /// Per-class replacement pool (JSON object of class -> surfaces).
    #[arg(long)]
    class_pool: Option<PathBuf>,
    /// Work-pool width; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
enum OracleSpec {
    Live,
    Scripted(PathBuf),
    Replay(PathBuf),
}

impl FromStr for OracleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "live" => Ok(OracleSpec::Live),
            Some(("scripted", p)) if !p.is_empty() => Ok(OracleSpec::Scripted(p.into())),
            Some(("replay", p)) if !p.is_empty() => Ok(OracleSpec::Replay(p.into())),
            _ => Err(format!("'{s}' is not live, scripted:<table> or replay:<transcript>")),
        }
    }
}

fn load_dataset(path: &Path, format: InputFormat) -> Result<Dataset> {
    let msrp = match format {
        InputFormat::Msrp => true,
        InputFormat::Docred => false,
        InputFormat::Auto => matches!(path.extension().and_then(|e| e.to_str()), Some("tsv" | "txt")),
    };
    let dataset = if msrp {
        Dataset::Pairs(ingest_msrp(path)?)
    } else {
        Dataset::Sentences(ingest_docred(path)?)
    };
    Ok(dataset)
}

fn build_oracle(spec: &OracleSpec, cache: Option<&Path>) -> Result<Oracle> {
    let oracle = match spec {
        OracleSpec::Live => Oracle::new(LiveBackend::from_env()?),
        OracleSpec::Scripted(p) => {
            Oracle::new(ScriptedBackend::load(p).with_context(|| format!("loading script {}", p.display()))?)
        }
        OracleSpec::Replay(p) => {
            Oracle::new(ReplayBackend::load(p).with_context(|| format!("loading transcript {}", p.display()))?)
        }
    };
    match cache {
        Some(c) if c.exists() => Ok(oracle.with_transcript(Transcript::load(c)?)),
        _ => Ok(oracle),
    }
}

fn build_adapter(kind: AdapterKind) -> Result<Box<dyn LinguaAdapter>> {
    Ok(match kind {
        AdapterKind::Stub => Box::new(StubAdapter),
        AdapterKind::Sidecar => Box::new(SidecarAdapter::from_env()?),
    })
}

fn run(mode: Mode, args: RunArgs) -> Result<()> {
    let mut config = CampaignConfig::new(mode, args.seed);
    config.jobs = args.jobs;
    config.linearity.repeats = args.repeats;
    config.linearity.trials = args.trials;
    config.linearity.pool = args
        .class_pool
        .as_deref()
        .map(ClassPool::load)
        .transpose()?;
    config.align.mode = args.phi;
    config.align.decision_repeats = args.decision_repeats;
    config.no_test.n_tests = args.n_tests;
    config.validate()?;

    let dataset = load_dataset(&args.input, args.format)?;
    if mode.needs_pairs() && !matches!(dataset, Dataset::Pairs(_)) {
        bail!("{mode} needs a sentence-pair (MSRP) dataset");
    }
    let oracle = build_oracle(&args.oracle, args.cache.as_deref())?;
    let adapter = build_adapter(args.adapter)?;
    let bundle = run_campaign(&config, &dataset, &oracle, adapter.as_ref())?;
    bundle.write(&args.out)?;
    oracle.save_transcript(args.out.join(TRANSCRIPT_FILE))?;
    if let Some(c) = &args.cache {
        oracle.save_transcript(c)?;
    }
    let failed = bundle.aggregates.states.get(&ItemState::Failed).copied().unwrap_or(0);
    eprintln!(
        "{} items, {} failed; bundle written to {}",
        bundle.records.len(),
        failed,
        args.out.join(BUNDLE_FILE).display()
    );
    Ok(())
}

fn report(path: &Path) -> Result<()> {
    let file = if path.is_dir() { path.join(BUNDLE_FILE) } else { path.to_path_buf() };
    let bundle = ReportBundle::load(&file)?;
    print!("{}", bundle.to_markdown());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Linearity(a) => run(Mode::Linearity, a),
        Command::ProveYes(a) => run(Mode::ProveYes, a),
        Command::CheckNo(a) => run(Mode::CheckNo, a),
        Command::Roundtrip(a) => run(Mode::Roundtrip, a),
        Command::Report { bundle } => report(&bundle),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
