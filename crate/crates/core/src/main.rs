use std::path::PathBuf;
use std::process::ExitCode;

use causal_elicit::discovery::CiStatistic;
use causal_elicit::llm::ProviderKind;
use causal_elicit::pipeline::{Pipeline, RunConfig, RunOptions, ScoreChoice, Stage};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

#[derive(Parser)]
#[command(name = "causal-elicit", version, about = "Elicit candidate causal graphs from LLM-generated narratives")]
struct Cli {
    /// TOML file whose keys mirror the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample documents for the topic (or import them with --corpus).
    Generate(StageArgs),
    /// Extract event lists from the documents.
    Extract(StageArgs),
    /// Build the canonical event map.
    Canonicalize(StageArgs),
    /// Build and prune the incidence matrix.
    Matrix(StageArgs),
    /// Run PC, GES and LiNGAM and write the report.
    Discover(StageArgs),
    /// Run every stage that is not up to date.
    Run {
        #[command(flatten)]
        args: StageArgs,
        /// Force this stage and all later ones.
        #[arg(long, value_enum)]
        from: Option<StageArg>,
        /// Delete the topic's run directory first.
        #[arg(long)]
        fresh: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Generate,
    Extract,
    Canonicalize,
    Matrix,
    Discover,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Generate => Stage::Generate,
            StageArg::Extract => Stage::Extract,
            StageArg::Canonicalize => Stage::Canonicalize,
            StageArg::Matrix => Stage::Matrix,
            StageArg::Discover => Stage::Discover,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderArg {
    Mock,
    Remote,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreArg {
    Bic,
    Bdeu,
}

#[derive(Clone, Copy, ValueEnum)]
enum CiArg {
    Gsq,
    Pearson,
}

#[derive(Args)]
struct StageArgs {
    #[arg(long)]
    topic: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Import documents from DIR/{topic_slug}/documents.jsonl instead of generating.
    #[arg(long, value_name = "DIR")]
    corpus: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Representatives per cluster shown to the namer.
    #[arg(long = "m")]
    representatives: Option<usize>,
    /// Also run the incremental registry over the cluster names.
    #[arg(long)]
    refine: bool,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_cond: Option<usize>,
    #[arg(long, value_enum)]
    ci_test: Option<CiArg>,
    #[arg(long, value_enum)]
    score: Option<ScoreArg>,
    #[arg(long)]
    prune: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    provider: Option<ProviderArg>,
    #[arg(long)]
    base_url: Option<String>,
    /// Name of the environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long)]
    chat_model: Option<String>,
    #[arg(long)]
    embed_model: Option<String>,
    #[arg(long)]
    max_parallel: Option<usize>,
}

impl StageArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(out, n, k_max, representatives, tau, alpha, max_cond, prune, seed);
        if self.topic.is_some() {
            cfg.topic = self.topic.clone();
        }
        if self.refine {
            cfg.refine = true;
        }
        if let Some(s) = self.score {
            cfg.score = match s {
                ScoreArg::Bic => ScoreChoice::Bic,
                ScoreArg::Bdeu => ScoreChoice::Bdeu,
            };
        }
        if let Some(c) = self.ci_test {
            cfg.ci_test = match c {
                CiArg::Gsq => CiStatistic::GSquared,
                CiArg::Pearson => CiStatistic::PearsonChi2,
            };
        }
        if let Some(p) = self.provider {
            cfg.provider = match p {
                ProviderArg::Mock => ProviderKind::Mock,
                ProviderArg::Remote => ProviderKind::Remote,
            };
        }
        for (dst, src) in [
            (&mut cfg.base_url, &self.base_url),
            (&mut cfg.api_key_env, &self.api_key_env),
            (&mut cfg.chat_model, &self.chat_model),
            (&mut cfg.embed_model, &self.embed_model),
        ] {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        if self.max_parallel.is_some() {
            cfg.max_parallel = self.max_parallel;
        }
    }
}

fn open(config: Option<&PathBuf>, args: &StageArgs) -> causal_elicit::Result<Pipeline> {
    let mut cfg = match config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    args.apply(&mut cfg);
    let topic = cfg
        .topic
        .clone()
        .ok_or_else(|| causal_elicit::Error::InvalidConfig("--topic is required (or set topic in the config)".into()))?;
    Pipeline::new(&topic, cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { args, from, fresh } => open(cli.config.as_ref(), args).and_then(|mut p| {
            let opts = RunOptions {
                from: from.map(Stage::from),
                fresh: *fresh,
                corpus: args.corpus.clone(),
                ..RunOptions::default()
            };
            let outcome = p.run(&opts)?;
            println!(
                "{}: ran [{}], skipped [{}], {} provider call(s)",
                p.paths().dir.display(),
                outcome.executed.iter().map(|s| s.name()).collect::<Vec<_>>().join(", "),
                outcome.skipped.iter().map(|s| s.name()).collect::<Vec<_>>().join(", "),
                outcome.provider_calls
            );
            Ok(())
        }),
        Command::Generate(args)
        | Command::Extract(args)
        | Command::Canonicalize(args)
        | Command::Matrix(args)
        | Command::Discover(args) => {
            let stage = match &cli.command {
                Command::Generate(_) => Stage::Generate,
                Command::Extract(_) => Stage::Extract,
                Command::Canonicalize(_) => Stage::Canonicalize,
                Command::Matrix(_) => Stage::Matrix,
                _ => Stage::Discover,
            };
            open(cli.config.as_ref(), args).and_then(|mut p| {
                p.run_stage(stage, args.corpus.as_deref())?;
                println!("{}: {stage} done", p.paths().dir.display());
                Ok(())
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
