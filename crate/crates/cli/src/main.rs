use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spreadscope_core::report::{run_stages, PipelineConfig, RunManifest, Stage};
use spreadscope_core::synth::write_mini_fixture;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Engagement, causality, topic and duplicate analysis of disinformation and debunk posts.
#[derive(Parser)]
#[command(name = "toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load debunks and posts, filter, match links and count daily posts.
    Ingest(RunArgs),
    /// Engagement metrics, lag distribution, hashtags and country crosstab.
    Engagement(RunArgs),
    /// ADF, VAR lag selection, Granger tests, IRF and FEVD.
    Causality(RunArgs),
    /// Claim clustering, c-TF-IDF topic words and cluster timelines.
    Topics(RunArgs),
    /// Earlier debunks of near-identical claims.
    Dedup(RunArgs),
    /// SVG figures from the stage artifacts.
    Report(RunArgs),
    /// Every stage in dependency order.
    All(RunArgs),
    /// Write the synthetic mini fixture (inputs plus config) to a directory.
    Fixture {
        #[arg(long, default_value = "fixture")]
        dir: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> Result<PipelineConfig, ExitCode> {
    let mut cfg = PipelineConfig::load(&args.config).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(if e.is_validation() {
            EXIT_VALIDATION
        } else {
            EXIT_RUNTIME
        })
    })?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = std::path::absolute(out).unwrap_or_else(|_| out.clone());
    }
    Ok(cfg)
}

fn summarize(manifest: &RunManifest, stages: &[Stage]) {
    for rec in manifest.stages.iter().filter(|r| stages.contains(&r.stage)) {
        eprintln!(
            "{:<11} {:>3} artifacts  {:.2}s",
            rec.stage,
            rec.outputs.len(),
            rec.seconds
        );
    }
}

fn run(args: &RunArgs, stages: &[Stage]) -> ExitCode {
    let cfg = match load(args) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    match run_stages(&cfg, stages) {
        Ok(manifest) => {
            summarize(&manifest, stages);
            eprintln!("output: {}", cfg.output_path().display());
            ExitCode::SUCCESS
        }
        Err(failure) => {
            summarize(&failure.manifest, stages);
            eprintln!("error: {failure}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Ingest(a) => run(a, &[Stage::Ingest]),
        Command::Engagement(a) => run(a, &[Stage::Engagement]),
        Command::Causality(a) => run(a, &[Stage::Causality]),
        Command::Topics(a) => run(a, &[Stage::Topics]),
        Command::Dedup(a) => run(a, &[Stage::Dedup]),
        Command::Report(a) => run(a, &[Stage::Report]),
        Command::All(a) => run(a, &Stage::ALL),
        Command::Fixture { dir, seed } => match write_mini_fixture(dir, *seed) {
            Ok(files) => {
                for f in files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_RUNTIME)
            }
        },
    }
}
