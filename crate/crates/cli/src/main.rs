mod config;
mod eval;
mod infer;
mod report;
mod serve;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{usage, RunConfig, Usage};

#[derive(Parser, Debug)]
#[command(name = "amodalforge", version, about = "Amodal segmentation data synthesis, inference and evaluation")]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every processor.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Replay a resolved `*_config.json` written by an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize occluded training samples from a manifest.
    Synth(synth::SynthArgs),
    /// Run iterative box expansion on one object.
    Infer(infer::InferArgs),
    /// Score predictions.
    #[command(subcommand)]
    Eval(eval::EvalCommand),
    /// Check a synth output directory against its manifest.
    Report(report::ReportArgs),
    /// Write a small procedural manifest.
    Demo(DemoArgs),
    /// Serve a built-in backend over the predictor protocol on stdio.
    Serve(serve::ServeArgs),
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 12)]
    images: usize,
}

fn resolve(cli: &Cli) -> Result<Option<RunConfig>> {
    match (&cli.config, &cli.command) {
        (Some(path), None) => RunConfig::load(path).map(Some),
        (Some(_), Some(_)) => Err(usage("--config replays a whole run and cannot be combined with a subcommand")),
        (None, None) => Err(usage("no command given; see --help")),
        (None, Some(Command::Serve(_))) => Ok(None),
        (None, Some(cmd)) => Ok(Some(match cmd {
            Command::Synth(a) => synth::resolve(a, cli.seed)?,
            Command::Infer(a) => infer::resolve(a, cli.seed)?,
            Command::Eval(a) => eval::resolve(a, cli.seed)?,
            Command::Report(a) => report::resolve(a, cli.seed)?,
            Command::Demo(a) => RunConfig::Demo {
                seed: cli.seed,
                out: config::absolute(&a.out)?,
                images: a.images,
            },
            Command::Serve(_) => unreachable!(),
        })),
    }
}

fn run(cli: Cli) -> Result<()> {
    let Some(run) = resolve(&cli)? else {
        let Some(Command::Serve(args)) = &cli.command else { unreachable!() };
        return serve::run(args);
    };
    match &run {
        RunConfig::Synth { .. } => synth::run(&run, cli.jobs),
        RunConfig::Infer { .. } => infer::run(&run),
        RunConfig::Eval { .. } => eval::run(&run),
        RunConfig::Report { .. } => report::run(&run),
        RunConfig::Demo { seed, out, images } => {
            if *images == 0 {
                return Err(usage("--images must be at least 1"));
            }
            let manifest = amodalforge_core::synthetic::demo_manifest(*seed, *images);
            manifest.save(out).with_context(|| format!("writing {}", out.display()))?;
            run.write(out)?;
            println!("wrote {} images to {}", images, out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<Usage>().is_some() { 1 } else { 2 })
        }
    }
}
