use std::path::PathBuf;

use amodalforge_core::datagen::{generate_example, write_sample, DatasetManifest, GenConfig};
use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;

use crate::config::{absolute, load_partial, usage, RunConfig};

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    count: u64,
    /// JSON object overriding generator defaults.
    #[arg(long)]
    generator: Option<PathBuf>,
    /// Give every main object the same occlusion on every draw.
    #[arg(long = "static")]
    fixed: bool,
}

pub fn resolve(a: &SynthArgs, seed: u64) -> Result<RunConfig> {
    let mut generator: GenConfig = match &a.generator {
        Some(p) => load_partial(p)?,
        None => GenConfig::default(),
    };
    if a.fixed {
        generator.dynamic_generation = false;
    }
    generator.validate().map_err(|e| usage(e.to_string()))?;
    if seed.checked_add(a.count).is_none() {
        return Err(usage("--seed + --count overflows"));
    }
    Ok(RunConfig::Synth {
        seed,
        manifest: absolute(&a.manifest)?,
        out: absolute(&a.out)?,
        count: a.count,
        generator,
    })
}

pub fn sample_dir_name(i: u64) -> String {
    format!("sample_{i:06}")
}

pub fn run(cfg: &RunConfig, jobs: usize) -> Result<()> {
    let RunConfig::Synth {
        seed,
        manifest,
        out,
        count,
        generator,
    } = cfg
    else {
        unreachable!()
    };
    let ds = DatasetManifest::load(manifest).with_context(|| format!("loading {}", manifest.display()))?;
    cfg.write(out)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    pool.install(|| {
        (0..*count).into_par_iter().try_for_each(|i| -> Result<()> {
            let s = generate_example(&ds, generator, seed + i).with_context(|| format!("sample {i}"))?;
            write_sample(&out.join(sample_dir_name(i)), &s).with_context(|| format!("writing sample {i}"))?;
            Ok(())
        })
    })?;
    println!("wrote {count} samples to {}", out.display());
    Ok(())
}
