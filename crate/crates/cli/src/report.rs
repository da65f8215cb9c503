use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use amodalforge_core::datagen::{read_sample_meta, verify_sample_dir, DatasetManifest, GenConfig};
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use crate::config::{absolute, load_partial, usage, write_json, RunConfig};

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Output directory of an earlier `synth` run.
    #[arg(long)]
    samples: PathBuf,
    /// Manifest the samples were drawn from.
    #[arg(long)]
    manifest: PathBuf,
    /// Generator overrides; defaults to the run's own synth_config.json.
    #[arg(long)]
    generator: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

pub fn resolve(a: &ReportArgs, seed: u64) -> Result<RunConfig> {
    let generator = match &a.generator {
        Some(p) => load_partial(p)?,
        None => match RunConfig::load(&a.samples.join("synth_config.json")) {
            Ok(RunConfig::Synth { generator, .. }) => generator,
            _ => GenConfig::default(),
        },
    };
    generator.validate().map_err(|e| usage(e.to_string()))?;
    Ok(RunConfig::Report {
        seed,
        samples: absolute(&a.samples)?,
        manifest: absolute(&a.manifest)?,
        generator,
        out: absolute(&a.out)?,
    })
}

#[derive(Default, Serialize)]
struct Summary {
    samples: usize,
    all_constraints: usize,
    patch_box: usize,
    visibility: usize,
    jitter: usize,
    positives: usize,
    partition: usize,
    mean_visible_fraction: f64,
    overlays: BTreeMap<usize, usize>,
    categories: BTreeMap<String, usize>,
    failing: Vec<String>,
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let RunConfig::Report {
        samples,
        manifest,
        generator,
        out,
        ..
    } = cfg
    else {
        unreachable!()
    };
    let ds = DatasetManifest::load(manifest).with_context(|| format!("loading {}", manifest.display()))?;
    let mut dirs: Vec<PathBuf> = fs::read_dir(samples)
        .with_context(|| format!("listing {}", samples.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("sample_")))
        .collect();
    dirs.sort();

    let mut s = Summary::default();
    for d in &dirs {
        let name = d.file_name().unwrap().to_string_lossy().into_owned();
        let check = verify_sample_dir(&ds, generator, d).with_context(|| format!("checking {name}"))?;
        let meta = read_sample_meta(d)?;
        s.samples += 1;
        s.patch_box += check.patch_box as usize;
        s.visibility += check.visibility as usize;
        s.jitter += check.jitter as usize;
        s.positives += check.positives as usize;
        s.partition += check.partition as usize;
        if check.all() {
            s.all_constraints += 1;
        } else {
            s.failing.push(name);
        }
        s.mean_visible_fraction += meta.visible_fraction;
        *s.overlays.entry(meta.overlays.len()).or_default() += 1;
        *s.categories.entry(meta.category).or_default() += 1;
    }
    if s.samples > 0 {
        s.mean_visible_fraction /= s.samples as f64;
    }
    cfg.write(out)?;
    write_json(&out.join("report.json"), &s)?;
    println!("{}/{} samples satisfy every constraint", s.all_constraints, s.samples);
    if !s.failing.is_empty() {
        bail!("{} sample(s) violate generator constraints", s.failing.len());
    }
    Ok(())
}
