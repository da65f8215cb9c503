use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use amodalforge_core::datagen::GenConfig;
use amodalforge_core::inference::IbbeParams;
use amodalforge_core::BBox;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// A bad command line, as opposed to a failure while running.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).with_context(|| format!("resolving {}", p.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase", deny_unknown_fields)]
pub enum EvalTask {
    Occlusion { records: PathBuf, bins: usize },
    Masks { records: PathBuf },
    Detseg { predictions: PathBuf, ground_truth: PathBuf, cutoff: f64 },
}

/// Everything a run depends on. Written next to the outputs; `--config`
/// replays it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase", deny_unknown_fields)]
pub enum RunConfig {
    Synth {
        seed: u64,
        manifest: PathBuf,
        out: PathBuf,
        count: u64,
        generator: GenConfig,
    },
    Infer {
        seed: u64,
        image: PathBuf,
        modal_box: BBox,
        category: String,
        backend: String,
        modal_backend: Option<String>,
        timeout_secs: f64,
        params: IbbeParams,
        out: PathBuf,
    },
    Eval {
        seed: u64,
        out: PathBuf,
        task: EvalTask,
    },
    Report {
        seed: u64,
        samples: PathBuf,
        manifest: PathBuf,
        generator: GenConfig,
        out: PathBuf,
    },
    Demo {
        seed: u64,
        out: PathBuf,
        images: usize,
    },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    fn file_name(&self) -> &'static str {
        match self {
            RunConfig::Synth { .. } => "synth_config.json",
            RunConfig::Infer { .. } => "infer_config.json",
            RunConfig::Eval { .. } => "eval_config.json",
            RunConfig::Report { .. } => "report_config.json",
            RunConfig::Demo { .. } => "demo_config.json",
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(self.file_name());
        let text = serde_json::to_string_pretty(self).expect("config serializes") + "\n";
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Reads a JSON object of partial overrides on top of `T::default()`.
pub fn load_partial<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes") + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
