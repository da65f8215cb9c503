use std::fs;
use std::path::PathBuf;

use amodalforge_core::metrics::records::{load_area_ratios, load_ground_truths, load_mask_ious, load_predictions};
use amodalforge_core::metrics::{accuracy_csv, accuracy_curve, histogram_csv, map_r, occlusion_pr, pr_curve_csv};
use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use serde::Serialize;

use crate::config::{absolute, usage, write_json, EvalTask, RunConfig};

#[derive(Subcommand, Debug)]
pub enum EvalCommand {
    /// Area-ratio occlusion classifier: PR curve, AP and histogram.
    Occlusion {
        /// JSON lines of `{"modal_mask", "amodal_mask", "occluded"}`.
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Mask accuracy curve from `{"pred_mask", "gt_mask"}` pairs.
    Masks {
        #[arg(long)]
        records: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// mAP with box assignment and mask-overlap correctness.
    Detseg {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        cutoff: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
pub struct OutArg {
    #[arg(long)]
    out: PathBuf,
}

pub fn resolve(c: &EvalCommand, seed: u64) -> Result<RunConfig> {
    let (task, out) = match c {
        EvalCommand::Occlusion { records, bins, out } => {
            if *bins == 0 {
                return Err(usage("--bins must be at least 1"));
            }
            (
                EvalTask::Occlusion {
                    records: absolute(records)?,
                    bins: *bins,
                },
                out,
            )
        }
        EvalCommand::Masks { records, out } => (
            EvalTask::Masks {
                records: absolute(records)?,
            },
            out,
        ),
        EvalCommand::Detseg {
            predictions,
            ground_truth,
            cutoff,
            out,
        } => {
            if !(*cutoff > 0.0 && *cutoff < 1.0) {
                return Err(usage("--cutoff must lie in (0, 1)"));
            }
            (
                EvalTask::Detseg {
                    predictions: absolute(predictions)?,
                    ground_truth: absolute(ground_truth)?,
                    cutoff: *cutoff,
                },
                out,
            )
        }
    };
    Ok(RunConfig::Eval {
        seed,
        out: absolute(&out.out)?,
        task,
    })
}

#[derive(Serialize)]
struct OcclusionReport {
    samples: usize,
    occluded: usize,
    average_precision: f64,
}

#[derive(Serialize)]
struct MasksReport {
    instances: usize,
    acc_at_50: f64,
    acc_at_70: f64,
    auc: f64,
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let RunConfig::Eval { out, task, .. } = cfg else {
        unreachable!()
    };
    let write = |name: &str, text: String| -> Result<()> {
        let p = out.join(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    };
    match task {
        EvalTask::Occlusion { records, bins } => {
            let samples = load_area_ratios(records)?;
            let curve = occlusion_pr(&samples)?;
            cfg.write(out)?;
            write("pr_curve.csv", pr_curve_csv(&curve))?;
            write("histogram.csv", histogram_csv(&samples, *bins)?)?;
            write_json(
                &out.join("occlusion_report.json"),
                &OcclusionReport {
                    samples: samples.len(),
                    occluded: samples.iter().filter(|s| s.occluded).count(),
                    average_precision: curve.average_precision,
                },
            )?;
            println!("AP={:.4}", curve.average_precision);
        }
        EvalTask::Masks { records } => {
            let ious = load_mask_ious(records)?;
            let curve = accuracy_curve(&ious)?;
            cfg.write(out)?;
            write("accuracy_curve.csv", accuracy_csv(&curve))?;
            write_json(
                &out.join("masks_report.json"),
                &MasksReport {
                    instances: ious.len(),
                    acc_at_50: curve.acc_at_50,
                    acc_at_70: curve.acc_at_70,
                    auc: curve.auc,
                },
            )?;
            println!(
                "acc@50={:.4} acc@70={:.4} AUC={:.4}",
                curve.acc_at_50, curve.acc_at_70, curve.auc
            );
        }
        EvalTask::Detseg {
            predictions,
            ground_truth,
            cutoff,
        } => {
            let preds = load_predictions(predictions)?;
            let gts = load_ground_truths(ground_truth)?;
            let report = map_r(&preds, &gts, *cutoff)?;
            cfg.write(out)?;
            write_json(&out.join("map_report.json"), &report)?;
            match report.mean {
                Some(m) => println!("mAP^r={m:.4} at cutoff {cutoff}"),
                None => println!("mAP^r undefined: no annotated ground truth"),
            }
        }
    }
    Ok(())
}
