use std::path::{Path, PathBuf};
use std::time::Duration;

use amodalforge_core::formats::{read_binary_mask, read_image, write_binary_mask, write_heatmap};
use amodalforge_core::inference::{
    ibbe, parse_backend_spec, BackendSpec, ExpansionStep, IbbeParams, ModalCopyPredictor, NullPredictor,
    OraclePredictor, Predictor, ProcessPredictor,
};
use amodalforge_core::BBox;
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use crate::config::{absolute, load_partial, usage, write_json, RunConfig};

#[derive(Args, Debug)]
pub struct InferArgs {
    #[arg(long)]
    image: PathBuf,
    /// Modal box as `x0,y0,x1,y1`.
    #[arg(long = "box")]
    modal_box: BBox,
    #[arg(long)]
    category: String,
    /// `null`, `modal-copy`, `oracle:<mask.png>` or `proc:<command>`.
    #[arg(long)]
    backend: String,
    /// Optional backend for the modal heatmap channel.
    #[arg(long)]
    modal_backend: Option<String>,
    /// Seconds to wait for each subprocess reply.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    /// JSON object overriding expansion parameters.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    expansion_threshold: Option<f64>,
    #[arg(long)]
    max_iterations: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

/// Oracle mask paths are made absolute so a replayed config finds them.
fn absolute_spec(spec: &str) -> Result<String> {
    match parse_backend_spec(spec).map_err(|e| usage(e.to_string()))? {
        BackendSpec::Oracle(p) => Ok(format!("oracle:{}", absolute(&p)?.display())),
        _ => Ok(spec.to_string()),
    }
}

pub fn resolve(a: &InferArgs, seed: u64) -> Result<RunConfig> {
    let mut params: IbbeParams = match &a.params {
        Some(p) => load_partial(p)?,
        None => IbbeParams::default(),
    };
    if let Some(t) = a.expansion_threshold {
        params.expansion_threshold = t;
    }
    if let Some(n) = a.max_iterations {
        params.max_iterations = n;
    }
    params.validate().map_err(|e| usage(e.to_string()))?;
    if !(a.timeout > 0.0 && a.timeout.is_finite()) {
        return Err(usage("--timeout must be positive"));
    }
    Ok(RunConfig::Infer {
        seed,
        image: absolute(&a.image)?,
        modal_box: a.modal_box,
        category: a.category.clone(),
        backend: absolute_spec(&a.backend)?,
        modal_backend: a.modal_backend.as_deref().map(absolute_spec).transpose()?,
        timeout_secs: a.timeout,
        params,
        out: absolute(&a.out)?,
    })
}

fn open_backend(spec: &str, margin: f64, dims: (u32, u32), timeout: Duration) -> Result<Box<dyn Predictor>> {
    Ok(match parse_backend_spec(spec)? {
        BackendSpec::Null => Box::new(NullPredictor::new(margin)),
        BackendSpec::ModalCopy => Box::new(ModalCopyPredictor::new(margin)),
        BackendSpec::Oracle(p) => {
            let truth = read_binary_mask(&p)?;
            if (truth.width(), truth.height()) != dims {
                bail!(
                    "oracle mask {} is {}x{}, image is {}x{}",
                    p.display(),
                    truth.width(),
                    truth.height(),
                    dims.0,
                    dims.1
                );
            }
            Box::new(OraclePredictor::new(truth, margin))
        }
        BackendSpec::Process(cmd) => {
            Box::new(ProcessPredictor::spawn(&cmd, timeout).with_context(|| format!("starting backend {cmd:?}"))?)
        }
    })
}

#[derive(Serialize)]
struct InferResult<'a> {
    category: &'a str,
    image_width: u32,
    image_height: u32,
    modal_box: BBox,
    amodal_box: BBox,
    footprint_box: BBox,
    iterations: u32,
    final_margin_means: [f64; 4],
    amodal_pixels: u64,
    modal_pixels: u64,
    trace: &'a [ExpansionStep],
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let RunConfig::Infer {
        image,
        modal_box,
        category,
        backend,
        modal_backend,
        timeout_secs,
        params,
        out,
        ..
    } = cfg
    else {
        unreachable!()
    };
    let img = read_image(image)?;
    let dims = (img.width(), img.height());
    let timeout = Duration::from_secs_f64(*timeout_secs);
    let mut main = open_backend(backend, params.margin_frac, dims, timeout)?;
    let mut modal = modal_backend
        .as_deref()
        .map(|s| open_backend(s, params.margin_frac, dims, timeout))
        .transpose()?;
    let r = ibbe(&img, modal_box, category, main.as_mut(), params, modal.as_mut().map(|m| m.as_mut() as &mut dyn Predictor))
        .context("box expansion failed")?;

    cfg.write(out)?;
    write_heatmap(&out.join("amodal.hmap"), &r.amodal_heatmap)?;
    write_binary_mask(&out.join("amodal.png"), &r.amodal_mask)?;
    write_binary_mask(&out.join("modal.png"), &r.modal_mask)?;
    let result = InferResult {
        category,
        image_width: dims.0,
        image_height: dims.1,
        modal_box: *modal_box,
        amodal_box: r.amodal_box,
        footprint_box: r.footprint_box,
        iterations: r.iterations,
        final_margin_means: r.final_margin_means,
        amodal_pixels: r.amodal_mask.count(),
        modal_pixels: r.modal_mask.count(),
        trace: &r.expansion_trace,
    };
    write_json(&out.join("result.json"), &result)?;
    print_summary(out, &result);
    Ok(())
}

fn print_summary(out: &Path, r: &InferResult) {
    println!(
        "amodal box {} after {} iteration(s); results in {}",
        r.amodal_box,
        r.iterations,
        out.display()
    );
}
