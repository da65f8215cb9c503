use std::io::{self, BufRead, Write};

use amodalforge_core::inference::protocol::{decode, encode, Frame, PROTOCOL_VERSION};
use amodalforge_core::inference::{
    parse_backend_spec, BackendSpec, ModalCopyPredictor, NullPredictor, PredictRequest, Predictor,
};
use anyhow::Result;
use clap::Args;

use crate::config::usage;

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// `null` or `modal-copy`; the oracle needs image geometry the wire does not carry.
    #[arg(long, default_value = "null")]
    backend: String,
    #[arg(long, default_value_t = 0.125)]
    margin_frac: f64,
}

pub fn run(a: &ServeArgs) -> Result<()> {
    if !(a.margin_frac > 0.0 && a.margin_frac < 0.5) {
        return Err(usage("--margin-frac must lie in (0, 0.5)"));
    }
    let mut backend: Box<dyn Predictor> = match parse_backend_spec(&a.backend).map_err(|e| usage(e.to_string()))? {
        BackendSpec::Null => Box::new(NullPredictor::new(a.margin_frac)),
        BackendSpec::ModalCopy => Box::new(ModalCopyPredictor::new(a.margin_frac)),
        _ => return Err(usage(format!("backend {:?} cannot be served", a.backend))),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut send = |f: &Frame| -> io::Result<()> {
        out.write_all(encode(f).as_bytes())?;
        out.write_all(b"\n")?;
        out.flush()
    };
    send(&Frame::Hello {
        protocol: PROTOCOL_VERSION,
        margin_frac: a.margin_frac,
    })?;
    for line in io::stdin().lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match decode(&line) {
            Ok(Frame::Shutdown) => break,
            Ok(Frame::Predict {
                id,
                category,
                patch,
                heatmap,
            }) => {
                let req = PredictRequest {
                    patch,
                    modal_heatmap: heatmap,
                    category,
                    request_id: id,
                    footprint: None,
                };
                match backend.predict(&req) {
                    Ok(r) => Frame::Heatmap {
                        id,
                        heatmap: r.heatmap,
                    },
                    Err(e) => Frame::Error {
                        id: Some(id),
                        message: e.to_string(),
                    },
                }
            }
            Ok(other) => Frame::Error {
                id: None,
                message: format!("unexpected {} frame", other.kind()),
            },
            Err(e) => Frame::Error {
                id: None,
                message: e.to_string(),
            },
        };
        send(&reply)?;
    }
    Ok(())
}
