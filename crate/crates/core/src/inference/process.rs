use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{self, Frame, PROTOCOL_VERSION};
use super::{InferenceError, PredictRequest, PredictResponse, Predictor};

/// A predictor running as a child process, spoken to over its stdio.
///
/// The command is run through `sh -c`. Its stderr is inherited.
pub struct ProcessPredictor {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    margin_frac: f64,
    timeout: Duration,
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

impl ProcessPredictor {
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, InferenceError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| InferenceError::BackendUnavailable(format!("{command}: {e}")))?;
        let stdout = child.stdout.take().expect("stdout is piped");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut p = Self {
            child,
            stdin,
            lines: rx,
            margin_frac: 0.0,
            timeout,
        };
        match p.read_frame()? {
            Frame::Hello { protocol, margin_frac } => {
                if protocol != PROTOCOL_VERSION {
                    return Err(InferenceError::Protocol(format!(
                        "backend speaks protocol {protocol}, expected {PROTOCOL_VERSION}"
                    )));
                }
                p.margin_frac = margin_frac;
            }
            other => {
                return Err(InferenceError::Protocol(format!("expected hello, got {}", other.kind())));
            }
        }
        Ok(p)
    }

    fn read_frame(&mut self) -> Result<Frame, InferenceError> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => protocol::decode(line.trim_end_matches('\r')),
            Ok(Err(e)) => Err(InferenceError::BackendUnavailable(e.to_string())),
            Err(RecvTimeoutError::Timeout) => Err(InferenceError::Timeout(self.timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                Err(InferenceError::BackendUnavailable("backend closed its output".into()))
            }
        }
    }

    fn write_frame(&mut self, frame: &Frame) -> Result<(), InferenceError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| InferenceError::BackendUnavailable("backend input closed".into()))?;
        let mut line = protocol::encode(frame);
        line.push('\n');
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| InferenceError::BackendUnavailable(e.to_string()))
    }
}

impl Predictor for ProcessPredictor {
    fn margin_frac(&self) -> f64 {
        self.margin_frac
    }

    fn predict(&mut self, req: &PredictRequest) -> Result<PredictResponse, InferenceError> {
        self.write_frame(&Frame::Predict {
            id: req.request_id,
            category: req.category.clone(),
            patch: req.patch.clone(),
            heatmap: req.modal_heatmap.clone(),
        })?;
        match self.read_frame()? {
            Frame::Heatmap { id, heatmap } if id == req.request_id => Ok(PredictResponse {
                heatmap,
                request_id: id,
            }),
            Frame::Heatmap { id, .. } => Err(InferenceError::Protocol(format!(
                "response id {id} does not match request id {}",
                req.request_id
            ))),
            Frame::Error { message, .. } => Err(InferenceError::Protocol(format!("backend error: {message}"))),
            other => Err(InferenceError::Protocol(format!("expected heatmap, got {}", other.kind()))),
        }
    }
}

impl Drop for ProcessPredictor {
    fn drop(&mut self) {
        let _ = self.write_frame(&Frame::Shutdown);
        self.stdin = None;
        let deadline = Instant::now() + Duration::from_secs(2);
        while Instant::now() < deadline {
            match self.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) => thread::sleep(Duration::from_millis(10)),
                Err(_) => break,
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
