use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use super::{AdapterRequest, AdapterResponse, LinguaAdapter, LinguaError};
use crate::alignment::{ParseTree, SimMatrix};

/// Names the sidecar executable and its arguments, whitespace separated.
pub const ADAPTER_CMD_ENV: &str = "LINGUA_ADAPTER_CMD";

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Client for an external adapter process. Requests are serialized; each
/// waits for its response line.
pub struct SidecarAdapter {
    pipe: Mutex<Pipe>,
}

impl SidecarAdapter {
    /// Launches `program args...`.
    pub fn spawn(program: &str, args: &[String]) -> Result<Self, LinguaError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| LinguaError::Process(format!("cannot start '{program}': {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            pipe: Mutex::new(Pipe { child, stdin, stdout }),
        })
    }

    /// Launches the command in `LINGUA_ADAPTER_CMD`.
    pub fn from_env() -> Result<Self, LinguaError> {
        let cmd = std::env::var(ADAPTER_CMD_ENV)
            .map_err(|_| LinguaError::Process(format!("{ADAPTER_CMD_ENV} is not set")))?;
        Self::from_command_line(&cmd)
    }

    pub fn from_command_line(cmd: &str) -> Result<Self, LinguaError> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| LinguaError::Process(format!("{ADAPTER_CMD_ENV} is empty")))?;
        Self::spawn(&program, &parts.collect::<Vec<_>>())
    }

    pub fn call(&self, request: &AdapterRequest) -> Result<AdapterResponse, LinguaError> {
        let mut pipe = self.pipe.lock().unwrap_or_else(|e| e.into_inner());
        let line = serde_json::to_string(request).map_err(|e| LinguaError::Protocol(e.to_string()))?;
        writeln!(pipe.stdin, "{line}")?;
        pipe.stdin.flush()?;
        let mut reply = String::new();
        if pipe.stdout.read_line(&mut reply)? == 0 {
            return Err(LinguaError::Process("adapter closed its output".into()));
        }
        serde_json::from_str(&reply).map_err(|e| LinguaError::Protocol(format!("{e}: {}", reply.trim())))
    }
}

impl Drop for SidecarAdapter {
    fn drop(&mut self) {
        let pipe = self.pipe.get_mut().unwrap_or_else(|e| e.into_inner());
        let _ = pipe.child.kill();
        let _ = pipe.child.wait();
    }
}

fn failure(response: &AdapterResponse) -> String {
    response.error.clone().unwrap_or_else(|| "response without payload".into())
}

impl LinguaAdapter for SidecarAdapter {
    fn parse(&self, sentence: &str) -> Result<ParseTree, LinguaError> {
        let response = self.call(&AdapterRequest::parse(sentence))?;
        match response.tree {
            Some(doc) if response.ok => Ok(ParseTree::from_document(doc)?),
            _ => Err(LinguaError::ParseFailure(failure(&response))),
        }
    }

    fn similarity(&self, a: &ParseTree, b: &ParseTree) -> Result<SimMatrix, LinguaError> {
        let response = self.call(&AdapterRequest::similarity(a, b))?;
        match response.matrix {
            Some(rows) if response.ok => {
                let m = SimMatrix::from_rows(rows)?;
                m.check_shape(a, b)?;
                Ok(m)
            }
            _ => Err(LinguaError::ModelUnavailable(failure(&response))),
        }
    }
}
