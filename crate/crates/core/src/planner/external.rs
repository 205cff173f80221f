//! Out-of-process planner: one JSON request per line on the child's stdin,
//! one JSON step per line on its stdout.

use super::{MapSummary, PlanStep, Planner, PlannerError};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

pub const REQUEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub version: u32,
    pub instruction: String,
    pub completed_steps: Vec<PlanStep>,
    pub summary: MapSummary,
    pub frontiers: Vec<crate::geom::Cell>,
}

pub struct ExternalPlanner {
    command: String,
    timeout: Duration,
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl ExternalPlanner {
    /// Starts `command` through the shell.
    pub fn spawn(command: &str, timeout_secs: f64) -> Result<Self, PlannerError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ExternalPlanner { command: command.to_string(), timeout: Duration::from_secs_f64(timeout_secs), child, stdin, lines: rx })
    }

    fn read_reply(&mut self) -> Result<String, PlannerError> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(e.into()),
            Err(RecvTimeoutError::Timeout) => Err(PlannerError::AdapterTimeout(self.timeout.as_secs_f64())),
            Err(RecvTimeoutError::Disconnected) => Err(PlannerError::AdapterProtocolError("adapter closed its output".into())),
        }
    }

    /// Sends one request and parses the reply; a malformed reply is retried once.
    pub fn roundtrip(&mut self, request: &AdapterRequest) -> Result<PlanStep, PlannerError> {
        let line = serde_json::to_string(request).map_err(|e| PlannerError::AdapterProtocolError(e.to_string()))?;
        let mut last = String::new();
        for _ in 0..2 {
            writeln!(self.stdin, "{line}")?;
            self.stdin.flush()?;
            let reply = self.read_reply()?;
            match serde_json::from_str::<PlanStep>(&reply) {
                Ok(step) if !step.terminal || step.demanded_objects.is_empty() => return Ok(step),
                Ok(_) => last = "terminal step with demanded objects".into(),
                Err(e) => last = e.to_string(),
            }
        }
        Err(PlannerError::AdapterProtocolError(last))
    }
}

impl Planner for ExternalPlanner {
    fn next_step(&mut self, instruction: &str, done: &[PlanStep], summary: &MapSummary) -> Result<PlanStep, PlannerError> {
        if let Some(t) = done.iter().find(|s| s.terminal) {
            return Ok(t.clone());
        }
        let request = AdapterRequest {
            version: REQUEST_VERSION,
            instruction: instruction.to_string(),
            completed_steps: done.to_vec(),
            summary: summary.clone(),
            frontiers: summary.frontiers.clone(),
        };
        self.roundtrip(&request)
    }

    fn name(&self) -> String {
        format!("external:{}", self.command)
    }
}

impl Drop for ExternalPlanner {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ActionPrimitive, Category};

    fn request() -> AdapterRequest {
        AdapterRequest {
            version: REQUEST_VERSION,
            instruction: "Slice the tomato".into(),
            completed_steps: vec![],
            summary: MapSummary::default(),
            frontiers: vec![],
        }
    }

    #[test]
    fn canned_reply_is_parsed() {
        let canned = r#"{"index":1,"text":"Step 1. Find the knife","primitive_hint":null,"demanded_objects":["Knife"],"terminal":false}"#;
        let mut p = ExternalPlanner::spawn(&format!("while read l; do echo '{canned}'; done"), 5.0).unwrap();
        let step = p.roundtrip(&request()).unwrap();
        assert_eq!(step, PlanStep::new(1, "Find the knife", None, vec![Category::named("Knife")]));
        let _ = ActionPrimitive::PickUp;
    }

    #[test]
    fn invalid_json_twice_is_a_protocol_error() {
        let mut p = ExternalPlanner::spawn("while read l; do echo 'not json'; done", 5.0).unwrap();
        assert!(matches!(p.roundtrip(&request()), Err(PlannerError::AdapterProtocolError(_))));
    }

    #[test]
    fn silence_times_out() {
        let mut p = ExternalPlanner::spawn("sleep 5", 0.2).unwrap();
        assert!(matches!(p.roundtrip(&request()), Err(PlannerError::AdapterTimeout(_))));
    }
}
