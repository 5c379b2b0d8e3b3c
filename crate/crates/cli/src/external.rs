//! Line-delimited JSON controller: one observation message out, one action in.
//!
//! Outgoing, one object per line:
//! `{"t":0.0,"obs":[..6..],"reward":0.0,"terminated":false,"truncated":false,"cause":null}`
//! Incoming after every non-final message: `[el, ail]` or `{"action":[el, ail]}`.
//! The message with `terminated` or `truncated` set is the last one and expects
//! no reply.

use std::io::{BufRead, Write};

use glider_core::eval::{Controller, EvalError};
use glider_core::{Action, Observation, StepResult};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize)]
struct OutMessage<'a> {
    t: f64,
    obs: [f64; 6],
    reward: f64,
    terminated: bool,
    truncated: bool,
    cause: Option<&'a str>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum InMessage {
    Bare([f64; 2]),
    Wrapped { action: [f64; 2] },
}

pub struct ExternalController<R, W> {
    input: R,
    output: W,
    t: f64,
    reward: f64,
    line: String,
}

impl<R: BufRead, W: Write> ExternalController<R, W> {
    pub fn new(input: R, output: W) -> Self {
        Self {
            input,
            output,
            t: 0.0,
            reward: 0.0,
            line: String::new(),
        }
    }

    fn send(&mut self, msg: &OutMessage) -> Result<(), EvalError> {
        let text = serde_json::to_string(msg).map_err(|e| EvalError::Controller(e.to_string()))?;
        writeln!(self.output, "{text}")?;
        self.output.flush()?;
        Ok(())
    }

    fn receive(&mut self) -> Result<Action, EvalError> {
        loop {
            self.line.clear();
            if self.input.read_line(&mut self.line)? == 0 {
                return Err(EvalError::Controller("action stream closed before the episode ended".into()));
            }
            let text = self.line.trim();
            if text.is_empty() {
                continue;
            }
            let msg: InMessage = serde_json::from_str(text)
                .map_err(|e| EvalError::Controller(format!("bad action line {text:?}: {e}")))?;
            let [el, ail] = match msg {
                InMessage::Bare(a) | InMessage::Wrapped { action: a } => a,
            };
            if !el.is_finite() || !ail.is_finite() {
                return Err(EvalError::Controller(format!("non-finite action {text:?}")));
            }
            return Ok(Action::new(el, ail));
        }
    }
}

impl<R: BufRead, W: Write> Controller for ExternalController<R, W> {
    fn name(&self) -> &str {
        "external"
    }

    fn reset(&mut self) {
        self.t = 0.0;
        self.reward = 0.0;
    }

    fn act(&mut self, obs: &Observation, _dt: f64) -> Result<Action, EvalError> {
        self.send(&OutMessage {
            t: self.t,
            obs: obs.to_array(),
            reward: self.reward,
            terminated: false,
            truncated: false,
            cause: None,
        })?;
        self.receive()
    }

    fn feedback(&mut self, result: &StepResult) -> Result<(), EvalError> {
        self.t = result.info.time;
        self.reward = result.reward;
        if result.done() {
            self.send(&OutMessage {
                t: self.t,
                obs: result.observation.to_array(),
                reward: self.reward,
                terminated: result.terminated(),
                truncated: result.truncated,
                cause: result.termination.map(|c| c.as_str()),
            })?;
        }
        Ok(())
    }
}
