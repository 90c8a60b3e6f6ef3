//! Newline-delimited JSON environment protocol.
//!
//! Each request line is one JSON object with a `cmd` field; each gets
//! exactly one response line. The first line written is the version
//! banner `{"protocol":1}`.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde_json::{json, Value};

use crate::env::{Env, EnvError};
use crate::tasks::{Overrides, TaskError};
use crate::world::Action;

pub const PROTOCOL_VERSION: u64 = 1;

pub fn banner() -> Value {
    json!({ "protocol": PROTOCOL_VERSION })
}

struct Failure {
    code: &'static str,
    message: String,
}

fn fail(code: &'static str, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<EnvError> for Failure {
    fn from(e: EnvError) -> Self {
        let code = match &e {
            EnvError::NotReset => "not_reset",
            EnvError::EpisodeDone => "episode_done",
            EnvError::IllegalAction(_) | EnvError::ActionIndex { .. } => "illegal_action",
            EnvError::Level { .. } => "level_error",
            EnvError::Task(TaskError::UnknownTask(_)) => "unknown_task",
            EnvError::Task(_) | EnvError::Reward(_) | EnvError::Observe(_) => "bad_override",
            EnvError::Engine(_) => "engine_error",
        };
        fail(code, e.to_string())
    }
}

/// Environments opened on one connection, keyed by handle.
#[derive(Debug, Default)]
pub struct Session {
    envs: BTreeMap<u64, Env>,
    next: u64,
}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    pub fn open_envs(&self) -> usize {
        self.envs.len()
    }

    /// Answers one request line.
    pub fn handle_line(&mut self, line: &str) -> Value {
        let reply = serde_json::from_str::<Value>(line)
            .map_err(|e| fail("bad_json", e.to_string()))
            .and_then(|req| self.dispatch(&req));
        match reply {
            Ok(v) => v,
            Err(f) => json!({ "ok": false, "error": f.code, "message": f.message }),
        }
    }

    fn env_mut(&mut self, req: &Value) -> Result<(u64, &mut Env), Failure> {
        let h = req
            .get("env")
            .and_then(Value::as_u64)
            .ok_or_else(|| fail("bad_request", "missing integer field `env`"))?;
        let env = self
            .envs
            .get_mut(&h)
            .ok_or_else(|| fail("unknown_env", format!("no environment with handle {h}")))?;
        Ok((h, env))
    }

    fn dispatch(&mut self, req: &Value) -> Result<Value, Failure> {
        let cmd = req
            .get("cmd")
            .and_then(Value::as_str)
            .ok_or_else(|| fail("bad_request", "missing string field `cmd`"))?;
        match cmd {
            "make" => {
                let task = req
                    .get("task")
                    .and_then(Value::as_str)
                    .ok_or_else(|| fail("bad_request", "missing string field `task`"))?;
                let overrides: Overrides = match req.get("overrides") {
                    None | Some(Value::Null) => Overrides::default(),
                    Some(v) => serde_json::from_value(v.clone()).map_err(|e| fail("bad_override", e.to_string()))?,
                };
                let env = Env::make(task, &overrides)?;
                let actions: Vec<String> = env.actions().iter().map(|a| a.name()).collect();
                let keys = env.spec().obs_keys.clone();
                let h = self.next;
                self.next += 1;
                self.envs.insert(h, env);
                Ok(json!({ "ok": true, "env": h, "actions": actions, "obs_keys": keys }))
            }
            "reset" => {
                let seed = match req.get("seed") {
                    None | Some(Value::Null) => 0,
                    Some(v) => v
                        .as_u64()
                        .ok_or_else(|| fail("bad_request", "`seed` must be a non-negative integer"))?,
                };
                let (_, env) = self.env_mut(req)?;
                let obs = env.reset(seed)?;
                Ok(json!({ "ok": true, "obs": obs }))
            }
            "step" => {
                let (_, env) = self.env_mut(req)?;
                let t = match req.get("action") {
                    Some(Value::Number(n)) => {
                        let i = n
                            .as_u64()
                            .ok_or_else(|| fail("illegal_action", format!("bad action index {n}")))?;
                        env.step_index(i as usize)?
                    }
                    Some(Value::String(s)) => {
                        let a = Action::from_name(s).ok_or_else(|| fail("illegal_action", format!("unknown action `{s}`")))?;
                        env.step(a)?
                    }
                    _ => return Err(fail("bad_request", "`action` must be a name or an index")),
                };
                Ok(json!({
                    "ok": true,
                    "obs": t.obs,
                    "reward": t.reward,
                    "done": t.done,
                    "info": {
                        "events": t.info.events,
                        "time_advanced": t.info.time_advanced,
                        "steps": t.info.steps,
                        "end": t.info.end,
                    },
                }))
            }
            "close" => {
                let (h, _) = self.env_mut(req)?;
                self.envs.remove(&h);
                Ok(json!({ "ok": true }))
            }
            other => Err(fail("unknown_command", format!("unknown command `{other}`"))),
        }
    }
}

/// Runs the protocol until `input` ends. Blank lines are ignored.
pub fn serve(input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    writeln!(output, "{}", banner())?;
    output.flush()?;
    let mut session = Session::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", session.handle_line(&line))?;
        output.flush()?;
    }
    Ok(())
}
