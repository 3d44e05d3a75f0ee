//! Newline-delimited JSON protocol over a reader/writer pair.
//!
//! | request                           | response                                                       |
//! |-----------------------------------|----------------------------------------------------------------|
//! | `{"cmd":"reset","seed":S}`        | `{"obs":[..32],"info":{..}}`                                   |
//! | `{"cmd":"step","action":A}`       | `{"obs":[..],"reward":r,"terminated":b,"truncated":false,"info":{..}}` |
//! | `{"cmd":"spec"}`                  | action and observation bounds                                  |
//! | `{"cmd":"close"}`                 | `{"ok":true}`, then the loop returns                           |
//!
//! `seed` is optional and defaults to the configured seed. Any malformed or
//! failing request gets `{"error":"..."}` and the loop keeps serving.

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::HarnessError;
use crate::config::SimConfig;
use crate::env::{observation_bounds, Environment, EpisodeSummary, StepRecord, OBS_DIM};

#[derive(Debug, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case", deny_unknown_fields)]
enum Request {
    Reset { seed: Option<u64> },
    Step { action: f64 },
    Spec,
    Close,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub shape: Vec<usize>,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecResponse {
    pub action_space: SpaceSpec,
    pub observation_space: SpaceSpec,
    pub episode_steps: u32,
}

#[derive(Debug, Serialize)]
struct StepInfo<'a> {
    #[serde(flatten)]
    record: &'a StepRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    episode: Option<&'a EpisodeSummary>,
}

pub fn observation_spec(config: &SimConfig) -> SpecResponse {
    let (low, high) = observation_bounds(config);
    SpecResponse {
        action_space: SpaceSpec {
            shape: vec![1],
            low: vec![0.0],
            high: vec![config.credit_max],
        },
        observation_space: SpaceSpec {
            shape: vec![OBS_DIM],
            low: low.to_vec(),
            high: high.to_vec(),
        },
        episode_steps: config.episode_steps(),
    }
}

/// Serve one environment until `close` or end of input.
pub fn env_server<R: BufRead, W: Write>(config: Arc<SimConfig>, input: R, mut output: W) -> Result<(), HarnessError> {
    let mut env = Environment::new(config.clone())?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (response, close) = match serde_json::from_str::<Request>(&line) {
            Err(e) => (json!({ "error": format!("malformed request: {e}") }), false),
            Ok(Request::Close) => (json!({ "ok": true }), true),
            Ok(req) => (handle(&mut env, &config, req), false),
        };
        serde_json::to_writer(&mut output, &response)?;
        output.write_all(b"\n")?;
        output.flush()?;
        if close {
            break;
        }
    }
    Ok(())
}

fn handle(env: &mut Environment, config: &SimConfig, req: Request) -> serde_json::Value {
    let result = match req {
        Request::Reset { seed } => env
            .reset(seed.unwrap_or(config.seed))
            .map(|(obs, info)| json!({ "obs": obs, "info": info })),
        Request::Step { action } => env.step(action).map(|out| {
            let info = StepInfo {
                record: &out.record,
                episode: if out.terminated { env.summary() } else { None },
            };
            json!({
                "obs": out.obs,
                "reward": out.reward,
                "terminated": out.terminated,
                "truncated": out.truncated,
                "info": info,
            })
        }),
        Request::Spec => Ok(serde_json::to_value(observation_spec(config)).expect("spec serializes")),
        Request::Close => unreachable!("handled by the loop"),
    };
    result.unwrap_or_else(|e| json!({ "error": e.to_string() }))
}
