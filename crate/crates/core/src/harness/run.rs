use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::config::SimConfig;
use crate::env::{EnvError, Environment, EpisodeSummary, StepRecord, REPORT_CVAR_ALPHA};
use crate::policy::{Policy, PolicyContext};
use crate::risk::cvar;
use crate::rng::SeedStreams;

/// Episodes handed to the worker pool at a time. Bounds memory when
/// trajectories are being written.
const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub episodes: usize,
    /// Episode `i` uses seed `first_seed + i`.
    pub first_seed: u64,
    /// Run on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl RunOptions {
    pub fn new(episodes: usize, first_seed: u64) -> Self {
        Self {
            episodes,
            first_seed,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub summary: EpisodeSummary,
    pub bills: Vec<f64>,
    /// Empty unless records were requested.
    pub records: Vec<StepRecord>,
}

/// One JSONL trajectory line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLine {
    pub episode: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub record: StepRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub policy: String,
    pub episodes: usize,
    pub first_seed: u64,
    pub mean_reward: f64,
    /// Sample standard deviation (0 for a single episode).
    pub std_reward: f64,
    pub mean_revenue: f64,
    pub mean_consumer_cost: f64,
    pub mean_payouts: f64,
    /// CVaR at 0.95 of the per-building bills of all episodes pooled.
    pub cvar95_bills: f64,
    /// Total payouts over total available daily budget.
    pub budget_utilization: f64,
}

/// Play one episode of `policy` from `seed`.
///
/// Policy randomness comes from the seed's dedicated policy stream, so it
/// never perturbs the simulator's own draws.
pub fn run_episode(
    env: &mut Environment,
    policy: Policy,
    seed: u64,
    keep_records: bool,
) -> Result<EpisodeResult, HarnessError> {
    let (mut obs, _) = env.reset(seed)?;
    let mut policy_rng = SeedStreams::new(seed).policy();
    let credit_max = env.config().credit_max;
    let mut records = Vec::new();
    while !env.is_done() {
        let ctx = PolicyContext {
            opening_budget: env.ledger().ok_or(EnvError::NotReset)?.today_budget,
            credit_max,
        };
        let action = policy.act(obs.as_slice(), &ctx, &mut policy_rng)?;
        let out = env.step(action)?;
        obs = out.obs;
        if keep_records {
            records.push(out.record);
        }
    }
    Ok(EpisodeResult {
        summary: env.summary().cloned().ok_or(EnvError::NotReset)?,
        bills: env.bills().to_vec(),
        records,
    })
}

/// Run `opts.episodes` episodes, streaming JSONL trajectories to `sink` in
/// episode order when given.
pub fn run_episodes(
    config: Arc<SimConfig>,
    policy: Policy,
    opts: &RunOptions,
    mut sink: Option<&mut dyn Write>,
) -> Result<RunSummary, HarnessError> {
    if opts.episodes == 0 {
        return Err(HarnessError::Invalid("episodes must be >= 1".into()));
    }
    let proto = Environment::new(config)?;
    let keep = sink.is_some();
    let mut rewards = Vec::with_capacity(opts.episodes);
    let mut pooled = Vec::new();
    let (mut revenue, mut cost, mut payouts, mut available) = (0.0, 0.0, 0.0, 0.0);

    let mut start = 0;
    while start < opts.episodes {
        let end = (start + CHUNK).min(opts.episodes);
        let seeds: Vec<(usize, u64)> = (start..end)
            .map(|i| (i, opts.first_seed.wrapping_add(i as u64)))
            .collect();
        let results: Vec<Result<EpisodeResult, HarnessError>> = if opts.parallel {
            seeds
                .par_iter()
                .map_init(|| proto.clone(), |env, &(_, seed)| run_episode(env, policy, seed, keep))
                .collect()
        } else {
            let mut env = proto.clone();
            seeds
                .iter()
                .map(|&(_, seed)| run_episode(&mut env, policy, seed, keep))
                .collect()
        };
        for ((episode, seed), result) in seeds.into_iter().zip(results) {
            let result = result?;
            if let Some(w) = sink.as_deref_mut() {
                for record in result.records {
                    let line = TrajectoryLine { episode, seed, record };
                    serde_json::to_writer(&mut *w, &line)?;
                    w.write_all(b"\n")?;
                }
            }
            let s = &result.summary;
            rewards.push(s.total_reward);
            revenue += s.revenue;
            cost += s.consumer_cost;
            payouts += s.payouts;
            available += s.budget_available;
            pooled.extend_from_slice(&result.bills);
        }
        start = end;
    }
    if let Some(w) = sink {
        w.flush()?;
    }

    let n = opts.episodes as f64;
    let mean_reward = rewards.iter().sum::<f64>() / n;
    let std_reward = if opts.episodes > 1 {
        (rewards.iter().map(|r| (r - mean_reward).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(RunSummary {
        policy: policy.to_string(),
        episodes: opts.episodes,
        first_seed: opts.first_seed,
        mean_reward,
        std_reward,
        mean_revenue: revenue / n,
        mean_consumer_cost: cost / n,
        mean_payouts: payouts / n,
        cvar95_bills: cvar(&pooled, REPORT_CVAR_ALPHA).map_err(EnvError::from)?,
        budget_utilization: if available > 0.0 { payouts / available } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> Arc<SimConfig> {
        Arc::new(SimConfig {
            n_buildings: 20,
            ..SimConfig::default()
        })
    }

    #[test]
    fn parallel_matches_serial() {
        let mut serial = Vec::new();
        let mut parallel = Vec::new();
        let mut opts = RunOptions::new(6, 10);
        opts.parallel = false;
        let a = run_episodes(config(), Policy::Random, &opts, Some(&mut serial)).unwrap();
        opts.parallel = true;
        let b = run_episodes(config(), Policy::Random, &opts, Some(&mut parallel)).unwrap();
        assert_eq!(a, b);
        assert_eq!(serial, parallel);
        let text = String::from_utf8(serial).unwrap();
        assert_eq!(text.lines().count(), 6 * 24);
        let first: TrajectoryLine = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!((first.episode, first.seed, first.record.t), (0, 10, 0));
    }

    #[test]
    fn nocredit_uses_no_budget() {
        let s = run_episodes(config(), Policy::NoCredit, &RunOptions::new(3, 0), None).unwrap();
        assert_eq!(s.budget_utilization, 0.0);
        assert_eq!(s.mean_payouts, 0.0);
        assert_eq!(s.policy, "nocredit");
    }

    #[test]
    fn zero_episodes_rejected() {
        assert!(run_episodes(config(), Policy::NoCredit, &RunOptions::new(0, 0), None).is_err());
    }
}
