use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{run_episodes, HarnessError, RunOptions};
use crate::config::SimConfig;
use crate::policy::Policy;

pub const DEFAULT_SWEEP_LEVELS: [f64; 6] = [0.0, 0.02, 0.04, 0.06, 0.08, 0.10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub credit_level: f64,
    pub mean_episode_reward: f64,
    pub mean_utility_revenue: f64,
    pub cvar95_bills: f64,
    pub budget_utilization: f64,
}

/// Run a uniform-credit policy at each level on the same seeds
/// `first_seed..first_seed + episodes`.
///
/// The customer and demand streams are addressed by building and hour, so
/// every level sees the same acceptance uniforms and demand noise.
pub fn sweep_credit(
    config: Arc<SimConfig>,
    levels: &[f64],
    episodes: usize,
    first_seed: u64,
) -> Result<Vec<FrontierPoint>, HarnessError> {
    if levels.is_empty() {
        return Err(HarnessError::Invalid("sweep needs at least one credit level".into()));
    }
    if let Some(bad) = levels
        .iter()
        .find(|&&c| !(c.is_finite() && (0.0..=config.credit_max).contains(&c)))
    {
        return Err(HarnessError::Invalid(format!(
            "credit level {bad} outside [0, {}]",
            config.credit_max
        )));
    }
    let opts = RunOptions::new(episodes, first_seed);
    levels
        .iter()
        .map(|&credit| {
            let s = run_episodes(config.clone(), Policy::Uniform { credit }, &opts, None)?;
            Ok(FrontierPoint {
                credit_level: credit,
                mean_episode_reward: s.mean_reward,
                mean_utility_revenue: s.mean_revenue,
                cvar95_bills: s.cvar95_bills,
                budget_utilization: s.budget_utilization,
            })
        })
        .collect()
}

pub fn write_frontier_csv<W: Write>(points: &[FrontierPoint], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
