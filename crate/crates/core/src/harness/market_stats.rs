use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::config::{SimConfig, STEPS_PER_DAY};
use crate::env::Environment;
use crate::market::{tou_base, Regime};

pub const MIN_VALIDATION_STEPS: usize = 1000;
/// Price above which an hour counts as a spike hour, $/kWh.
pub const SPIKE_HOUR_PRICE: f64 = 1.0;

/// Hourly market outputs of an agent-free run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarketTrace {
    pub prices: Vec<f64>,
    pub hours: Vec<u32>,
    pub regimes: Vec<Regime>,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketStatsReport {
    pub n_steps: usize,
    pub seed: u64,
    pub lag1_autocorr: f64,
    /// Median normal-regime price per hour of day (NaN if an hour never
    /// appears in the normal regime).
    pub hourly_price_medians: Vec<f64>,
    pub spike_hour_fraction: f64,
    /// Mean length of storms that start and end inside the trace.
    pub mean_storm_duration_hours: f64,
    pub n_storms: usize,
    /// Least-squares residual sigma of the AR(1) noise over consecutive
    /// off-peak hours.
    pub overnight_innovation_sigma: f64,
}

/// Run the environment with no credits for `n_steps` hours and record the
/// market. With no curtailment the elasticity term stays at zero.
pub fn market_trace(config: &SimConfig, seed: u64, n_steps: usize) -> Result<MarketTrace, HarnessError> {
    let days = n_steps.div_ceil(STEPS_PER_DAY as usize);
    let cfg = SimConfig {
        episode_days: u32::try_from(days).map_err(|_| HarnessError::Invalid("trace too long".into()))?,
        ..config.clone()
    };
    let mut env = Environment::new(Arc::new(cfg))?;
    env.reset(seed)?;
    let mut trace = MarketTrace {
        prices: Vec::with_capacity(n_steps),
        hours: Vec::with_capacity(n_steps),
        regimes: Vec::with_capacity(n_steps),
        xi: Vec::with_capacity(n_steps),
    };
    for _ in 0..n_steps {
        let market = env.market_state().expect("environment was reset");
        let rec = env.step(0.0)?.record;
        trace.prices.push(rec.price);
        trace.hours.push(rec.hour);
        trace.regimes.push(market.regime);
        trace.xi.push(market.xi);
    }
    Ok(trace)
}

/// Market validation statistics over an `n_steps` trace from the
/// configured seed.
pub fn validate_market(config: &SimConfig, n_steps: usize) -> Result<MarketStatsReport, HarnessError> {
    if n_steps < MIN_VALIDATION_STEPS {
        return Err(HarnessError::Invalid(format!(
            "validation needs at least {MIN_VALIDATION_STEPS} steps, got {n_steps}"
        )));
    }
    let trace = market_trace(config, config.seed, n_steps)?;
    let (mean_storm_duration_hours, n_storms) = storm_durations(&trace.regimes);
    Ok(MarketStatsReport {
        n_steps,
        seed: config.seed,
        lag1_autocorr: lag1_autocorrelation(&trace.prices),
        hourly_price_medians: hourly_medians(&trace),
        spike_hour_fraction: trace.prices.iter().filter(|&&p| p > SPIKE_HOUR_PRICE).count() as f64 / n_steps as f64,
        mean_storm_duration_hours,
        n_storms,
        overnight_innovation_sigma: overnight_sigma(&trace, config),
    })
}

pub(crate) fn lag1_autocorrelation(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    cov / var
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn hourly_medians(trace: &MarketTrace) -> Vec<f64> {
    let mut by_hour = vec![Vec::new(); STEPS_PER_DAY as usize];
    for ((&p, &h), &r) in trace.prices.iter().zip(&trace.hours).zip(&trace.regimes) {
        if r == Regime::Normal {
            by_hour[h as usize].push(p);
        }
    }
    by_hour.iter_mut().map(|v| median(v)).collect()
}

/// Mean duration and count of storms fully inside the trace.
pub(crate) fn storm_durations(regimes: &[Regime]) -> (f64, usize) {
    let mut lengths = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for (i, &r) in regimes.iter().enumerate() {
        match (r, run) {
            (Regime::SpikeStorm, None) => run = Some((i, 1)),
            (Regime::SpikeStorm, Some((s, l))) => run = Some((s, l + 1)),
            (Regime::Normal, Some((s, l))) => {
                if s > 0 {
                    lengths.push(l);
                }
                run = None;
            }
            (Regime::Normal, None) => {}
        }
    }
    if lengths.is_empty() {
        return (f64::NAN, 0);
    }
    (lengths.iter().sum::<usize>() as f64 / lengths.len() as f64, lengths.len())
}

fn overnight_sigma(trace: &MarketTrace, config: &SimConfig) -> f64 {
    let offpeak = &config.price.offpeak_hours;
    let pairs: Vec<(f64, f64)> = (1..trace.xi.len())
        .filter(|&i| offpeak.contains(&trace.hours[i]) && offpeak.contains(&trace.hours[i - 1]))
        .map(|i| (trace.xi[i - 1], trace.xi[i]))
        .collect();
    if pairs.len() < 3 {
        return f64::NAN;
    }
    let sxx: f64 = pairs.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pairs.iter().map(|(x, y)| x * y).sum();
    let slope = sxy / sxx;
    let sse: f64 = pairs.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    (sse / (pairs.len() - 1) as f64).sqrt()
}

/// Configured TOU price for each hour of day.
pub fn configured_tiers(config: &SimConfig) -> Vec<f64> {
    (0..STEPS_PER_DAY).map(|h| tou_base(h, &config.price)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Regime::{Normal as N, SpikeStorm as S};

    #[test]
    fn storms_touching_edges_are_dropped() {
        assert_eq!(storm_durations(&[S, S, N, N, S, S, S, N, S]), (3.0, 1));
        assert_eq!(storm_durations(&[N, S, N, S, S, N]), (1.5, 2));
        assert_eq!(storm_durations(&[N, N]).1, 0);
    }

    #[test]
    fn autocorrelation_of_simple_series() {
        assert!((lag1_autocorrelation(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]) + 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(lag1_autocorrelation(&[2.0; 10]), 0.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn short_trace_rejected() {
        assert!(validate_market(&SimConfig::default(), 999).is_err());
    }

    #[test]
    fn report_fields_in_range() {
        let cfg = SimConfig {
            n_buildings: 5,
            ..SimConfig::default()
        };
        let r = validate_market(&cfg, 2000).unwrap();
        assert_eq!(r.hourly_price_medians.len(), 24);
        assert!((0.0..=1.0).contains(&r.spike_hour_fraction));
        assert!((r.overnight_innovation_sigma - 0.02).abs() < 0.004, "{}", r.overnight_innovation_sigma);
        assert_eq!(configured_tiers(&cfg)[17], 0.18);
    }
}
