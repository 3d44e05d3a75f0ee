//! Hourly wholesale price process.
//!
//! The price for hour `h` is
//!
//! ```text
//! p = clamp(tou(h) + xi + s - lambda * E, floor, cap)
//! xi' = rho * xi + eps,  eps ~ N(0, (sigma_eps * het[h])^2)
//! ```
//!
//! where `s` is the spike component of a two-state Normal/SpikeStorm Markov
//! chain and `E` is an EWMA of recent aggregate demand reductions. A storm's
//! magnitude `exp(N(mu, sigma^2))` $/kWh is drawn when the storm starts and
//! held until it ends.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::PriceParams;

/// Forecast horizons exposed in the observation.
pub const FORECAST_HORIZON: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Normal,
    SpikeStorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    /// AR(1) residual, $/kWh.
    pub xi: f64,
    pub regime: Regime,
    /// Spike component, $/kWh; zero in the normal regime.
    pub spike: f64,
    /// EWMA of aggregate reductions, kWh.
    pub reduction_ewma: f64,
    pub last_price: f64,
}

impl MarketState {
    pub fn new(params: &PriceParams) -> Self {
        Self {
            xi: 0.0,
            regime: Regime::Normal,
            spike: 0.0,
            reduction_ewma: 0.0,
            last_price: tou_base(0, params).clamp(params.price_floor, params.price_cap),
        }
    }
}

/// Random inputs consumed by one market step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Innovations {
    /// Standard normal scaled into the AR(1) innovation.
    pub noise_z: f64,
    /// Uniform on [0, 1) deciding the regime transition.
    pub regime_u: f64,
}

/// Time-of-use base price for `hour`.
pub fn tou_base(hour: u32, p: &PriceParams) -> f64 {
    if p.peak_hours.contains(&hour) {
        p.tou_peak
    } else if p.offpeak_hours.contains(&hour) {
        p.tou_offpeak
    } else {
        p.tou_shoulder
    }
}

pub fn is_extreme_temperature(temp_c: f64, p: &PriceParams) -> bool {
    temp_c > p.extreme_temp_hi || temp_c < p.extreme_temp_lo
}

/// Hourly probability of entering a spike storm: doubled on peak hours and
/// boosted by `1 + temp_spike_boost` at extreme temperatures.
pub fn spike_entry_probability(hour: u32, temp_c: f64, p: &PriceParams) -> f64 {
    let peak = if p.peak_hours.contains(&hour) { 2.0 } else { 1.0 };
    let boost = if is_extreme_temperature(temp_c, p) {
        1.0 + p.temp_spike_boost
    } else {
        1.0
    };
    (p.spike_entry_base * peak * boost).clamp(0.0, 1.0)
}

/// `alpha * E + (1 - alpha) * reduction_total`.
pub fn update_reduction_ewma(ewma: f64, reduction_total: f64, alpha: f64) -> f64 {
    alpha * ewma + (1.0 - alpha) * reduction_total
}

impl MarketState {
    /// Produce the price for `hour`, drawing from `rng` in a fixed order:
    /// innovation normal, regime uniform, then the storm magnitude normal
    /// only when a storm starts.
    pub fn advance<R: Rng + ?Sized>(&mut self, hour: u32, temp_c: f64, p: &PriceParams, rng: &mut R) -> f64 {
        let draws = Innovations {
            noise_z: rng.sample(StandardNormal),
            regime_u: rng.random(),
        };
        self.advance_with(hour, temp_c, p, draws, || rng.sample(StandardNormal))
    }

    /// Deterministic core of [`MarketState::advance`]. `magnitude_z` is
    /// called at most once, when the chain enters a storm.
    pub fn advance_with<F: FnOnce() -> f64>(
        &mut self,
        hour: u32,
        temp_c: f64,
        p: &PriceParams,
        draws: Innovations,
        magnitude_z: F,
    ) -> f64 {
        let sigma = p.sigma_eps * p.het_multipliers[hour as usize];
        self.xi = p.rho * self.xi + sigma * draws.noise_z;

        match self.regime {
            Regime::Normal => {
                if draws.regime_u < spike_entry_probability(hour, temp_c, p) {
                    self.regime = Regime::SpikeStorm;
                    self.spike = (p.spike_lognormal_mu + p.spike_lognormal_sigma * magnitude_z()).exp();
                }
            }
            Regime::SpikeStorm => {
                if draws.regime_u < p.spike_exit_prob {
                    self.regime = Regime::Normal;
                    self.spike = 0.0;
                }
            }
        }

        let raw = tou_base(hour, p) + self.xi + self.spike;
        let adjusted = raw - p.elasticity_lambda * self.reduction_ewma;
        self.last_price = adjusted.clamp(p.price_floor, p.price_cap);
        self.last_price
    }

    /// Fold this step's aggregate reduction into the EWMA used by the next price.
    pub fn record_reduction(&mut self, reduction_total: f64, p: &PriceParams) {
        self.reduction_ewma = update_reduction_ewma(self.reduction_ewma, reduction_total, p.ewma_alpha);
    }
}

/// Forecast for hours `hour + 1 ..= hour + 4`: TOU plus the decayed AR(1)
/// residual, without spike or elasticity terms.
pub fn price_forecast(state: &MarketState, hour: u32, p: &PriceParams) -> [f64; FORECAST_HORIZON] {
    let mut out = [0.0; FORECAST_HORIZON];
    let mut decay = 1.0;
    for (h, slot) in out.iter_mut().enumerate() {
        decay *= p.rho;
        let future_hour = (hour + h as u32 + 1) % 24;
        *slot = (tou_base(future_hour, p) + decay * state.xi).clamp(p.price_floor, p.price_cap);
    }
    out
}
