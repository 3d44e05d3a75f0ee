//! The demand-response MDP: reset, step, observation and reward.
//!
//! One call to [`Environment::step`] runs, in order:
//!
//! 1. clamp the action to `[0, credit_max]`;
//! 2. pre-cap the credit by `remaining / previous aggregate demand`;
//! 3. if the credit is positive, every building samples a response against
//!    its raw baseline (building order fixed);
//! 4. post-reduction loads `max(0, base * m - r)` and their sum `D`;
//! 5. payout on accepting buildings' load, rescaled to fit the budget, and
//!    charged to the ledger;
//! 6. revenue `(retail - c - p) D`, consumer cost `(retail - c) D`, and
//!    per-building bills (credit applied to accepting buildings only);
//! 7. grid stress of `(D, p, T)`;
//! 8. incremental risk of the cumulative bill vector;
//! 9. the scaled, weighted reward;
//! 10. fatigue, persistence multipliers and the reduction EWMA;
//! 11. clock advance, with a fresh budget at each day boundary;
//! 12. the next hour's price, forecast, temperature and baselines;
//! 13. the next observation.
//!
//! The price shown in an observation is the price of the hour the next
//! action applies to.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::budget::{cap_credit, draw_daily_budget, settle_payout, BudgetError, BudgetLedger};
use crate::config::{DemandSource, RewardParams, SimConfig, STEPS_PER_DAY};
use crate::customer::{archetype_for, sample_response, CustomerError, CustomerState, Response};
use crate::demand::{
    assign_replay, baseline_demand, effective_demand, load_profiles_csv, synthetic_baseline, synthetic_temperature,
    update_feedback_multiplier, BuildingProfile, DemandContext, DemandError, SourceProfile, WeatherSeries,
    REUSE_JITTER,
};
use crate::market::{price_forecast, MarketState, FORECAST_HORIZON};
use crate::risk::{cvar, delta_risk, RiskError, RiskMeasure, RiskRegistry};
use crate::rng::{SeedStreams, Stream, SETUP_COUNTER, WEATHER_LANE};
use crate::stress::{stress_indicators, StressReadout};

/// Length of the observation vector.
pub const OBS_DIM: usize = 32;
/// Buildings whose individual loads appear in the observation.
pub const OBS_BUILDINGS: usize = 10;
/// Length of the aggregate demand history window.
pub const DEMAND_HISTORY: usize = 5;
/// Tail level of the CVaR reported in step records and summaries.
pub const REPORT_CVAR_ALPHA: f64 = 0.95;
/// Market steps run at reset before the first observed price.
pub const BURN_IN_STEPS: u32 = 24;

/// Observation layout.
pub mod idx {
    pub const HOUR: usize = 0;
    pub const DAY_OF_WEEK: usize = 1;
    pub const AGGREGATE_DEMAND: usize = 2;
    pub const PRICE: usize = 3;
    pub const FORECAST: usize = 4;
    pub const TEMPERATURE: usize = 8;
    pub const DEMAND_STRESS: usize = 9;
    pub const PRICE_STRESS: usize = 10;
    pub const THERMAL_STRESS: usize = 11;
    pub const OVERALL_STRESS: usize = 12;
    pub const BUDGET_REMAINING: usize = 13;
    pub const LAST_CREDIT: usize = 14;
    pub const BUILDING_LOADS: usize = 15;
    pub const DEMAND_HISTORY: usize = 25;
    pub const CUMULATIVE_CREDITS: usize = 30;
    pub const DAY_IN_EPISODE: usize = 31;
}

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    Customer(#[from] CustomerError),
    #[error("environment must be reset before stepping")]
    NotReset,
    #[error("episode is over; call reset")]
    EpisodeOver,
    #[error("action must be a finite number, got {0}")]
    InvalidAction(f64),
}

/// A 32-element observation in raw engineering units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for Observation {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Reward and its four weighted, scaled components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub total: f64,
    pub revenue: f64,
    pub cost: f64,
    pub stress: f64,
    pub risk: f64,
}

/// `scale * (w_R R/N - w_C C/N - w_s stress - w_risk delta_risk)`.
///
/// ```
/// use drsim::config::RewardParams;
/// use drsim::env::reward;
///
/// let r = reward(&RewardParams::default(), 50.0, 100.0, 0.5, 0.0, 50);
/// assert!((r.total - -0.008).abs() < 1e-12);
/// ```
pub fn reward(
    p: &RewardParams,
    revenue: f64,
    consumer_cost: f64,
    stress_overall: f64,
    delta_risk: f64,
    n_buildings: usize,
) -> RewardBreakdown {
    let n = n_buildings as f64;
    let total = p.scale
        * (p.w_revenue * revenue / n - p.w_cost * consumer_cost / n - p.w_stress * stress_overall - p.w_risk * delta_risk);
    RewardBreakdown {
        total,
        revenue: p.scale * p.w_revenue * revenue / n,
        cost: -p.scale * p.w_cost * consumer_cost / n,
        stress: -p.scale * p.w_stress * stress_overall,
        risk: -p.scale * p.w_risk * delta_risk,
    }
}

/// Everything observable about one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u32,
    pub day: u32,
    pub hour: u32,
    pub price: f64,
    pub temperature: f64,
    pub credit_requested: f64,
    pub credit_effective: f64,
    pub aggregate_demand: f64,
    pub accepted_demand: f64,
    pub n_accepted: usize,
    pub reduction_total_kwh: f64,
    pub revenue: f64,
    pub consumer_cost: f64,
    pub bill_increment_total: f64,
    pub payout: f64,
    pub daily_budget: f64,
    pub budget_remaining: f64,
    pub stress: StressReadout,
    pub reward: f64,
    pub reward_revenue: f64,
    pub reward_cost: f64,
    pub reward_stress: f64,
    pub reward_risk: f64,
    pub delta_risk: f64,
    pub cvar_running: f64,
}

/// Returned by [`Environment::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub obs: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub record: StepRecord,
}

/// Episode metadata returned by [`Environment::reset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetInfo {
    pub seed: u64,
    pub day_of_year: u32,
    pub day_of_week: u32,
    pub daily_budget: f64,
    pub episode_steps: u32,
    pub n_buildings: usize,
}

/// Episode totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub steps: u32,
    pub total_reward: f64,
    pub revenue: f64,
    pub consumer_cost: f64,
    pub payouts: f64,
    /// Sum of each day's available budget.
    pub budget_available: f64,
    /// `payouts / budget_available` (0 when no budget was available).
    pub budget_utilization: f64,
    pub final_cvar: f64,
}

#[derive(Debug, Clone)]
struct Building {
    profile: BuildingProfile,
    customer: CustomerState,
    /// Raw baseline for the current hour.
    d_base: f64,
    /// Post-reduction load of the last settled hour.
    load: f64,
}

#[derive(Debug, Clone)]
struct ReplayData {
    profiles: Vec<SourceProfile>,
    weather: WeatherSeries,
}

#[derive(Debug, Clone)]
struct EnvState {
    streams: SeedStreams,
    market_rng: ChaCha8Rng,
    budget_rng: ChaCha8Rng,
    t: u32,
    start_doy: u32,
    start_dow: u32,
    market: MarketState,
    price: f64,
    forecast: [f64; FORECAST_HORIZON],
    temp: f64,
    buildings: Vec<Building>,
    bills: Vec<f64>,
    ledger: BudgetLedger,
    history: VecDeque<f64>,
    /// Aggregate demand shown before any step has settled.
    preview_demand: f64,
    /// Reference demand for the credit pre-cap.
    last_demand: f64,
    last_credit: f64,
    cumulative_credits: f64,
    prev_risk: f64,
    obs_stress: StressReadout,
    totals: EpisodeSummary,
    done: bool,
}

/// A single simulator instance. Not shareable mid-step; cheap to clone the
/// configuration and build one instance per worker.
#[derive(Debug, Clone)]
pub struct Environment {
    config: Arc<SimConfig>,
    replay: Option<Arc<ReplayData>>,
    risk: Arc<dyn RiskMeasure>,
    state: Option<EnvState>,
}

impl Environment {
    /// Build an environment, loading replay profiles if configured.
    pub fn new(config: Arc<SimConfig>) -> Result<Self, EnvError> {
        Self::with_registry(config, &RiskRegistry::default())
    }

    /// Like [`Environment::new`] but resolving the reward's risk measure
    /// through a custom registry.
    pub fn with_registry(config: Arc<SimConfig>, registry: &RiskRegistry) -> Result<Self, EnvError> {
        config.validate()?;
        let replay = match &config.demand_source {
            DemandSource::Synthetic => None,
            DemandSource::CsvReplay {
                profile_path,
                weather_path,
            } => {
                let (profiles, weather) = load_profiles_csv(profile_path, weather_path)?;
                Some(Arc::new(ReplayData { profiles, weather }))
            }
        };
        let risk = registry.resolve(&config.reward.risk)?;
        Ok(Self {
            config,
            replay,
            risk,
            state: None,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn is_done(&self) -> bool {
        self.state.as_ref().map_or(true, |s| s.done)
    }

    /// Start a new episode from `seed`.
    pub fn reset(&mut self, seed: u64) -> Result<(Observation, ResetInfo), EnvError> {
        let cfg = &*self.config;
        let streams = SeedStreams::new(seed);
        let mut budget_rng = streams.sequential(Stream::Budget);
        let start_doy = match cfg.day_of_year {
            Some(d) => d,
            None => budget_rng.random_range(0..365),
        };
        let start_dow = start_doy % 7;

        let buildings = self.build_population(&streams);
        let daily_budget = draw_daily_budget(start_doy, 0.0, &mut budget_rng, &cfg.budget);
        let ledger = BudgetLedger::new(start_doy, daily_budget, 0.0);

        let market_rng = streams.sequential(Stream::Market);
        let mut state = EnvState {
            streams,
            market_rng,
            budget_rng,
            t: 0,
            start_doy,
            start_dow,
            market: MarketState::new(&cfg.price),
            price: 0.0,
            forecast: [0.0; FORECAST_HORIZON],
            temp: 0.0,
            bills: vec![0.0; buildings.len()],
            buildings,
            ledger,
            history: VecDeque::with_capacity(DEMAND_HISTORY),
            preview_demand: 0.0,
            last_demand: 0.0,
            last_credit: 0.0,
            cumulative_credits: 0.0,
            prev_risk: 0.0,
            obs_stress: stress_indicators(0.0, 0.0, 0.0, &cfg.stress),
            totals: EpisodeSummary {
                seed,
                steps: 0,
                total_reward: 0.0,
                revenue: 0.0,
                consumer_cost: 0.0,
                payouts: 0.0,
                budget_available: daily_budget,
                budget_utilization: 0.0,
                final_cvar: 0.0,
            },
            done: false,
        };

        for k in 0..BURN_IN_STEPS {
            let temp = self.temperature(&state, k);
            state.market.advance(k % STEPS_PER_DAY, temp, &cfg.price, &mut state.market_rng);
        }
        self.enter_hour(&mut state);
        state.preview_demand = state.buildings.iter().map(|b| b.d_base * b.profile.persistence).sum();
        state.last_demand = state.preview_demand;
        for b in &mut state.buildings {
            b.load = b.d_base * b.profile.persistence;
        }
        state.obs_stress = stress_indicators(state.preview_demand, state.price, state.temp, &cfg.stress);

        let info = ResetInfo {
            seed,
            day_of_year: start_doy,
            day_of_week: start_dow,
            daily_budget,
            episode_steps: cfg.episode_steps(),
            n_buildings: cfg.n_buildings,
        };
        let obs = self.observation(&state);
        self.state = Some(state);
        Ok((obs, info))
    }

    /// Apply one credit decision ($/kWh) and advance one hour.
    pub fn step(&mut self, action: f64) -> Result<StepOutcome, EnvError> {
        let mut state = self.state.take().ok_or(EnvError::NotReset)?;
        if state.done {
            self.state = Some(state);
            return Err(EnvError::EpisodeOver);
        }
        if !action.is_finite() {
            self.state = Some(state);
            return Err(EnvError::InvalidAction(action));
        }
        let result = self.step_inner(&mut state, action);
        self.state = Some(state);
        result
    }

    fn step_inner(&self, s: &mut EnvState, action: f64) -> Result<StepOutcome, EnvError> {
        let cfg = &*self.config;
        let hour = s.t % STEPS_PER_DAY;
        let clock = s.t + BURN_IN_STEPS;
        let n = s.buildings.len();

        // (1)-(2)
        let credit = action.clamp(0.0, cfg.credit_max);
        let credit = cap_credit(credit, s.ledger.remaining, s.last_demand);

        // (3)-(4)
        let mut responses = Vec::with_capacity(n);
        let mut aggregate = 0.0;
        let mut accepted_demand = 0.0;
        let mut reduction_total = 0.0;
        let mut n_accepted = 0;
        for (i, b) in s.buildings.iter_mut().enumerate() {
            let resp = if credit > 0.0 {
                let mut rng = s.streams.slot(Stream::Customer, i as u32, clock);
                sample_response(&b.customer, credit, b.d_base, &cfg.customer, &mut rng)?
            } else {
                Response::NONE
            };
            b.load = effective_demand(b.d_base, b.profile.persistence, resp.reduction_kwh);
            aggregate += b.load;
            reduction_total += resp.reduction_kwh;
            if resp.accepted {
                accepted_demand += b.load;
                n_accepted += 1;
            }
            responses.push(resp);
        }

        // (5)
        let (credit_eff, payout) = if credit > 0.0 {
            settle_payout(credit, accepted_demand, s.ledger.remaining)
        } else {
            (0.0, 0.0)
        };
        let daily_budget = s.ledger.today_budget;
        s.ledger.charge(payout)?;

        // (6)
        let price = s.price;
        let revenue = (cfg.retail_rate - credit_eff - price) * aggregate;
        let consumer_cost = (cfg.retail_rate - credit_eff) * aggregate;
        let mut bill_increment_total = 0.0;
        for ((bill, b), resp) in s.bills.iter_mut().zip(&s.buildings).zip(&responses) {
            let rate = if resp.accepted {
                cfg.retail_rate - credit_eff
            } else {
                cfg.retail_rate
            };
            let inc = rate * b.load;
            *bill += inc;
            bill_increment_total += inc;
        }

        // (7)-(9)
        let stress = stress_indicators(aggregate, price, s.temp, &cfg.stress);
        let risk = delta_risk(s.prev_risk, &s.bills, &*self.risk)?;
        s.prev_risk = risk.new_risk;
        let cvar_running = cvar(&s.bills, REPORT_CVAR_ALPHA)?;
        let r = reward(&cfg.reward, revenue, consumer_cost, stress.overall, risk.delta, n);

        // (10)
        for (b, resp) in s.buildings.iter_mut().zip(&responses) {
            b.customer.fatigue = crate::customer::update_fatigue(b.customer.fatigue, resp.accepted, &cfg.customer);
            b.profile.persistence = update_feedback_multiplier(b.profile.persistence, resp.delta, cfg.feedback_gamma)?;
        }
        s.market.record_reduction(reduction_total, &cfg.price);

        let record = StepRecord {
            t: s.t,
            day: s.t / STEPS_PER_DAY,
            hour,
            price,
            temperature: s.temp,
            credit_requested: action,
            credit_effective: credit_eff,
            aggregate_demand: aggregate,
            accepted_demand,
            n_accepted,
            reduction_total_kwh: reduction_total,
            revenue,
            consumer_cost,
            bill_increment_total,
            payout,
            daily_budget,
            budget_remaining: s.ledger.remaining,
            stress,
            reward: r.total,
            reward_revenue: r.revenue,
            reward_cost: r.cost,
            reward_stress: r.stress,
            reward_risk: r.risk,
            delta_risk: risk.delta,
            cvar_running,
        };

        s.last_credit = credit_eff;
        s.cumulative_credits += payout;
        if s.history.len() == DEMAND_HISTORY {
            s.history.pop_front();
        }
        s.history.push_back(aggregate);
        s.last_demand = aggregate;

        s.totals.steps += 1;
        s.totals.total_reward += r.total;
        s.totals.revenue += revenue;
        s.totals.consumer_cost += consumer_cost;
        s.totals.payouts += payout;
        s.totals.final_cvar = cvar_running;
        s.totals.budget_utilization = if s.totals.budget_available > 0.0 {
            s.totals.payouts / s.totals.budget_available
        } else {
            0.0
        };

        // (11)-(12)
        s.t += 1;
        s.done = s.t >= cfg.episode_steps();
        if !s.done {
            if s.t % STEPS_PER_DAY == 0 {
                let doy = self.day_of_year(s, s.t + BURN_IN_STEPS);
                s.ledger.roll_over(doy, &mut s.budget_rng, &cfg.budget);
                s.totals.budget_available += s.ledger.today_budget;
            }
            self.enter_hour(s);
        }
        s.obs_stress = stress_indicators(aggregate, s.price, s.temp, &cfg.stress);

        // (13)
        Ok(StepOutcome {
            obs: self.observation(s),
            reward: r.total,
            terminated: s.done,
            truncated: false,
            record,
        })
    }

    /// Totals of the current (or just finished) episode.
    pub fn summary(&self) -> Option<&EpisodeSummary> {
        self.state.as_ref().map(|s| &s.totals)
    }

    /// Cumulative per-building bills of the current episode.
    pub fn bills(&self) -> &[f64] {
        self.state.as_ref().map_or(&[], |s| &s.bills)
    }

    /// Remaining and total budget of the current day.
    pub fn ledger(&self) -> Option<BudgetLedger> {
        self.state.as_ref().map(|s| s.ledger)
    }

    pub fn market_state(&self) -> Option<MarketState> {
        self.state.as_ref().map(|s| s.market)
    }

    /// Current observation without stepping.
    pub fn current_observation(&self) -> Option<Observation> {
        self.state.as_ref().map(|s| self.observation(s))
    }

    fn build_population(&self, streams: &SeedStreams) -> Vec<Building> {
        let cfg = &*self.config;
        let archetypes: Vec<usize> = (0..cfg.n_buildings)
            .map(|i| {
                let u: f64 = streams.slot(Stream::Customer, i as u32, SETUP_COUNTER).random();
                archetype_for(u, &cfg.customer.archetypes)
            })
            .collect();
        let baselines: Vec<(String, crate::demand::Baseline)> = match &self.replay {
            Some(data) => assign_replay(&data.profiles, cfg.n_buildings, |i| {
                streams
                    .slot(Stream::Demand, i as u32, SETUP_COUNTER)
                    .random_range(REUSE_JITTER.0..REUSE_JITTER.1)
            }),
            None => (0..cfg.n_buildings)
                .map(|i| {
                    let mut rng = streams.slot(Stream::Demand, i as u32, SETUP_COUNTER);
                    let (us, uh): (f64, f64) = (rng.random(), rng.random());
                    (format!("synthetic-{i}"), synthetic_baseline(us, uh, &cfg.synthetic))
                })
                .collect(),
        };
        archetypes
            .into_iter()
            .zip(baselines)
            .map(|(archetype_index, (building_id, baseline))| Building {
                profile: BuildingProfile {
                    building_id,
                    archetype_index,
                    baseline,
                    persistence: 1.0,
                },
                customer: CustomerState::fresh(archetype_index),
                d_base: 0.0,
                load: 0.0,
            })
            .collect()
    }

    /// Day of year at internal clock `clock` (clock 24 is hour 0 of day 0).
    fn day_of_year(&self, s: &EnvState, clock: u32) -> u32 {
        let day = i64::from(clock / STEPS_PER_DAY) - 1;
        (i64::from(s.start_doy) + day).rem_euclid(365) as u32
    }

    fn replay_index(s: &EnvState, clock: u32) -> i64 {
        i64::from(s.start_doy) * i64::from(STEPS_PER_DAY) + i64::from(clock) - i64::from(BURN_IN_STEPS)
    }

    fn temperature(&self, s: &EnvState, clock: u32) -> f64 {
        match &self.replay {
            Some(data) => data.weather.at(Self::replay_index(s, clock)),
            None => {
                let z: f64 = s
                    .streams
                    .slot(Stream::Demand, WEATHER_LANE, clock)
                    .sample(StandardNormal);
                synthetic_temperature(
                    self.day_of_year(s, clock),
                    clock % STEPS_PER_DAY,
                    self.config.synthetic.temp_noise_sigma * z,
                )
            }
        }
    }

    /// Produce price, forecast, temperature and baselines for hour `s.t`.
    fn enter_hour(&self, s: &mut EnvState) {
        let cfg = &*self.config;
        let clock = s.t + BURN_IN_STEPS;
        let hour = s.t % STEPS_PER_DAY;
        s.temp = self.temperature(s, clock);
        s.price = s.market.advance(hour, s.temp, &cfg.price, &mut s.market_rng);
        s.forecast = price_forecast(&s.market, hour, &cfg.price);
        let synthetic = self.replay.is_none();
        let step = Self::replay_index(s, clock);
        for (i, b) in s.buildings.iter_mut().enumerate() {
            let noise_z = if synthetic {
                s.streams.slot(Stream::Demand, i as u32, clock).sample(StandardNormal)
            } else {
                0.0
            };
            let ctx = DemandContext {
                step,
                hour,
                temp_c: s.temp,
                noise_z,
            };
            b.d_base = baseline_demand(&b.profile, &ctx, &cfg.synthetic);
        }
    }

    fn observation(&self, s: &EnvState) -> Observation {
        let mut o = [0.0; OBS_DIM];
        // After the final step the clock points past the horizon; report the
        // last hour acted on.
        let t = if s.done { s.t - 1 } else { s.t };
        let day = t / STEPS_PER_DAY;
        o[idx::HOUR] = f64::from(t % STEPS_PER_DAY);
        o[idx::DAY_OF_WEEK] = f64::from((s.start_dow + day) % 7);
        o[idx::AGGREGATE_DEMAND] = s.history.back().copied().unwrap_or(s.preview_demand);
        o[idx::PRICE] = s.price;
        o[idx::FORECAST..idx::FORECAST + FORECAST_HORIZON].copy_from_slice(&s.forecast);
        o[idx::TEMPERATURE] = s.temp;
        o[idx::DEMAND_STRESS] = s.obs_stress.demand;
        o[idx::PRICE_STRESS] = s.obs_stress.price;
        o[idx::THERMAL_STRESS] = s.obs_stress.thermal;
        o[idx::OVERALL_STRESS] = s.obs_stress.overall;
        o[idx::BUDGET_REMAINING] = s.ledger.remaining;
        o[idx::LAST_CREDIT] = s.last_credit;
        for (slot, b) in o[idx::BUILDING_LOADS..idx::BUILDING_LOADS + OBS_BUILDINGS]
            .iter_mut()
            .zip(&s.buildings)
        {
            *slot = b.load;
        }
        let window = &mut o[idx::DEMAND_HISTORY..idx::DEMAND_HISTORY + DEMAND_HISTORY];
        if s.history.is_empty() {
            window[DEMAND_HISTORY - 1] = s.preview_demand;
        } else {
            let offset = DEMAND_HISTORY - s.history.len();
            for (slot, d) in window[offset..].iter_mut().zip(&s.history) {
                *slot = *d;
            }
        }
        o[idx::CUMULATIVE_CREDITS] = s.cumulative_credits;
        o[idx::DAY_IN_EPISODE] = f64::from(day);
        Observation(o)
    }
}

/// Lower and upper bounds of each observation entry for a configuration.
pub fn observation_bounds(cfg: &SimConfig) -> ([f64; OBS_DIM], [f64; OBS_DIM]) {
    const BIG: f64 = 1e12;
    let mut lo = [0.0; OBS_DIM];
    let mut hi = [BIG; OBS_DIM];
    hi[idx::HOUR] = 23.0;
    hi[idx::DAY_OF_WEEK] = 6.0;
    lo[idx::PRICE] = cfg.price.price_floor;
    hi[idx::PRICE] = cfg.price.price_cap;
    for i in idx::FORECAST..idx::FORECAST + FORECAST_HORIZON {
        lo[i] = cfg.price.price_floor;
        hi[i] = cfg.price.price_cap;
    }
    lo[idx::TEMPERATURE] = crate::demand::TEMP_RANGE.0;
    hi[idx::TEMPERATURE] = crate::demand::TEMP_RANGE.1;
    hi[idx::DEMAND_STRESS] = 1.0;
    hi[idx::PRICE_STRESS] = 1.0;
    let st = &cfg.stress;
    let thermal_max = ((crate::demand::TEMP_RANGE.1 - st.thermal_hi) / st.thermal_ramp).max(0.0)
        + ((st.thermal_lo - crate::demand::TEMP_RANGE.0) / st.thermal_ramp).max(0.0);
    hi[idx::THERMAL_STRESS] = thermal_max;
    hi[idx::OVERALL_STRESS] = st.w_demand + st.w_price + st.w_thermal * thermal_max;
    hi[idx::LAST_CREDIT] = cfg.credit_max;
    hi[idx::DAY_IN_EPISODE] = f64::from(cfg.episode_days - 1);
    (lo, hi)
}
