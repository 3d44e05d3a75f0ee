//! Simulator configuration: parameter tables, named presets, TOML loading
//! and `key=value` overrides.
//!
//! A [`SimConfig`] is plain data. It is validated once on construction
//! (see [`SimConfig::validate`]) and treated as immutable afterwards, so a
//! single `Arc<SimConfig>` can back any number of concurrently running
//! environments.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::risk::RiskSpec;

/// Number of hourly steps in a simulated day. Not configurable.
pub const STEPS_PER_DAY: u32 = 24;

/// Longest supported episode.
pub const MAX_EPISODE_DAYS: u32 = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse config: {0}")]
    Parse(String),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("malformed override `{0}` (expected key=value)")]
    MalformedOverride(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("unknown preset `{0}` (expected default, uri_analog or portfolio500)")]
    UnknownPreset(String),
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Full parameterization of the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_buildings: usize,
    pub episode_days: u32,
    /// Fixed at 24; present so config files can state it explicitly.
    pub steps_per_day: u32,
    /// $/kWh paid by consumers.
    pub retail_rate: f64,
    /// Upper bound of the action space, $/kWh.
    pub credit_max: f64,
    /// Decay of the demand-persistence multiplier.
    pub feedback_gamma: f64,
    /// Starting day of year (0..365). `None` draws it uniformly per episode.
    pub day_of_year: Option<u32>,
    pub seed: u64,
    pub demand_source: DemandSource,
    pub synthetic: SyntheticDemandParams,
    pub price: PriceParams,
    pub customer: CustomerParams,
    pub stress: StressParams,
    pub budget: BudgetParams,
    pub reward: RewardParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_buildings: 50,
            episode_days: 1,
            steps_per_day: STEPS_PER_DAY,
            retail_rate: 0.15,
            credit_max: 0.10,
            feedback_gamma: 0.9,
            day_of_year: None,
            seed: 42,
            demand_source: DemandSource::Synthetic,
            synthetic: SyntheticDemandParams::default(),
            price: PriceParams::default(),
            customer: CustomerParams::default(),
            stress: StressParams::default(),
            budget: BudgetParams::default(),
            reward: RewardParams::default(),
        }
    }
}

/// Where per-building baseline demand and outdoor temperature come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DemandSource {
    /// Replay long-format CSV profiles and a weather series.
    CsvReplay {
        profile_path: PathBuf,
        weather_path: PathBuf,
    },
    /// Temperature-coupled synthetic generator; supports any building count.
    Synthetic,
}

/// Constants of the synthetic demand generator.
///
/// Per-building scale is drawn from `base_scale * U[scale_lo, scale_hi]` and
/// the HVAC coefficient from `U[hvac_lo, hvac_hi]`. The defaults put the
/// population mean hourly load at about 2 kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticDemandParams {
    pub base_scale: f64,
    pub scale_lo: f64,
    pub scale_hi: f64,
    pub hvac_lo: f64,
    pub hvac_hi: f64,
    /// Log-space standard deviation of the multiplicative noise.
    pub noise_sigma: f64,
    /// Standard deviation (°C) of the synthetic temperature noise.
    pub temp_noise_sigma: f64,
}

impl Default for SyntheticDemandParams {
    fn default() -> Self {
        Self {
            base_scale: 2.1,
            scale_lo: 0.7,
            scale_hi: 1.3,
            hvac_lo: 1.0,
            hvac_hi: 2.0,
            noise_sigma: 0.15,
            temp_noise_sigma: 1.0,
        }
    }
}

/// Wholesale price process parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceParams {
    pub tou_offpeak: f64,
    pub tou_shoulder: f64,
    pub tou_peak: f64,
    pub peak_hours: Vec<u32>,
    pub offpeak_hours: Vec<u32>,
    pub rho: f64,
    pub sigma_eps: f64,
    /// Per-hour standard-deviation multiplier of the AR(1) innovation.
    pub het_multipliers: Vec<f64>,
    pub spike_entry_base: f64,
    pub spike_exit_prob: f64,
    pub temp_spike_boost: f64,
    pub spike_lognormal_mu: f64,
    pub spike_lognormal_sigma: f64,
    pub price_cap: f64,
    pub price_floor: f64,
    pub elasticity_lambda: f64,
    pub ewma_alpha: f64,
    /// Temperatures strictly above this count as extreme for spike entry.
    pub extreme_temp_hi: f64,
    /// Temperatures strictly below this count as extreme for spike entry.
    pub extreme_temp_lo: f64,
}

impl Default for PriceParams {
    fn default() -> Self {
        let mut het = vec![1.4; 24];
        for h in [7, 8, 9, 18, 19, 20] {
            het[h] = 1.8;
        }
        for h in [22, 23, 0, 1, 2, 3, 4, 5] {
            het[h] = 1.0;
        }
        Self {
            tou_offpeak: 0.07,
            tou_shoulder: 0.12,
            tou_peak: 0.18,
            peak_hours: (16..=21).collect(),
            offpeak_hours: vec![22, 23, 0, 1, 2, 3, 4, 5],
            rho: 0.9,
            sigma_eps: 0.02,
            het_multipliers: het,
            spike_entry_base: 0.005,
            spike_exit_prob: 0.15,
            temp_spike_boost: 0.03,
            spike_lognormal_mu: 0.4,
            spike_lognormal_sigma: 0.8,
            price_cap: 9.50,
            price_floor: 0.02,
            elasticity_lambda: 0.0,
            ewma_alpha: 0.8,
            extreme_temp_hi: 35.0,
            extreme_temp_lo: 0.0,
        }
    }
}

/// One customer archetype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchetypeParams {
    pub name: String,
    pub proportion: f64,
    pub base_accept: f64,
    pub reduction_mean: f64,
    pub sensitivity_kappa: f64,
}

impl ArchetypeParams {
    fn new(name: &str, proportion: f64, base_accept: f64, reduction_mean: f64, kappa: f64) -> Self {
        Self {
            name: name.to_string(),
            proportion,
            base_accept,
            reduction_mean,
            sensitivity_kappa: kappa,
        }
    }
}

/// Shape of the acceptance curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceForm {
    /// `base * fatigue * 2 * logistic(kappa * (c - midpoint))`, capped at 1.
    /// Increasing in credit; equals `base * fatigue` at the midpoint.
    Calibrated,
    /// `base * fatigue * logistic(-kappa * (c - midpoint))`, decreasing in credit.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CustomerParams {
    pub archetypes: Vec<ArchetypeParams>,
    pub credit_midpoint: f64,
    pub fatigue_decay: f64,
    pub fatigue_recovery: f64,
    pub fatigue_floor: f64,
    /// Reduction standard deviation as a fraction of the archetype mean.
    pub reduction_std_ratio: f64,
    pub reduction_cap: f64,
    /// Multiplies every archetype's kappa.
    pub sensitivity_scale: f64,
    pub acceptance_form: AcceptanceForm,
}

impl Default for CustomerParams {
    fn default() -> Self {
        Self {
            archetypes: vec![
                ArchetypeParams::new("price_sensitive", 0.30, 0.80, 0.20, 3.0),
                ArchetypeParams::new("eco_conscious", 0.20, 0.85, 0.18, 1.5),
                ArchetypeParams::new("neutral", 0.35, 0.65, 0.12, 2.0),
                ArchetypeParams::new("reluctant", 0.15, 0.40, 0.08, 1.0),
            ],
            credit_midpoint: 0.05,
            fatigue_decay: 0.1,
            fatigue_recovery: 0.05,
            fatigue_floor: 0.3,
            reduction_std_ratio: 0.25,
            reduction_cap: 0.5,
            sensitivity_scale: 1.0,
            acceptance_form: AcceptanceForm::Calibrated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StressParams {
    /// Aggregate demand (kWh) at which demand stress is 0.5.
    pub demand_threshold: f64,
    /// Logistic slope of demand stress, per kWh.
    pub demand_slope: f64,
    pub price_threshold: f64,
    pub price_slope: f64,
    pub thermal_hi: f64,
    pub thermal_lo: f64,
    pub thermal_ramp: f64,
    pub w_demand: f64,
    pub w_price: f64,
    pub w_thermal: f64,
}

impl Default for StressParams {
    fn default() -> Self {
        Self {
            demand_threshold: 100.0,
            demand_slope: 1.0,
            price_threshold: 0.25,
            price_slope: 20.0,
            thermal_hi: 35.0,
            thermal_lo: 0.0,
            thermal_ramp: 10.0,
            w_demand: 0.3,
            w_price: 0.5,
            w_thermal: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetParams {
    pub mu: f64,
    pub sigma: f64,
    pub rollover: f64,
    pub seasonal_base: f64,
    pub seasonal_amp: f64,
}

impl Default for BudgetParams {
    fn default() -> Self {
        Self {
            mu: 100.0,
            sigma: 20.0,
            rollover: 0.95,
            seasonal_base: 0.6,
            seasonal_amp: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardParams {
    pub w_revenue: f64,
    pub w_cost: f64,
    pub w_stress: f64,
    pub w_risk: f64,
    pub scale: f64,
    /// Risk measure for the incremental penalty, e.g. `"cvar:0.95"` or `"none"`.
    pub risk: RiskSpec,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            w_revenue: 0.3,
            w_cost: 0.5,
            w_stress: 0.2,
            w_risk: 0.3,
            scale: 0.01,
            risk: RiskSpec::Cvar { alpha: 0.95 },
        }
    }
}

/// Named starting points for experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Default,
    UriAnalog,
    Portfolio500,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Default, Preset::UriAnalog, Preset::Portfolio500];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Default => "default",
            Preset::UriAnalog => "uri_analog",
            Preset::Portfolio500 => "portfolio500",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(Preset::Default),
            "uri_analog" | "uri-analog" => Ok(Preset::UriAnalog),
            "portfolio500" => Ok(Preset::Portfolio500),
            other => Err(ConfigError::UnknownPreset(other.to_string())),
        }
    }
}

/// Build the configuration for a named preset.
///
/// ```
/// use drsim::config::{preset, Preset};
///
/// let uri = preset(Preset::UriAnalog);
/// assert_eq!(uri.price.spike_entry_base, 0.08);
/// assert_eq!(uri.episode_days, 7);
/// ```
pub fn preset(name: Preset) -> SimConfig {
    let mut cfg = SimConfig::default();
    match name {
        Preset::Default => {}
        Preset::UriAnalog => {
            cfg.price.spike_entry_base = 0.08;
            cfg.price.temp_spike_boost = 0.15;
            cfg.episode_days = 7;
        }
        Preset::Portfolio500 => {
            cfg.demand_source = DemandSource::Synthetic;
            cfg.n_buildings = 500;
            cfg.stress.demand_threshold = 10_000.0;
        }
    }
    cfg
}

/// A single `key=value` override, e.g. `price.rho=0.85`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Override {
    pub key: String,
    pub value: String,
}

impl Override {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            value: value.into(),
        }
    }
}

impl FromStr for Override {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| ConfigError::MalformedOverride(s.to_string()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::MalformedOverride(s.to_string()));
        }
        Ok(Self::new(key, value.trim()))
    }
}

/// Load a configuration from an optional TOML file on top of the defaults,
/// then apply `overrides` in order and validate.
pub fn load_config(path: Option<&Path>, overrides: &[Override]) -> Result<SimConfig, ConfigError> {
    load_config_from(SimConfig::default(), path, overrides)
}

/// Like [`load_config`] but starting from `base` (typically a preset).
/// Keys absent from the file keep their `base` values.
pub fn load_config_from(
    base: SimConfig,
    path: Option<&Path>,
    overrides: &[Override],
) -> Result<SimConfig, ConfigError> {
    let mut tree = to_tree(&base)?;
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        merge(&mut tree, file);
    }
    for ov in overrides {
        set_key(&mut tree, &ov.key, parse_value(&ov.value))?;
    }
    let cfg: SimConfig = toml::Value::Table(tree)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parse a TOML document into a validated config (absent keys take defaults).
pub fn from_toml_str(text: &str) -> Result<SimConfig, ConfigError> {
    let cfg: SimConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn to_tree(cfg: &SimConfig) -> Result<toml::Table, ConfigError> {
    match toml::Value::try_from(cfg) {
        Ok(toml::Value::Table(t)) => Ok(t),
        Ok(_) => Err(ConfigError::Parse("config did not serialize to a table".into())),
        Err(e) => Err(ConfigError::Parse(e.to_string())),
    }
}

fn merge(dst: &mut toml::Table, src: toml::Table) {
    for (k, v) in src {
        match (dst.get_mut(&k), v) {
            // `demand_source` is a tagged enum: replace it wholesale.
            (Some(toml::Value::Table(d)), toml::Value::Table(s)) if k != "demand_source" => merge(d, s),
            (_, v) => {
                dst.insert(k, v);
            }
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_key(tree: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), ConfigError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().unwrap_or_default();
    let mut node = tree;
    for part in parts {
        node = match node.get_mut(part) {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        };
    }
    // Optional fields serialize as absent, so only well-known ones may be created.
    let creatable = matches!(last, "day_of_year" | "profile_path" | "weather_path");
    if !node.contains_key(last) && !creatable {
        return Err(ConfigError::UnknownKey(key.to_string()));
    }
    node.insert(last.to_string(), value);
    Ok(())
}

impl SimConfig {
    /// Total number of steps in one episode.
    pub fn episode_steps(&self) -> u32 {
        self.episode_days * self.steps_per_day
    }

    /// Serialize to TOML. Parsing the output yields an identical config.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("SimConfig always serializes")
    }

    /// Check every documented invariant, naming the first offending field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, "must be finite"))
            }
        }
        fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
            finite(field, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be > 0, got {v}")))
            }
        }
        fn non_negative(field: &str, v: f64) -> Result<(), ConfigError> {
            finite(field, v)?;
            if v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be >= 0, got {v}")))
            }
        }
        fn unit_closed(field: &str, v: f64) -> Result<(), ConfigError> {
            finite(field, v)?;
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(field, format!("must be in [0, 1], got {v}")))
            }
        }
        fn unit_open(field: &str, v: f64) -> Result<(), ConfigError> {
            finite(field, v)?;
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be in (0, 1), got {v}")))
            }
        }
        fn hours(field: &str, hs: &[u32]) -> Result<(), ConfigError> {
            match hs.iter().find(|&&h| h > 23) {
                Some(h) => Err(invalid(field, format!("hour {h} outside 0..=23"))),
                None => Ok(()),
            }
        }

        if self.n_buildings == 0 {
            return Err(invalid("n_buildings", "must be >= 1"));
        }
        if self.n_buildings >= crate::rng::MAX_LANES {
            return Err(invalid("n_buildings", "too many buildings"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(invalid("seed", "must fit in a TOML integer (<= i64::MAX)"));
        }
        if self.episode_days == 0 || self.episode_days > MAX_EPISODE_DAYS {
            return Err(invalid("episode_days", format!("must be in 1..={MAX_EPISODE_DAYS}")));
        }
        if self.steps_per_day != STEPS_PER_DAY {
            return Err(invalid("steps_per_day", format!("must be {STEPS_PER_DAY}")));
        }
        positive("retail_rate", self.retail_rate)?;
        positive("credit_max", self.credit_max)?;
        unit_closed("feedback_gamma", self.feedback_gamma)?;
        if let Some(doy) = self.day_of_year {
            if doy >= 365 {
                return Err(invalid("day_of_year", format!("must be in 0..365, got {doy}")));
            }
        }

        let s = &self.synthetic;
        positive("synthetic.base_scale", s.base_scale)?;
        positive("synthetic.scale_lo", s.scale_lo)?;
        if !(s.scale_hi >= s.scale_lo) {
            return Err(invalid("synthetic.scale_hi", "must be >= scale_lo"));
        }
        non_negative("synthetic.hvac_lo", s.hvac_lo)?;
        if !(s.hvac_hi >= s.hvac_lo) {
            return Err(invalid("synthetic.hvac_hi", "must be >= hvac_lo"));
        }
        non_negative("synthetic.noise_sigma", s.noise_sigma)?;
        non_negative("synthetic.temp_noise_sigma", s.temp_noise_sigma)?;

        let p = &self.price;
        positive("price.tou_offpeak", p.tou_offpeak)?;
        positive("price.tou_shoulder", p.tou_shoulder)?;
        positive("price.tou_peak", p.tou_peak)?;
        hours("price.peak_hours", &p.peak_hours)?;
        hours("price.offpeak_hours", &p.offpeak_hours)?;
        unit_open("price.rho", p.rho)?;
        non_negative("price.sigma_eps", p.sigma_eps)?;
        if p.het_multipliers.len() != 24 {
            return Err(invalid(
                "price.het_multipliers",
                format!("must have 24 entries, got {}", p.het_multipliers.len()),
            ));
        }
        if let Some(m) = p.het_multipliers.iter().find(|m| !(m.is_finite() && **m >= 1.0)) {
            return Err(invalid("price.het_multipliers", format!("entries must be >= 1, got {m}")));
        }
        unit_closed("price.spike_entry_base", p.spike_entry_base)?;
        finite("price.spike_exit_prob", p.spike_exit_prob)?;
        if !(p.spike_exit_prob > 0.0 && p.spike_exit_prob <= 1.0) {
            return Err(invalid("price.spike_exit_prob", "must be in (0, 1]"));
        }
        non_negative("price.temp_spike_boost", p.temp_spike_boost)?;
        finite("price.spike_lognormal_mu", p.spike_lognormal_mu)?;
        non_negative("price.spike_lognormal_sigma", p.spike_lognormal_sigma)?;
        positive("price.price_floor", p.price_floor)?;
        finite("price.price_cap", p.price_cap)?;
        if p.price_floor >= p.price_cap {
            return Err(invalid("price.price_floor", "must be below price_cap"));
        }
        non_negative("price.elasticity_lambda", p.elasticity_lambda)?;
        unit_closed("price.ewma_alpha", p.ewma_alpha)?;
        finite("price.extreme_temp_hi", p.extreme_temp_hi)?;
        finite("price.extreme_temp_lo", p.extreme_temp_lo)?;

        let c = &self.customer;
        if c.archetypes.is_empty() {
            return Err(invalid("customer.archetypes", "at least one archetype is required"));
        }
        for (i, a) in c.archetypes.iter().enumerate() {
            non_negative(&format!("customer.archetypes[{i}].proportion"), a.proportion)?;
            unit_open(&format!("customer.archetypes[{i}].base_accept"), a.base_accept)?;
            unit_open(&format!("customer.archetypes[{i}].reduction_mean"), a.reduction_mean)?;
            non_negative(&format!("customer.archetypes[{i}].sensitivity_kappa"), a.sensitivity_kappa)?;
        }
        let total: f64 = c.archetypes.iter().map(|a| a.proportion).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(
                "customer.archetypes",
                format!("proportions sum to {total:?}, expected 1"),
            ));
        }
        positive("customer.credit_midpoint", c.credit_midpoint)?;
        non_negative("customer.fatigue_decay", c.fatigue_decay)?;
        non_negative("customer.fatigue_recovery", c.fatigue_recovery)?;
        unit_open("customer.fatigue_floor", c.fatigue_floor)?;
        non_negative("customer.reduction_std_ratio", c.reduction_std_ratio)?;
        finite("customer.reduction_cap", c.reduction_cap)?;
        if !(c.reduction_cap > 0.0 && c.reduction_cap <= 1.0) {
            return Err(invalid("customer.reduction_cap", "must be in (0, 1]"));
        }
        positive("customer.sensitivity_scale", c.sensitivity_scale)?;

        let st = &self.stress;
        finite("stress.demand_threshold", st.demand_threshold)?;
        positive("stress.demand_slope", st.demand_slope)?;
        finite("stress.price_threshold", st.price_threshold)?;
        positive("stress.price_slope", st.price_slope)?;
        finite("stress.thermal_hi", st.thermal_hi)?;
        finite("stress.thermal_lo", st.thermal_lo)?;
        positive("stress.thermal_ramp", st.thermal_ramp)?;
        non_negative("stress.w_demand", st.w_demand)?;
        non_negative("stress.w_price", st.w_price)?;
        non_negative("stress.w_thermal", st.w_thermal)?;

        let b = &self.budget;
        non_negative("budget.mu", b.mu)?;
        non_negative("budget.sigma", b.sigma)?;
        unit_closed("budget.rollover", b.rollover)?;
        non_negative("budget.seasonal_base", b.seasonal_base)?;
        non_negative("budget.seasonal_amp", b.seasonal_amp)?;

        let r = &self.reward;
        finite("reward.w_revenue", r.w_revenue)?;
        finite("reward.w_cost", r.w_cost)?;
        finite("reward.w_stress", r.w_stress)?;
        finite("reward.w_risk", r.w_risk)?;
        positive("reward.scale", r.scale)?;
        r.risk
            .validate()
            .map_err(|e| invalid("reward.risk", e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn empty_file_gives_defaults() {
        let f = write_tmp("");
        let cfg = load_config(Some(f.path()), &[]).unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!(cfg.n_buildings, 50);
        assert_eq!(cfg.episode_days, 1);
        assert_eq!(cfg.retail_rate, 0.15);
        assert_eq!(cfg.credit_max, 0.10);
        assert_eq!(cfg.feedback_gamma, 0.9);
        assert_eq!(cfg.price.rho, 0.9);
        assert_eq!(cfg.price.sigma_eps, 0.02);
        assert_eq!(cfg.price.spike_entry_base, 0.005);
        assert_eq!(cfg.price.spike_exit_prob, 0.15);
        assert_eq!(cfg.price.price_cap, 9.5);
        assert_eq!(cfg.budget.mu, 100.0);
        assert_eq!(cfg.budget.sigma, 20.0);
        assert_eq!(cfg.budget.rollover, 0.95);
        assert_eq!(
            (cfg.reward.w_revenue, cfg.reward.w_cost, cfg.reward.w_stress, cfg.reward.w_risk),
            (0.3, 0.5, 0.2, 0.3)
        );
        assert_eq!(cfg.reward.scale, 0.01);
        let rows: Vec<_> = cfg
            .customer
            .archetypes
            .iter()
            .map(|a| (a.proportion, a.base_accept, a.reduction_mean, a.sensitivity_kappa))
            .collect();
        assert_eq!(
            rows,
            vec![(0.30, 0.80, 0.20, 3.0), (0.20, 0.85, 0.18, 1.5), (0.35, 0.65, 0.12, 2.0), (0.15, 0.40, 0.08, 1.0)]
        );
    }

    #[test]
    fn missing_path_is_defaults() {
        assert_eq!(load_config(None, &[]).unwrap(), SimConfig::default());
    }

    #[test]
    fn bad_proportions_name_the_sum() {
        let mut text = String::new();
        for name in ["a", "b", "c", "d"] {
            text.push_str(&format!(
                "[[customer.archetypes]]\nname = \"{name}\"\nproportion = 0.5\nbase_accept = 0.5\nreduction_mean = 0.1\nsensitivity_kappa = 1.0\n"
            ));
        }
        let f = write_tmp(&text);
        let err = load_config(Some(f.path()), &[]).unwrap_err().to_string();
        assert!(err.contains("proportions sum to 2.0"), "{err}");
        assert!(err.contains("customer.archetypes"), "{err}");
    }

    #[test]
    fn overrides_are_deterministic_and_applied_after_file() {
        let f = write_tmp("seed = 7\n[price]\nrho = 0.8\n");
        let ov = [Override::new("seed", "42")];
        let a = load_config(Some(f.path()), &ov).unwrap();
        let b = load_config(Some(f.path()), &ov).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed, 42);
        assert_eq!(a.price.rho, 0.8);
        // Untouched sibling keys survive the partial [price] table.
        assert_eq!(a.price.sigma_eps, 0.02);
    }

    #[test]
    fn nested_and_string_overrides() {
        let ov: Vec<Override> = ["price.elasticity_lambda=0.001", "reward.risk=none", "day_of_year=10"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let cfg = load_config(None, &ov).unwrap();
        assert_eq!(cfg.price.elasticity_lambda, 0.001);
        assert_eq!(cfg.reward.risk, RiskSpec::None);
        assert_eq!(cfg.day_of_year, Some(10));
    }

    #[test]
    fn unknown_and_malformed_overrides() {
        assert!(matches!(
            load_config(None, &[Override::new("price.nope", "1")]),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!("noequals".parse::<Override>(), Err(ConfigError::MalformedOverride(_))));
    }

    #[test]
    fn invariant_violations_name_field() {
        let cases = [
            ("retail_rate", "0"),
            ("credit_max", "-0.1"),
            ("feedback_gamma", "1.5"),
            ("n_buildings", "0"),
            ("steps_per_day", "12"),
            ("price.rho", "1.0"),
            ("price.spike_exit_prob", "0"),
            ("price.price_floor", "10.0"),
            ("customer.fatigue_floor", "1.0"),
            ("customer.reduction_cap", "0"),
        ];
        for (key, value) in cases {
            let err = load_config(None, &[Override::new(key, value)]).unwrap_err();
            match err {
                ConfigError::Invalid { field, .. } => assert_eq!(field, key),
                other => panic!("{key}: unexpected {other}"),
            }
        }
        let mut cfg = SimConfig::default();
        cfg.price.het_multipliers[3] = 0.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_file_key_is_rejected() {
        let f = write_tmp("bogus = 1\n");
        assert!(matches!(load_config(Some(f.path()), &[]), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn presets_match_documented_values() {
        let d = preset(Preset::Default);
        assert_eq!(d, SimConfig::default());
        assert_eq!(d.n_buildings, 50);
        let uri = preset(Preset::UriAnalog);
        assert_eq!(uri.price.spike_entry_base, 0.08);
        assert_eq!(uri.price.temp_spike_boost, 0.15);
        assert_eq!(uri.episode_days, 7);
        let p5 = preset(Preset::Portfolio500);
        assert_eq!(p5.n_buildings, 500);
        assert_eq!(p5.stress.demand_threshold, 10_000.0);
        assert_eq!(p5.demand_source, DemandSource::Synthetic);
        for p in Preset::ALL {
            preset(p).validate().unwrap();
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!("nope".parse::<Preset>(), Err(ConfigError::UnknownPreset(_))));
    }

    #[test]
    fn csv_replay_source_parses() {
        let cfg = from_toml_str(
            "[demand_source]\nkind = \"csv_replay\"\nprofile_path = \"p.csv\"\nweather_path = \"w.csv\"\n",
        )
        .unwrap();
        assert_eq!(
            cfg.demand_source,
            DemandSource::CsvReplay {
                profile_path: "p.csv".into(),
                weather_path: "w.csv".into()
            }
        );
        assert_eq!(from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn toml_round_trip(
                n in 1usize..2000,
                days in 1u32..30,
                rho in 0.01f64..0.99,
                lambda in 0.0f64..0.01,
                seed in 0..=i64::MAX as u64,
                doy in proptest::option::of(0u32..365),
                none_risk in any::<bool>(),
            ) {
                let mut cfg = SimConfig::default();
                cfg.n_buildings = n;
                cfg.episode_days = days;
                cfg.price.rho = rho;
                cfg.price.elasticity_lambda = lambda;
                cfg.seed = seed;
                cfg.day_of_year = doy;
                if none_risk { cfg.reward.risk = RiskSpec::None; }
                let back = from_toml_str(&cfg.to_toml_string()).unwrap();
                prop_assert_eq!(back, cfg);
            }
        }
    }
}
