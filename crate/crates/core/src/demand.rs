//! Per-building baseline demand and outdoor temperature.
//!
//! Two sources are supported:
//!
//! * **CSV replay.** Long-format profiles (`building_id,timestep,non_shiftable_load_kwh`)
//!   and a weather series (`timestep,outdoor_temp_c`) are replayed with
//!   modulo wrap. When the simulation has more buildings than the file,
//!   source profiles are reused cyclically with a `U[0.9, 1.1]` scale jitter.
//! * **Synthetic.** A bimodal daily shape (morning and evening bumps) plus
//!   heating/cooling ramps driven by temperature, with mean-one lognormal
//!   noise.
//!
//! This module also holds the demand-persistence multiplier update, which
//! carries part of a curtailment into following hours.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::config::SyntheticDemandParams;

/// Physical bounds accepted for outdoor temperature, °C.
pub const TEMP_RANGE: (f64, f64) = (-40.0, 55.0);

/// Scale jitter applied to reused replay profiles.
pub const REUSE_JITTER: (f64, f64) = (0.9, 1.1);

#[derive(Debug, thiserror::Error)]
pub enum DemandError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("{path}: row {row}: negative load {value}")]
    NegativeLoad { path: PathBuf, row: usize, value: f64 },
    #[error("{path}: row {row}: temperature {value} outside [-40, 55]")]
    BadTemperature { path: PathBuf, row: usize, value: f64 },
    #[error("{path}: {what}: expected timestep {expected}, found {found}")]
    TimestepGap {
        path: PathBuf,
        what: String,
        expected: u64,
        found: u64,
    },
    #[error("{path}: no data rows")]
    Empty { path: PathBuf },
    #[error("persistence update outside its domain: {0}")]
    Domain(String),
}

/// One building's replayed load series.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceProfile {
    pub building_id: String,
    pub series: Arc<[f64]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    pub outdoor_temp: Arc<[f64]>,
}

impl WeatherSeries {
    pub fn at(&self, step: i64) -> f64 {
        self.outdoor_temp[step.rem_euclid(self.outdoor_temp.len() as i64) as usize]
    }
}

/// How a building's baseline is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    Replay { series: Arc<[f64]>, jitter: f64 },
    Synthetic { scale: f64, hvac: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildingProfile {
    pub building_id: String,
    pub archetype_index: usize,
    pub baseline: Baseline,
    /// Demand-persistence multiplier in (0, 1].
    pub persistence: f64,
}

/// Unit-height Gaussian bump.
fn bump(hour: f64, center: f64, width: f64) -> f64 {
    let z = (hour - center) / width;
    (-0.5 * z * z).exp()
}

/// Deterministic part of the synthetic load for a building with the given
/// scale and HVAC coefficient.
pub fn synthetic_shape(scale: f64, hvac: f64, hour: u32, temp_c: f64) -> f64 {
    let h = f64::from(hour);
    let daily = 0.4 + 0.8 * bump(h, 7.5, 1.5) + 1.0 * bump(h, 19.0, 2.0);
    let cooling = ((temp_c - 22.0) / 10.0).max(0.0);
    let heating = ((10.0 - temp_c) / 10.0).max(0.0);
    scale * daily + hvac * cooling + hvac * heating
}

/// Inputs that vary per step for [`baseline_demand`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandContext {
    /// Replay index (already offset by the episode start).
    pub step: i64,
    pub hour: u32,
    pub temp_c: f64,
    /// Standard normal for the synthetic noise; 0 disables it.
    pub noise_z: f64,
}

/// Raw baseline demand (kWh) of a building for one step.
pub fn baseline_demand(profile: &BuildingProfile, ctx: &DemandContext, synth: &SyntheticDemandParams) -> f64 {
    match &profile.baseline {
        Baseline::Replay { series, jitter } => series[ctx.step.rem_euclid(series.len() as i64) as usize] * jitter,
        Baseline::Synthetic { scale, hvac } => {
            let s = synth.noise_sigma;
            let noise = (s * ctx.noise_z - 0.5 * s * s).exp();
            synthetic_shape(*scale, *hvac, ctx.hour, ctx.temp_c) * noise
        }
    }
}

/// Synthetic baseline from two uniforms on [0, 1): one for the load scale
/// and one for the HVAC coefficient.
pub fn synthetic_baseline(u_scale: f64, u_hvac: f64, p: &SyntheticDemandParams) -> Baseline {
    Baseline::Synthetic {
        scale: p.base_scale * (p.scale_lo + (p.scale_hi - p.scale_lo) * u_scale),
        hvac: p.hvac_lo + (p.hvac_hi - p.hvac_lo) * u_hvac,
    }
}

/// Synthetic outdoor temperature: annual and diurnal cosines plus noise
/// (`noise` is already in °C), clamped to [`TEMP_RANGE`].
pub fn synthetic_temperature(day_of_year: u32, hour: u32, noise: f64) -> f64 {
    let annual = 12.0 * (2.0 * PI * (f64::from(day_of_year) - 200.0) / 365.0).cos();
    let diurnal = 5.0 * (2.0 * PI * (f64::from(hour) - 15.0) / 24.0).cos();
    (15.0 + annual + diurnal + noise).clamp(TEMP_RANGE.0, TEMP_RANGE.1)
}

/// `m * gamma + (1 - delta) * (1 - gamma)`.
pub fn update_feedback_multiplier(m: f64, delta: f64, gamma: f64) -> Result<f64, DemandError> {
    if !(m > 0.0 && m <= 1.0) {
        return Err(DemandError::Domain(format!("multiplier {m} not in (0, 1]")));
    }
    if !(0.0..=0.5).contains(&delta) {
        return Err(DemandError::Domain(format!("reduction fraction {delta} not in [0, 0.5]")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(DemandError::Domain(format!("decay {gamma} not in [0, 1]")));
    }
    Ok((m * gamma + (1.0 - delta) * (1.0 - gamma)).min(1.0))
}

/// Post-reduction demand: the persistence multiplier scales the baseline,
/// then the current hour's reduction (sized from the raw baseline) is
/// subtracted.
pub fn effective_demand(d_base: f64, multiplier: f64, reduction_kwh: f64) -> f64 {
    (d_base * multiplier - reduction_kwh).max(0.0)
}

#[derive(Debug, Deserialize)]
struct ProfileRow {
    building_id: String,
    timestep: u64,
    non_shiftable_load_kwh: f64,
}

#[derive(Debug, Deserialize)]
struct WeatherRow {
    timestep: u64,
    outdoor_temp_c: f64,
}

fn open_csv(path: &Path, required: &[&'static str]) -> Result<csv::Reader<std::fs::File>, DemandError> {
    let file = std::fs::File::open(path).map_err(|source| DemandError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| DemandError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    for column in required {
        if !headers.iter().any(|h| h == *column) {
            return Err(DemandError::MissingColumn {
                path: path.to_path_buf(),
                column,
            });
        }
    }
    Ok(reader)
}

/// Load replay profiles and weather from the two long-format CSV files.
///
/// Rows of a building may be interleaved with other buildings but each
/// building's timesteps must run 0, 1, 2, ... without gaps. Profiles are
/// returned in order of first appearance.
pub fn load_profiles_csv(profile_path: &Path, weather_path: &Path) -> Result<(Vec<SourceProfile>, WeatherSeries), DemandError> {
    let mut reader = open_csv(profile_path, &["building_id", "timestep", "non_shiftable_load_kwh"])?;
    let mut order: Vec<String> = Vec::new();
    let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (i, row) in reader.deserialize::<ProfileRow>().enumerate() {
        // Header is line 1.
        let line = i + 2;
        let row = row.map_err(|e| DemandError::Csv {
            path: profile_path.to_path_buf(),
            message: format!("row {line}: {e}"),
        })?;
        if !(row.non_shiftable_load_kwh >= 0.0 && row.non_shiftable_load_kwh.is_finite()) {
            return Err(DemandError::NegativeLoad {
                path: profile_path.to_path_buf(),
                row: line,
                value: row.non_shiftable_load_kwh,
            });
        }
        let entry = series.entry(row.building_id.clone()).or_insert_with(|| {
            order.push(row.building_id.clone());
            Vec::new()
        });
        if row.timestep != entry.len() as u64 {
            return Err(DemandError::TimestepGap {
                path: profile_path.to_path_buf(),
                what: format!("building {} (row {line})", row.building_id),
                expected: entry.len() as u64,
                found: row.timestep,
            });
        }
        entry.push(row.non_shiftable_load_kwh);
    }
    if order.is_empty() {
        return Err(DemandError::Empty {
            path: profile_path.to_path_buf(),
        });
    }
    let profiles = order
        .into_iter()
        .map(|id| {
            let s = series.remove(&id).unwrap_or_default();
            SourceProfile {
                building_id: id,
                series: s.into(),
            }
        })
        .collect();

    let mut reader = open_csv(weather_path, &["timestep", "outdoor_temp_c"])?;
    let mut temps = Vec::new();
    for (i, row) in reader.deserialize::<WeatherRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| DemandError::Csv {
            path: weather_path.to_path_buf(),
            message: format!("row {line}: {e}"),
        })?;
        if row.timestep != temps.len() as u64 {
            return Err(DemandError::TimestepGap {
                path: weather_path.to_path_buf(),
                what: format!("row {line}"),
                expected: temps.len() as u64,
                found: row.timestep,
            });
        }
        if !(row.outdoor_temp_c >= TEMP_RANGE.0 && row.outdoor_temp_c <= TEMP_RANGE.1) {
            return Err(DemandError::BadTemperature {
                path: weather_path.to_path_buf(),
                row: line,
                value: row.outdoor_temp_c,
            });
        }
        temps.push(row.outdoor_temp_c);
    }
    if temps.is_empty() {
        return Err(DemandError::Empty {
            path: weather_path.to_path_buf(),
        });
    }
    Ok((profiles, WeatherSeries { outdoor_temp: temps.into() }))
}

/// Map `n_buildings` simulated buildings onto the source profiles.
///
/// Building `i` replays source `i mod n_sources`. The first copy of each
/// source is exact; reuses take the jitter returned by `jitter(i)`.
pub fn assign_replay(
    sources: &[SourceProfile],
    n_buildings: usize,
    mut jitter: impl FnMut(usize) -> f64,
) -> Vec<(String, Baseline)> {
    (0..n_buildings)
        .map(|i| {
            let src = &sources[i % sources.len()];
            let copy = i / sources.len();
            let j = if copy == 0 { 1.0 } else { jitter(i) };
            let id = if copy == 0 {
                src.building_id.clone()
            } else {
                format!("{}#{copy}", src.building_id)
            };
            (
                id,
                Baseline::Replay {
                    series: src.series.clone(),
                    jitter: j,
                },
            )
        })
        .collect()
}
