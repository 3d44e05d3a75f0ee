//! A seedable simulator of an electric utility issuing demand-response
//! credits.
//!
//! Each hour the utility observes prices, demand, grid stress and its
//! remaining credit budget, then offers a per-kWh credit to a heterogeneous
//! building portfolio. Customers accept or decline, curtail, tire of
//! repeated events, and partially carry curtailment forward. The reward
//! trades utility revenue against consumer cost, grid stress and the tail
//! risk of consumer bills.
//!
//! ```
//! use std::sync::Arc;
//! use drsim::{Environment, SimConfig};
//!
//! let mut env = Environment::new(Arc::new(SimConfig::default())).unwrap();
//! let (obs, _info) = env.reset(7).unwrap();
//! assert_eq!(obs.as_slice().len(), 32);
//! let mut total = 0.0;
//! while !env.is_done() {
//!     total += env.step(0.05).unwrap().reward;
//! }
//! assert!(total.is_finite());
//! ```
//!
//! All randomness derives from one `u64` seed; see [`rng`].

pub mod budget;
pub mod config;
pub mod customer;
pub mod demand;
pub mod env;
pub mod harness;
pub mod market;
pub mod policy;
pub mod risk;
pub mod rng;
pub mod stress;

pub use config::{load_config, preset, Override, Preset, SimConfig};
pub use env::{Environment, Observation, StepOutcome, StepRecord};
pub use policy::Policy;
pub use risk::{RiskMeasure, RiskRegistry, RiskSpec};
