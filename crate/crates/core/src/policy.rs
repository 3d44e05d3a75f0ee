//! Hand-designed baseline policies.
//!
//! Each policy maps an observation to a credit in $/kWh. Only the price
//! stress (`obs[10]`) and remaining budget (`obs[13]`) are read.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{idx, OBS_DIM};

/// Price-stress level above which the rules issue a credit.
pub const RULE_STRESS_THRESHOLD: f64 = 0.5;
/// Fraction of the opening budget below which the budget-aware rule stops.
pub const RULE_MIN_BUDGET_FRACTION: f64 = 0.1;
/// Credit issued by the rules at full budget.
pub const RULE_CREDIT: f64 = 0.10;
/// Level of `uniform` when none is given.
pub const DEFAULT_UNIFORM_CREDIT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("observation has {0} entries, expected {OBS_DIM}")]
    ObservationLength(usize),
    #[error("budget-aware rule needs a positive opening budget, got {0}")]
    OpeningBudget(f64),
    #[error("unknown policy `{0}` (expected nocredit, uniform[:c], rule, budget-rule or random)")]
    Unknown(String),
    #[error("bad uniform credit `{0}`")]
    BadLevel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    NoCredit,
    Uniform { credit: f64 },
    RuleBased,
    BudgetAwareRule,
    Random,
}

/// Episode-level inputs the observation does not carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyContext {
    /// Budget available at the start of the current day.
    pub opening_budget: f64,
    pub credit_max: f64,
}

impl Policy {
    /// Credit for observation `obs`. `rng` is only used by [`Policy::Random`].
    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], ctx: &PolicyContext, rng: &mut R) -> Result<f64, PolicyError> {
        if obs.len() != OBS_DIM {
            return Err(PolicyError::ObservationLength(obs.len()));
        }
        let stressed = obs[idx::PRICE_STRESS] > RULE_STRESS_THRESHOLD;
        let credit = match *self {
            Policy::NoCredit => 0.0,
            Policy::Uniform { credit } => credit,
            Policy::RuleBased => {
                if stressed {
                    RULE_CREDIT
                } else {
                    0.0
                }
            }
            Policy::BudgetAwareRule => {
                if ctx.opening_budget <= 0.0 {
                    return Err(PolicyError::OpeningBudget(ctx.opening_budget));
                }
                let beta = obs[idx::BUDGET_REMAINING] / ctx.opening_budget;
                if stressed && beta > RULE_MIN_BUDGET_FRACTION {
                    RULE_CREDIT * beta
                } else {
                    0.0
                }
            }
            Policy::Random => rng.random_range(0.0..=ctx.credit_max),
        };
        Ok(credit.clamp(0.0, ctx.credit_max))
    }

    pub fn uses_rng(&self) -> bool {
        matches!(self, Policy::Random)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::NoCredit => f.write_str("nocredit"),
            Policy::Uniform { credit } => write!(f, "uniform:{credit}"),
            Policy::RuleBased => f.write_str("rule"),
            Policy::BudgetAwareRule => f.write_str("budget-rule"),
            Policy::Random => f.write_str("random"),
        }
    }
}

impl FromStr for Policy {
    type Err = PolicyError;

    /// `nocredit | uniform[:c] | rule | budget-rule | random`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let policy = match (name.to_ascii_lowercase().as_str(), arg) {
            ("nocredit" | "no-credit" | "no_credit", None) => Policy::NoCredit,
            ("uniform", None) => Policy::Uniform {
                credit: DEFAULT_UNIFORM_CREDIT,
            },
            ("uniform", Some(a)) => {
                let credit: f64 = a.trim().parse().map_err(|_| PolicyError::BadLevel(a.into()))?;
                if !(credit.is_finite() && credit >= 0.0) {
                    return Err(PolicyError::BadLevel(a.into()));
                }
                Policy::Uniform { credit }
            }
            ("rule" | "rule-based" | "rule_based", None) => Policy::RuleBased,
            ("budget-rule" | "budget_rule" | "budget-aware", None) => Policy::BudgetAwareRule,
            ("random", None) => Policy::Random,
            _ => return Err(PolicyError::Unknown(s.into())),
        };
        Ok(policy)
    }
}
