//! Daily credit budget: seasonal draw, rollover and the hard spend cap.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::BudgetParams;

/// Demand floor (kWh) used when sizing the credit cap.
pub const CAP_EPSILON_KWH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BudgetError {
    #[error("payout {payout} exceeds remaining budget {remaining}")]
    Overdraw { payout: f64, remaining: f64 },
    #[error("payout must be finite and non-negative, got {0}")]
    BadPayout(f64),
}

/// Seasonal budget factor `base + amp * cos^2(2π doy / 365.25)`.
///
/// Two peaks a year (midwinter and midsummer) and unit mean with the
/// default constants.
pub fn seasonal_factor(day_of_year: u32, p: &BudgetParams) -> f64 {
    let c = (2.0 * PI * f64::from(day_of_year) / 365.25).cos();
    p.seasonal_base + p.seasonal_amp * c * c
}

/// Budget for a day given an already drawn `N(mu, sigma^2)` sample.
pub fn daily_budget_from_draw(day_of_year: u32, unspent_prev: f64, draw: f64, p: &BudgetParams) -> f64 {
    (seasonal_factor(day_of_year, p) * draw).max(0.0) + p.rollover * unspent_prev
}

/// Draw the day's budget: one standard normal from `rng`.
pub fn draw_daily_budget<R: Rng + ?Sized>(day_of_year: u32, unspent_prev: f64, rng: &mut R, p: &BudgetParams) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    daily_budget_from_draw(day_of_year, unspent_prev, p.mu + p.sigma * z, p)
}

/// Pre-cap a credit so that paying it on `reference_demand` kWh would not
/// exceed the remaining budget.
pub fn cap_credit(credit: f64, remaining: f64, reference_demand: f64) -> f64 {
    credit.min(remaining / reference_demand.max(CAP_EPSILON_KWH)).max(0.0)
}

/// Settle a credit against the kWh it is paid on.
///
/// Returns `(credit_effective, payout)`. When the full payout would exceed
/// `remaining`, the credit is rescaled so the payout equals `remaining`
/// exactly.
pub fn settle_payout(credit: f64, paid_kwh: f64, remaining: f64) -> (f64, f64) {
    let payout = credit * paid_kwh;
    if payout > remaining {
        (remaining / paid_kwh, remaining)
    } else {
        (credit, payout)
    }
}

/// Spend state for the current day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub today_budget: f64,
    pub remaining: f64,
    /// Unspent budget carried out of the previous day (before rollover decay).
    pub unspent_carry: f64,
    pub day_of_year: u32,
}

impl BudgetLedger {
    pub fn new(day_of_year: u32, today_budget: f64, unspent_carry: f64) -> Self {
        Self {
            today_budget,
            remaining: today_budget,
            unspent_carry,
            day_of_year,
        }
    }

    pub fn spent(&self) -> f64 {
        self.today_budget - self.remaining
    }

    /// Deduct a payout. The caller must have rescaled it to fit.
    pub fn charge(&mut self, payout: f64) -> Result<(), BudgetError> {
        if !(payout.is_finite() && payout >= 0.0) {
            return Err(BudgetError::BadPayout(payout));
        }
        if payout > self.remaining {
            return Err(BudgetError::Overdraw {
                payout,
                remaining: self.remaining,
            });
        }
        self.remaining = (self.remaining - payout).max(0.0);
        Ok(())
    }

    /// Close the day and open the next one with a freshly drawn budget.
    pub fn roll_over<R: Rng + ?Sized>(&mut self, next_day_of_year: u32, rng: &mut R, p: &BudgetParams) {
        let unspent = self.remaining;
        let budget = draw_daily_budget(next_day_of_year, unspent, rng, p);
        *self = Self::new(next_day_of_year, budget, unspent);
    }
}
