//! Grid stress indicators.

use serde::{Deserialize, Serialize};

use crate::config::StressParams;

/// Standard logistic function.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressReadout {
    pub demand: f64,
    pub price: f64,
    pub thermal: f64,
    pub overall: f64,
}

/// Demand and price stress are logistic in their distance from a threshold.
/// Thermal stress ramps linearly outside `[thermal_lo, thermal_hi]` and is
/// not capped. `overall` is the weighted sum of the three.
pub fn stress_indicators(demand_kwh: f64, price: f64, temp_c: f64, p: &StressParams) -> StressReadout {
    let demand = logistic(p.demand_slope * (demand_kwh - p.demand_threshold));
    let price = logistic(p.price_slope * (price - p.price_threshold));
    let thermal =
        ((temp_c - p.thermal_hi) / p.thermal_ramp).max(0.0) + ((p.thermal_lo - temp_c) / p.thermal_ramp).max(0.0);
    StressReadout {
        demand,
        price,
        thermal,
        overall: p.w_demand * demand + p.w_price * price + p.w_thermal * thermal,
    }
}
