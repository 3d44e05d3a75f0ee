//! Heterogeneous customer response: acceptance of a credit offer, sampled
//! curtailment, and activation fatigue.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::{AcceptanceForm, ArchetypeParams, CustomerParams};
use crate::stress::logistic;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CustomerError {
    #[error("credit {0} outside the offerable range")]
    Credit(f64),
    #[error("fatigue {0} outside [floor, 1]")]
    Fatigue(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CustomerState {
    pub archetype_index: usize,
    pub fatigue: f64,
}

impl CustomerState {
    pub fn fresh(archetype_index: usize) -> Self {
        Self {
            archetype_index,
            fatigue: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub accepted: bool,
    /// Fractional reduction of the raw baseline.
    pub delta: f64,
    pub reduction_kwh: f64,
}

impl Response {
    pub const NONE: Response = Response {
        accepted: false,
        delta: 0.0,
        reduction_kwh: 0.0,
    };
}

/// Probability that a customer of `archetype` with the given fatigue accepts
/// `credit` ($/kWh).
pub fn acceptance_probability(
    archetype: &ArchetypeParams,
    fatigue: f64,
    credit: f64,
    p: &CustomerParams,
) -> Result<f64, CustomerError> {
    if !(credit.is_finite() && credit >= 0.0) {
        return Err(CustomerError::Credit(credit));
    }
    if !(fatigue >= p.fatigue_floor - 1e-12 && fatigue <= 1.0 + 1e-12) {
        return Err(CustomerError::Fatigue(fatigue));
    }
    let kappa = archetype.sensitivity_kappa * p.sensitivity_scale;
    let x = kappa * (credit - p.credit_midpoint);
    let prob = match p.acceptance_form {
        AcceptanceForm::Calibrated => archetype.base_accept * fatigue * 2.0 * logistic(x),
        AcceptanceForm::Literal => archetype.base_accept * fatigue * logistic(-x),
    };
    Ok(prob.clamp(0.0, 1.0))
}

/// Sample a building's response to an offer, computed against its raw
/// baseline `d_base`.
///
/// A zero credit is no event and consumes no randomness. Otherwise one
/// uniform decides acceptance and, if accepted, one standard normal sizes
/// the reduction, in that order.
pub fn sample_response<R: Rng + ?Sized>(
    state: &CustomerState,
    credit: f64,
    d_base: f64,
    p: &CustomerParams,
    rng: &mut R,
) -> Result<Response, CustomerError> {
    if credit <= 0.0 {
        return Ok(Response::NONE);
    }
    let archetype = &p.archetypes[state.archetype_index];
    let prob = acceptance_probability(archetype, state.fatigue, credit, p)?;
    let u: f64 = rng.random();
    if u >= prob {
        return Ok(Response::NONE);
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(accepted_response(archetype, z, d_base, p))
}

/// Response of an accepting customer given the standard normal `z` that
/// sizes its reduction.
pub fn accepted_response(archetype: &ArchetypeParams, z: f64, d_base: f64, p: &CustomerParams) -> Response {
    let mean = archetype.reduction_mean;
    let delta = (mean + p.reduction_std_ratio * mean * z).clamp(0.0, p.reduction_cap);
    Response {
        accepted: true,
        delta,
        reduction_kwh: delta * d_base,
    }
}

/// Subtractive decay on activation, additive recovery otherwise, clamped to
/// `[fatigue_floor, 1]`.
pub fn update_fatigue(fatigue: f64, accepted: bool, p: &CustomerParams) -> f64 {
    if accepted {
        (fatigue - p.fatigue_decay).max(p.fatigue_floor)
    } else {
        (fatigue + p.fatigue_recovery).min(1.0)
    }
}

/// Pick an archetype index from a uniform draw by cumulative proportion.
pub fn archetype_for(u: f64, archetypes: &[ArchetypeParams]) -> usize {
    let mut acc = 0.0;
    for (i, a) in archetypes.iter().enumerate() {
        acc += a.proportion;
        if u < acc {
            return i;
        }
    }
    archetypes.len() - 1
}
