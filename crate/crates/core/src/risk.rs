//! Tail-risk measures over consumer bill vectors.
//!
//! Bills are losses, so CVaR here is the mean of the *largest* values.
//! Measures implement [`RiskMeasure`]; the reward's risk term is selected by
//! a [`RiskSpec`] string (`"cvar:0.95"`, `"none"`) and resolved through a
//! [`RiskRegistry`], which accepts additional measures at runtime.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RiskError {
    #[error("risk measure needs at least one value")]
    Empty,
    #[error("alpha must be in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("unknown risk measure `{0}`")]
    Unknown(String),
    #[error("malformed risk spec `{0}`")]
    Malformed(String),
}

/// Maps a vector of losses to a scalar risk.
pub trait RiskMeasure: Send + Sync + fmt::Debug {
    fn evaluate(&self, values: &[f64]) -> Result<f64, RiskError>;
}

/// Number of values in the upper tail at level `alpha`: `ceil((1 - alpha) n)`,
/// at least one.
///
/// A relative slack absorbs the rounding in `1 - alpha` (for example
/// `(1 - 0.95) * 100` evaluates to `5.000000000000004`).
pub fn tail_count(n: usize, alpha: f64) -> usize {
    let raw = (1.0 - alpha) * n as f64;
    let k = (raw - raw * 1e-12).ceil() as usize;
    k.clamp(1, n.max(1))
}

/// Empirical upper-tail CVaR: mean of the `ceil((1 - alpha) n)` largest values.
///
/// Ties are ordered by index, so the result is independent of input order.
///
/// ```
/// use drsim::risk::cvar;
///
/// let bills: Vec<f64> = (1..=100).map(f64::from).collect();
/// assert_eq!(cvar(&bills, 0.95).unwrap(), 98.0);
/// ```
pub fn cvar(values: &[f64], alpha: f64) -> Result<f64, RiskError> {
    if values.is_empty() {
        return Err(RiskError::Empty);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RiskError::BadAlpha(alpha));
    }
    let k = tail_count(values.len(), alpha);
    let mut sorted = values.to_vec();
    // Stable sort keeps equal values in index order.
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted[..k].iter().sum::<f64>() / k as f64)
}

/// Result of one incremental risk update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskDelta {
    pub delta: f64,
    pub new_risk: f64,
}

/// `new = measure(bills)`, `delta = new - prev`. Summed over an episode the
/// deltas telescope to the measure of the final bills.
pub fn delta_risk(prev_risk: f64, bills: &[f64], measure: &dyn RiskMeasure) -> Result<RiskDelta, RiskError> {
    let new_risk = measure.evaluate(bills)?;
    Ok(RiskDelta {
        delta: new_risk - prev_risk,
        new_risk,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cvar {
    alpha: f64,
}

impl Cvar {
    pub fn new(alpha: f64) -> Result<Self, RiskError> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self { alpha })
        } else {
            Err(RiskError::BadAlpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl RiskMeasure for Cvar {
    fn evaluate(&self, values: &[f64]) -> Result<f64, RiskError> {
        cvar(values, self.alpha)
    }
}

/// Disabled risk term: always zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoRisk;

impl RiskMeasure for NoRisk {
    fn evaluate(&self, _values: &[f64]) -> Result<f64, RiskError> {
        Ok(0.0)
    }
}

/// Textual selection of a risk measure: `name` or `name:param`.
///
/// `Cvar` and `None` are built in; `Named` refers to a measure registered in
/// a [`RiskRegistry`].
#[derive(Debug, Clone, PartialEq)]
pub enum RiskSpec {
    Cvar { alpha: f64 },
    None,
    Named { name: String, param: Option<f64> },
}

impl RiskSpec {
    pub fn is_enabled(&self) -> bool {
        !matches!(self, RiskSpec::None)
    }

    pub fn validate(&self) -> Result<(), RiskError> {
        match self {
            RiskSpec::Cvar { alpha } => Cvar::new(*alpha).map(|_| ()),
            RiskSpec::None | RiskSpec::Named { .. } => Ok(()),
        }
    }
}

impl fmt::Display for RiskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiskSpec::Cvar { alpha } => write!(f, "cvar:{alpha}"),
            RiskSpec::None => f.write_str("none"),
            RiskSpec::Named { name, param: Some(p) } => write!(f, "{name}:{p}"),
            RiskSpec::Named { name, param: None } => f.write_str(name),
        }
    }
}

impl FromStr for RiskSpec {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => {
                let p: f64 = p.trim().parse().map_err(|_| RiskError::Malformed(s.to_string()))?;
                (n.trim(), Some(p))
            }
            None => (s, None),
        };
        match (name, param) {
            ("none", None) => Ok(RiskSpec::None),
            ("cvar", Some(alpha)) => {
                Cvar::new(alpha)?;
                Ok(RiskSpec::Cvar { alpha })
            }
            ("cvar", None) => Ok(RiskSpec::Cvar { alpha: 0.95 }),
            ("", _) | ("none", Some(_)) => Err(RiskError::Malformed(s.to_string())),
            (name, param) => Ok(RiskSpec::Named {
                name: name.to_string(),
                param,
            }),
        }
    }
}

impl Serialize for RiskSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RiskSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

type Factory = Arc<dyn Fn(Option<f64>) -> Result<Arc<dyn RiskMeasure>, RiskError> + Send + Sync>;

/// Name → constructor table for risk measures.
#[derive(Clone)]
pub struct RiskRegistry {
    factories: BTreeMap<String, Factory>,
}

impl fmt::Debug for RiskRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RiskRegistry")
            .field("measures", &self.factories.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Default for RiskRegistry {
    fn default() -> Self {
        let mut reg = Self {
            factories: BTreeMap::new(),
        };
        reg.register("cvar", |p| Ok(Arc::new(Cvar::new(p.unwrap_or(0.95))?)));
        reg.register("none", |_| Ok(Arc::new(NoRisk)));
        reg
    }
}

impl RiskRegistry {
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(Option<f64>) -> Result<Arc<dyn RiskMeasure>, RiskError> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Arc::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn resolve(&self, spec: &RiskSpec) -> Result<Arc<dyn RiskMeasure>, RiskError> {
        let (name, param) = match spec {
            RiskSpec::Cvar { alpha } => ("cvar", Some(*alpha)),
            RiskSpec::None => ("none", None),
            RiskSpec::Named { name, param } => (name.as_str(), *param),
        };
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| RiskError::Unknown(name.to_string()))?;
        factory(param)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force: try every subset size-k choice by repeatedly removing
    /// the current maximum.
    fn oracle_cvar(values: &[f64], k: usize) -> f64 {
        let mut rest = values.to_vec();
        let mut total = 0.0;
        for _ in 0..k {
            let (idx, _) = rest
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
            total += rest.remove(idx);
        }
        total / k as f64
    }

    #[test]
    fn one_to_hundred_at_95() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(oracle_cvar(&v, 5), 98.0);
        assert_eq!(cvar(&v, 0.95).unwrap(), 98.0);
    }

    #[test]
    fn constant_and_singleton() {
        assert_eq!(cvar(&[5.0; 17], 0.9).unwrap(), 5.0);
        for alpha in [0.01, 0.5, 0.95, 0.999] {
            assert_eq!(cvar(&[7.0], alpha).unwrap(), 7.0);
        }
    }

    #[test]
    fn tail_count_examples() {
        assert_eq!(tail_count(50, 0.95), 3);
        assert_eq!(tail_count(100, 0.95), 5);
        assert_eq!(tail_count(2500, 0.95), 125);
        assert_eq!(tail_count(1, 0.95), 1);
        assert_eq!(tail_count(10, 0.5), 5);
    }

    #[test]
    fn errors() {
        assert_eq!(cvar(&[], 0.95), Err(RiskError::Empty));
        assert_eq!(cvar(&[1.0], 1.0), Err(RiskError::BadAlpha(1.0)));
        assert_eq!(cvar(&[1.0], 0.0), Err(RiskError::BadAlpha(0.0)));
    }

    #[test]
    fn delta_examples() {
        let m = Cvar::new(0.95).unwrap();
        assert_eq!(
            delta_risk(0.0, &[0.0; 10], &m).unwrap(),
            RiskDelta { delta: 0.0, new_risk: 0.0 }
        );
        // measure(bills) = 12
        let d = delta_risk(10.0, &[12.0; 4], &m).unwrap();
        assert_eq!(d, RiskDelta { delta: 2.0, new_risk: 12.0 });
        assert_eq!(delta_risk(3.0, &[100.0], &NoRisk).unwrap().new_risk, 0.0);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("cvar:0.95".parse::<RiskSpec>().unwrap(), RiskSpec::Cvar { alpha: 0.95 });
        assert_eq!("none".parse::<RiskSpec>().unwrap(), RiskSpec::None);
        assert!("cvar:1.5".parse::<RiskSpec>().is_err());
        assert!("cvar:abc".parse::<RiskSpec>().is_err());
        let named: RiskSpec = "entropic:2".parse().unwrap();
        assert_eq!(named.to_string(), "entropic:2");
        assert_eq!(RiskSpec::Cvar { alpha: 0.9 }.to_string(), "cvar:0.9");
    }

    #[test]
    fn registry_plugs_in_new_measures() {
        #[derive(Debug)]
        struct WorstCase;
        impl RiskMeasure for WorstCase {
            fn evaluate(&self, v: &[f64]) -> Result<f64, RiskError> {
                v.iter().copied().reduce(f64::max).ok_or(RiskError::Empty)
            }
        }
        let mut reg = RiskRegistry::default();
        let spec: RiskSpec = "worst".parse().unwrap();
        assert!(matches!(reg.resolve(&spec), Err(RiskError::Unknown(_))));
        reg.register("worst", |_| Ok(Arc::new(WorstCase)));
        assert_eq!(reg.resolve(&spec).unwrap().evaluate(&[1.0, 4.0, 2.0]).unwrap(), 4.0);
        assert_eq!(
            reg.resolve(&RiskSpec::Cvar { alpha: 0.5 }).unwrap().evaluate(&[1.0, 2.0, 3.0, 4.0]).unwrap(),
            3.5
        );
        assert!(reg.names().any(|n| n == "none"));
    }

    fn bills() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1000.0, 1..200)
    }

    proptest! {
        #[test]
        fn matches_oracle(v in bills(), alpha in 0.01f64..0.99) {
            let k = tail_count(v.len(), alpha);
            let got = cvar(&v, alpha).unwrap();
            prop_assert!((got - oracle_cvar(&v, k)).abs() <= 1e-9 * (1.0 + got.abs()));
        }

        #[test]
        fn between_mean_and_max(v in bills(), alpha in 0.01f64..0.99) {
            let got = cvar(&v, alpha).unwrap();
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            prop_assert!(got <= max + 1e-9);
            prop_assert!(got >= mean - 1e-9);
        }

        #[test]
        fn homogeneous_and_translation_invariant(v in bills(), c in 0.0f64..10.0, shift in -50.0f64..50.0) {
            let base = cvar(&v, 0.95).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
            prop_assert!((cvar(&scaled, 0.95).unwrap() - c * base).abs() <= 1e-9 * (1.0 + (c * base).abs()));
            prop_assert!((cvar(&shifted, 0.95).unwrap() - (base + shift)).abs() <= 1e-9 * (1.0 + base.abs()));
        }

        #[test]
        fn deltas_telescope(steps in prop::collection::vec(prop::collection::vec(0.0f64..5.0, 20), 1..48)) {
            let m = Cvar::new(0.95).unwrap();
            let mut bills = vec![0.0; 20];
            let mut prev = 0.0;
            let mut total = 0.0;
            for inc in &steps {
                for (b, x) in bills.iter_mut().zip(inc) {
                    *b += x;
                }
                let d = delta_risk(prev, &bills, &m).unwrap();
                total += d.delta;
                prev = d.new_risk;
            }
            prop_assert!((total - cvar(&bills, 0.95).unwrap()).abs() <= 1e-9);
        }
    }
}
