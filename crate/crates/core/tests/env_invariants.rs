use std::collections::HashMap;
use std::sync::Arc;

use drsim::config::{preset, Preset, SimConfig};
use drsim::env::{idx, observation_bounds, Environment, OBS_DIM};
use proptest::prelude::*;

fn config(n_buildings: usize, days: u32) -> Arc<SimConfig> {
    Arc::new(SimConfig {
        n_buildings,
        episode_days: days,
        ..SimConfig::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn episode_invariants(
        n in 1usize..60,
        days in 1u32..3,
        seed in any::<u32>(),
        actions in prop::collection::vec(-0.05f64..0.2, 72),
    ) {
        let cfg = config(n, days);
        let (lo, hi) = observation_bounds(&cfg);
        let mut env = Environment::new(cfg.clone()).unwrap();
        let (obs, _) = env.reset(u64::from(seed)).unwrap();
        prop_assert_eq!(obs.0.len(), OBS_DIM);
        let mut prev_bills = env.bills().to_vec();
        let mut spent: HashMap<u32, (f64, f64)> = HashMap::new();
        // The pre-action preview at reset is not a settled hour, so it is
        // not carried into the history once real hours arrive.
        let mut history = vec![0.0; 5];
        let mut t = 0;
        while !env.is_done() {
            let out = env.step(actions[t % actions.len()]).unwrap();
            let rec = &out.record;
            prop_assert!((0.0..=cfg.credit_max).contains(&rec.credit_effective));
            prop_assert!(rec.credit_effective <= actions[t % actions.len()].max(0.0));
            prop_assert!((rec.revenue - (cfg.retail_rate - rec.credit_effective - rec.price) * rec.aggregate_demand).abs() < 1e-9);
            prop_assert!((rec.consumer_cost - (cfg.retail_rate - rec.credit_effective) * rec.aggregate_demand).abs() < 1e-9);
            let e = spent.entry(rec.day).or_insert((0.0, rec.daily_budget));
            e.0 += rec.payout;
            prop_assert!(e.0 <= e.1 * (1.0 + 1e-12));
            for (new, old) in env.bills().iter().zip(&prev_bills) {
                prop_assert!(new >= old);
            }
            prev_bills = env.bills().to_vec();
            for i in 0..OBS_DIM {
                prop_assert!(out.obs[i] >= lo[i] && out.obs[i] <= hi[i], "obs[{}] = {}", i, out.obs[i]);
            }
            history.remove(0);
            history.push(rec.aggregate_demand);
            prop_assert_eq!(&out.obs.0[idx::DEMAND_HISTORY..idx::DEMAND_HISTORY + 5], &history[..]);
            prop_assert_eq!(out.obs[idx::AGGREGATE_DEMAND], rec.aggregate_demand);
            prop_assert_eq!(out.obs[idx::LAST_CREDIT], rec.credit_effective);
            t += 1;
        }
        prop_assert_eq!(t as u32, days * 24);
    }

    #[test]
    fn higher_credit_never_loses_acceptors(seed in any::<u32>(), lo in 0.001f64..0.05, step in 0.0f64..0.05) {
        // First hour, fresh fatigue: the same uniforms are compared against a
        // higher acceptance probability.
        let cfg = Arc::new(SimConfig { budget: drsim::config::BudgetParams { mu: 1e6, sigma: 0.0, ..Default::default() }, ..SimConfig::default() });
        let mut a = Environment::new(cfg.clone()).unwrap();
        let mut b = Environment::new(cfg).unwrap();
        a.reset(u64::from(seed)).unwrap();
        b.reset(u64::from(seed)).unwrap();
        let ra = a.step(lo).unwrap().record;
        let rb = b.step(lo + step).unwrap().record;
        prop_assert!(rb.n_accepted >= ra.n_accepted);
        prop_assert_eq!(ra.price, rb.price);
    }
}

#[test]
fn market_ignores_portfolio_size() {
    let prices = |n| {
        let mut env = Environment::new(config(n, 3)).unwrap();
        env.reset(99).unwrap();
        let mut p = Vec::new();
        while !env.is_done() {
            let rec = env.step(0.0).unwrap().record;
            p.push((rec.price, rec.temperature, rec.daily_budget));
        }
        p
    };
    assert_eq!(prices(3), prices(120));
}

#[test]
fn first_buildings_unchanged_by_portfolio_size() {
    let loads = |n| {
        let mut env = Environment::new(config(n, 1)).unwrap();
        env.reset(4).unwrap();
        let out = env.step(0.0).unwrap();
        out.obs.0[idx::BUILDING_LOADS..idx::BUILDING_LOADS + 10].to_vec()
    };
    assert_eq!(loads(10), loads(200));
}

#[test]
fn demand_matches_population_scale() {
    let mut env = Environment::new(Arc::new(preset(Preset::Portfolio500))).unwrap();
    env.reset(1).unwrap();
    let mut total = 0.0;
    while !env.is_done() {
        total += env.step(0.0).unwrap().record.aggregate_demand;
    }
    let mean_per_building = total / 24.0 / 500.0;
    assert!((1.5..=2.6).contains(&mean_per_building), "{mean_per_building}");
}

#[test]
fn spike_hours_raise_price_stress() {
    let cfg = Arc::new(SimConfig {
        episode_days: 30,
        ..preset(Preset::UriAnalog)
    });
    let mut env = Environment::new(cfg).unwrap();
    env.reset(3).unwrap();
    let mut spikes = 0;
    while !env.is_done() {
        let rec = env.step(0.0).unwrap().record;
        if rec.price > 1.0 {
            spikes += 1;
            assert!(rec.stress.price > 0.99);
        }
    }
    assert!(spikes > 24, "{spikes}");
}

#[test]
fn fixed_day_of_year_sets_day_of_week() {
    let cfg = Arc::new(SimConfig {
        day_of_year: Some(10),
        episode_days: 2,
        ..SimConfig::default()
    });
    let mut env = Environment::new(cfg).unwrap();
    let (obs, info) = env.reset(0).unwrap();
    assert_eq!(info.day_of_year, 10);
    assert_eq!(obs[idx::DAY_OF_WEEK], 3.0);
    let mut last = obs;
    while !env.is_done() {
        last = env.step(0.0).unwrap().obs;
    }
    assert_eq!(last[idx::DAY_OF_WEEK], 4.0);
}
