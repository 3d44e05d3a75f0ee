//! Guide listings, compiled and run as doc tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/quick-start.md")]
pub mod quick_start {}
#[doc = include_str!("../../../book/src/configuration.md")]
pub mod configuration {}
#[doc = include_str!("../../../book/src/market.md")]
pub mod market {}
#[doc = include_str!("../../../book/src/demand.md")]
pub mod demand {}
#[doc = include_str!("../../../book/src/customers.md")]
pub mod customers {}
#[doc = include_str!("../../../book/src/budget-and-risk.md")]
pub mod budget_and_risk {}
#[doc = include_str!("../../../book/src/environment.md")]
pub mod environment {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/reproducibility.md")]
pub mod reproducibility {}
