//! Deterministic multi-tenant, multi-cloud workflow execution simulator.
//!
//! Workflows of service and user tasks are scheduled onto simulated cloud
//! services by a trust-aware planner. Executions may be attacked; monitors
//! detect the attacks, a cost model picks the cheapest adequate adaptation
//! action, and provider, service and tenant trust is updated. Batches of
//! instances report normalized time, price and mitigation metrics.
//!
//! | module | role |
//! |---|---|
//! | [`model`] | workflows, tasks, CIA requirements, random workflow generator |
//! | [`cloudenv`] | providers, services, execution and attack injection |
//! | [`scheduler`] | anonymization and weighted trust-aware service selection |
//! | [`detection`] | service monitor, tenant IDS, user monitor |
//! | [`adaptation`] | action catalog, mitigation score, adaptation cost, decisions |
//! | [`trust`] | trust scores, updates and tenant responses |
//! | [`engine`] | instance execution, event log, batches and normalization |
//! | [`experiment`] | experiment configs and the report files |
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod adaptation;
pub mod cloudenv;
pub mod detection;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod model;
pub mod rng;
pub mod scheduler;
pub mod trust;

pub use error::{Error, Result};
