//! The experiment harness: scenario configuration, deterministic execution,
//! CSV/JSON emission, and the claims checker.

pub mod claims;
pub mod config;
pub mod report;
pub mod scenario;

pub use claims::{run_claims, ClaimResult, ClaimsOptions, Comparison};
pub use config::{ConfigError, Scenario, ScenarioConfig};
pub use scenario::{run_scenario, ScenarioOutcome};
