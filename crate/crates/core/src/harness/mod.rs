//! Simulation harness: seeded scenarios, replicated fits, and checks of the
//! finite-sample bounds with their explicit constants.
//!
//! Randomness is counter-based. The design comes from a ChaCha8 stream keyed
//! by the scenario seed, and replication `r` draws its noise from stream `r`
//! of a second key, so results do not depend on thread count or scheduling.

pub mod bounds;
pub mod context;
pub mod dashboard;
pub mod scenario;
pub mod simulate;
pub mod suite;

pub use bounds::{verify_bounds, BoundFamily, BoundRecord, BoundReport, Status, VerifyReport};
pub use context::ScenarioContext;
pub use dashboard::{dashboard, Dashboard, Sweep};
pub use scenario::{generate, BetaSpec, Family, Scenario, ScenarioConfig, TuningSpec};
pub use simulate::{simulate, simulation_report, write_metrics_csv, ReplicationOutcome, SimulationReport};
pub use suite::{default_suite, noiseless_suite, noisy_suite, overselect_suite, run_suite, SuiteReport};
