//! Config-driven verification campaigns: parse a TOML campaign, draw seeded
//! points on the configured spaces, run the requested checks in parallel and
//! assemble a deterministic JSON report.

pub mod campaign;
pub mod config;
pub mod dims;
pub mod numbers;
pub mod report;

pub use campaign::{run, RunOptions};
pub use config::{Campaign, CheckKind, ConfigError, SpaceSpec};
pub use report::Report;

/// Exit code for unreadable or invalid campaigns (and bad arguments).
pub const EXIT_CONFIG: i32 = 3;
