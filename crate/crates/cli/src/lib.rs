//! Scenario runner for the `iondecay` models: config parsing, presets and
//! CSV/SVG output.

pub mod config;
pub mod error;
pub mod format;
pub mod presets;
pub mod scenario;
pub mod svg;

pub use config::{ConfigError, RawConfig};
pub use error::AppError;
pub use scenario::{Artifact, Outcome, Scenario};
