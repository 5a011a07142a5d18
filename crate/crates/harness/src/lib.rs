//! Scenario runner, IMU replay, push battery, waveform fitting and self-test for
//! the tilt phase controller.

pub mod commands;
pub mod config;
pub mod error;
pub mod imu_log;
pub mod scenario;
pub mod trace;

pub use config::Settings;
pub use error::HarnessError;
pub use scenario::Scenario;
pub use trace::TraceRecord;
