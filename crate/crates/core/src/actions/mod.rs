//! The corrective action pipeline: from body tilt to the nine gait activations.

pub mod config;
pub mod controller;
pub mod hip_height;
pub mod integral;
pub mod leaning;
pub mod pd;
pub mod swing_out;
pub mod swing_plane;
pub mod timing;

pub use config::{ConfigError, ControllerConfig};
pub use controller::{ActivationSet, Controller, ControllerOutput, Diagnostics};
pub use leaning::GaitCommand;
pub use swing_out::{crossing_energy, pendulum_invariant, Foot};
