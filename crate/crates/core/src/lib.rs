//! Tilt-phase gait stabilisation: rotation algebra, filters, attitude estimation,
//! deviation modelling, corrective actions and a surrogate plant.

pub mod actions;
pub mod closed_loop;
pub mod deviation;
pub mod estimator;
pub mod filters;
pub mod plant;
pub mod rotation;
