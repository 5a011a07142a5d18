use crate::filters::{soft_coerce_1d, FilterError, SlopeLimiter, WeightProfile, WlbfFilter};
use crate::rotation::TiltPhase2D;

use super::config::LeaningConfig;

/// Commanded gait velocity in dimensionless gait command units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaitCommand {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

/// Sagittal lean from the commanded velocity, turning rate and acceleration.
#[derive(Debug, Clone)]
pub struct Leaning {
    cfg: LeaningConfig,
    velocity: WlbfFilter<1>,
    accel: SlopeLimiter,
}

impl Leaning {
    pub fn new(cfg: &LeaningConfig, profile: WeightProfile) -> Result<Self, FilterError> {
        Ok(Self {
            cfg: *cfg,
            velocity: WlbfFilter::new(cfg.wlbf_capacity, profile)?,
            accel: SlopeLimiter::new(cfg.accel_rate, 0.0),
        })
    }

    /// The rate limited sagittal acceleration estimate.
    pub fn acceleration(&self) -> f64 {
        self.accel.value()
    }

    pub fn reset(&mut self) {
        self.velocity.reset();
        self.accel.reset(0.0);
    }

    pub fn step(&mut self, t: f64, cmd: &GaitCommand, dt: f64) -> Result<TiltPhase2D, FilterError> {
        let fit = self.velocity.step(t, [cmd.vx])?;
        let a = self.accel.step(fit.slope[0], dt);
        let raw = self.cfg.velocity_gain * cmd.vx + self.cfg.turn_gain * cmd.vz.abs() + self.cfg.accel_gain * a;
        Ok(TiltPhase2D::new(0.0, soft_coerce_1d(raw, self.cfg.limit, self.cfg.buffer)))
    }
}
