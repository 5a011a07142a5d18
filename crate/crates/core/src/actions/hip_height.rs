use crate::filters::{coerced_interp, SlopeLimitedLowPass, SlopeLimiter};
use crate::rotation::TiltPhase2D;

use super::config::HipHeightConfig;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HipHeightOutput {
    pub h_max: f64,
    pub instability: f64,
    pub speed: f64,
}

/// Lowers the maximum hip height when the deviation tilt moves fast.
#[derive(Debug, Clone)]
pub struct HipHeight {
    cfg: HipHeightConfig,
    prev: Option<TiltPhase2D>,
    instability: SlopeLimitedLowPass,
    limiter: SlopeLimiter,
}

impl HipHeight {
    pub fn new(cfg: &HipHeightConfig) -> Self {
        Self {
            cfg: *cfg,
            prev: None,
            instability: SlopeLimitedLowPass::new(cfg.settling_time, cfg.instability_rate, 0.0),
            limiter: SlopeLimiter::new(cfg.rate, cfg.h_hi),
        }
    }

    pub fn reset(&mut self) {
        self.prev = None;
        self.instability.reset(0.0);
        self.limiter.reset(self.cfg.h_hi);
    }

    pub fn step(&mut self, pd_mean: TiltPhase2D, dt: f64) -> HipHeightOutput {
        let speed = match self.prev {
            None => 0.0,
            Some(prev) => {
                let d = pd_mean - prev;
                let d = if self.cfg.sagittal_only { d.py.abs() } else { d.norm() };
                d / dt
            }
        };
        self.prev = Some(pd_mean);
        let instability = self.instability.step(speed, dt);
        let c = &self.cfg;
        let raw = coerced_interp(instability, c.instability_lo, c.instability_hi, c.h_hi, c.h_lo);
        HipHeightOutput {
            h_max: self.limiter.step(raw, dt),
            instability,
            speed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::config::ControllerConfig;

    #[test]
    fn constant_deviation_keeps_full_height() {
        let cfg = ControllerConfig::default().hip_height;
        let mut h = HipHeight::new(&cfg);
        for _ in 0..200 {
            let o = h.step(TiltPhase2D::new(0.2, 0.1), 0.01);
            assert_eq!(o.speed, 0.0);
            assert_eq!(o.h_max, cfg.h_hi);
        }
    }

    #[test]
    fn oscillation_lowers_height_at_limited_rate() {
        let cfg = ControllerConfig::default().hip_height;
        let mut h = HipHeight::new(&cfg);
        let mut last = cfg.h_hi;
        let mut out = HipHeightOutput::default();
        for k in 0..1000 {
            let t = k as f64 * 0.01;
            out = h.step(TiltPhase2D::new(0.2 * (8.0 * t).sin(), 0.0), 0.01);
            assert!((out.h_max - last).abs() <= cfg.rate * 0.01 + 1e-15);
            last = out.h_max;
        }
        assert!(out.instability > cfg.instability_hi);
        assert_eq!(out.h_max, cfg.h_lo);
    }
}
