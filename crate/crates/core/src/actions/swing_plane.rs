use crate::deviation::swing_plane_tilt;
use crate::filters::{smooth_deadband_ellip, Ellipsoid, FilterError, MeanFilter, SoftEllipse};
use crate::rotation::TiltPhase2D;

use super::config::SwingPlaneConfig;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SwingPlaneOutput {
    /// Unfiltered tilt of the swing ground plane relative to the nominal plane.
    pub raw: TiltPhase2D,
    pub tilt: TiltPhase2D,
}

#[derive(Debug, Clone)]
pub struct SwingPlane {
    mean: MeanFilter<2>,
    deadband: Ellipsoid<2>,
    gain: f64,
    limit: SoftEllipse<2>,
}

impl SwingPlane {
    pub fn new(cfg: &SwingPlaneConfig) -> Result<Self, FilterError> {
        Ok(Self {
            mean: MeanFilter::new(cfg.mean_order)?,
            deadband: Ellipsoid::new(cfg.deadband)?,
            gain: cfg.gain,
            limit: SoftEllipse::new(cfg.limit, cfg.buffer)?,
        })
    }

    pub fn reset(&mut self) {
        self.mean.reset();
    }

    pub fn step(&mut self, p_b: TiltPhase2D, p_e: TiltPhase2D, py_n: f64) -> SwingPlaneOutput {
        let raw = swing_plane_tilt(p_b, p_e, py_n);
        let mean = self.mean.step(raw.to_array());
        let d = smooth_deadband_ellip(&mean, &self.deadband).map(|v| v * self.gain);
        SwingPlaneOutput {
            raw,
            tilt: TiltPhase2D::from_array(self.limit.coerce(&d)),
        }
    }
}
