use crate::filters::{smooth_deadband_ellip, Ellipsoid, FilterError, SoftEllipse};
use crate::rotation::TiltPhase2D;

use super::config::{PdActionConfig, PdConfig};

/// Gain for input direction `angle`, interpolated elliptically between the
/// lateral (x) and sagittal (y) gains.
pub fn direction_gain(angle: f64, g_lat: f64, g_sag: f64) -> f64 {
    let (s, c) = angle.sin_cos();
    let den = (g_sag * c).hypot(g_lat * s);
    if den == 0.0 {
        // only reachable with a zero gain along an exact principal direction
        return if c.abs() >= s.abs() { g_lat } else { g_sag };
    }
    g_lat * g_sag / den
}

/// Deadbands `x` elliptically and scales it by the direction-dependent gain.
pub fn gained_term(x: TiltPhase2D, deadband: &Ellipsoid<2>, g_lat: f64, g_sag: f64) -> TiltPhase2D {
    let d = TiltPhase2D::from_array(smooth_deadband_ellip(&x.to_array(), deadband));
    if d.px == 0.0 && d.py == 0.0 {
        return TiltPhase2D::ZERO;
    }
    d * direction_gain(d.angle(), g_lat, g_sag)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PdTerms {
    pub p: TiltPhase2D,
    pub d: TiltPhase2D,
    pub output: TiltPhase2D,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PdOutput {
    pub arm: PdTerms,
    pub foot: PdTerms,
}

#[derive(Debug, Clone)]
pub struct PdFeedback {
    p_deadband: Ellipsoid<2>,
    d_deadband: Ellipsoid<2>,
    arm: PdActionConfig,
    foot: PdActionConfig,
    arm_limit: SoftEllipse<2>,
    foot_limit: SoftEllipse<2>,
}

impl PdFeedback {
    pub fn new(cfg: &PdConfig) -> Result<Self, FilterError> {
        Ok(Self {
            p_deadband: Ellipsoid::new(cfg.p_deadband)?,
            d_deadband: Ellipsoid::new(cfg.d_deadband)?,
            arm: cfg.arm,
            foot: cfg.foot,
            arm_limit: SoftEllipse::new(cfg.arm.limit, cfg.arm.buffer)?,
            foot_limit: SoftEllipse::new(cfg.foot.limit, cfg.foot.buffer)?,
        })
    }

    fn action(&self, a: &PdActionConfig, limit: &SoftEllipse<2>, mean: TiltPhase2D, slope: TiltPhase2D) -> PdTerms {
        let p = gained_term(mean, &self.p_deadband, a.p_gain_lat, a.p_gain_sag);
        let d = gained_term(slope, &self.d_deadband, a.d_gain_lat, a.d_gain_sag);
        let output = TiltPhase2D::from_array(limit.coerce(&(p + d).to_array()));
        PdTerms { p, d, output }
    }

    /// Arm and support foot tilts from the filtered deviation tilt and its slope.
    pub fn compute(&self, mean: TiltPhase2D, slope: TiltPhase2D) -> PdOutput {
        PdOutput {
            arm: self.action(&self.arm, &self.arm_limit, mean, slope),
            foot: self.action(&self.foot, &self.foot_limit, mean, slope),
        }
    }
}
