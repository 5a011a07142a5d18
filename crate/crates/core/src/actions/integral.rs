use crate::filters::{coerce_ellip, BoundedIntegrator, Ellipsoid, FilterError, MeanFilter, SoftEllipse};
use crate::rotation::TiltPhase2D;

use super::config::IConfig;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IOutput {
    pub foot_tilt: TiltPhase2D,
    pub hip_shift: [f64; 2],
    /// Raw integrator value before the ripple filter.
    pub integral: [f64; 2],
    /// Ripple-filtered integral.
    pub filtered: [f64; 2],
}

/// Integral feedback onto the continuous foot tilt and hip shift.
#[derive(Debug, Clone)]
pub struct IFeedback {
    clamp: Ellipsoid<2>,
    gain: f64,
    integrator: BoundedIntegrator,
    ripple: MeanFilter<2>,
    foot_tilt_gain: f64,
    hip_shift_gain: f64,
}

impl IFeedback {
    pub fn new(cfg: &IConfig, mean_order: usize) -> Result<Self, FilterError> {
        Ok(Self {
            clamp: Ellipsoid::new(cfg.input_clamp)?,
            gain: cfg.gain,
            integrator: BoundedIntegrator::new(SoftEllipse::new(cfg.bound, cfg.buffer)?),
            ripple: MeanFilter::new(mean_order)?,
            foot_tilt_gain: cfg.foot_tilt_gain,
            hip_shift_gain: cfg.hip_shift_gain,
        })
    }

    pub fn integrator(&self) -> &BoundedIntegrator {
        &self.integrator
    }

    pub fn reset(&mut self) {
        self.integrator.reset();
        self.ripple.reset();
    }

    pub fn step(&mut self, pd: TiltPhase2D, dt: f64) -> IOutput {
        let clamped = coerce_ellip(&pd.to_array(), &self.clamp);
        let u = clamped.map(|v| self.gain * v);
        let integral = self.integrator.step(u, dt);
        let z = self.ripple.step(integral);
        // a lateral tilt is countered by a lateral hip offset and vice versa
        let hip_shift = [self.hip_shift_gain * z[1], -self.hip_shift_gain * z[0]];
        IOutput {
            foot_tilt: TiltPhase2D::from_array(z) * self.foot_tilt_gain,
            hip_shift,
            integral,
            filtered: z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::config::ControllerConfig;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_input_stays_neutral() {
        let cfg = ControllerConfig::default();
        let mut i = IFeedback::new(&cfg.i, cfg.i_mean_order()).unwrap();
        for _ in 0..500 {
            let o = i.step(TiltPhase2D::ZERO, 0.01);
            assert_eq!(o.foot_tilt, TiltPhase2D::ZERO);
            assert_eq!(o.hip_shift, [0.0, 0.0]);
        }
    }

    #[test]
    fn constant_input_ramps_then_saturates() {
        let cfg = ControllerConfig::default();
        let mut i = IFeedback::new(&cfg.i, 1).unwrap();
        let pd = TiltPhase2D::new(0.02, 0.0);
        let dt = 0.01;
        for n in 1..=100 {
            let o = i.step(pd, dt);
            assert_abs_diff_eq!(o.integral[0], cfg.i.gain * 0.02 * n as f64 * dt, epsilon = 1e-12);
        }
        let mut last = 0.0;
        for _ in 0..200_000 {
            last = i.step(pd, dt).integral[0];
        }
        // saturation settles where one increment is exactly undone by the coercion
        let (r, b) = (cfg.i.bound[0], cfg.i.buffer);
        let h = cfg.i.gain * 0.02 * dt;
        let knee = r - b;
        assert_abs_diff_eq!(r - b * (-(last + h - knee) / b).exp(), last, epsilon = 1e-9);
        assert!(last < r);
        assert_abs_diff_eq!(last, knee + (2.0 * h * b).sqrt(), epsilon = 2.0 * h);
        let o = i.step(pd, dt);
        assert_abs_diff_eq!(o.foot_tilt.px, cfg.i.foot_tilt_gain * o.filtered[0], epsilon = 1e-15);
    }

    #[test]
    fn period_matched_window_removes_ripple() {
        let cfg = ControllerConfig::default();
        let order = cfg.i_mean_order();
        let mut i = IFeedback::new(&cfg.i, order).unwrap();
        let dt = cfg.dt;
        let f = cfg.timing.f_nom;
        let (mut raw_lo, mut raw_hi, mut f_lo, mut f_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for n in 0..2000 {
            let t = n as f64 * dt;
            let o = i.step(TiltPhase2D::new(0.03 * (f * t).sin(), 0.0), dt);
            if n >= 1000 {
                raw_lo = raw_lo.min(o.integral[0]);
                raw_hi = raw_hi.max(o.integral[0]);
                f_lo = f_lo.min(o.filtered[0]);
                f_hi = f_hi.max(o.filtered[0]);
            }
        }
        assert!((f_hi - f_lo) < 0.01 * (raw_hi - raw_lo), "{} vs {}", f_hi - f_lo, raw_hi - raw_lo);
    }
}
