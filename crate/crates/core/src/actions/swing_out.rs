use crate::filters::{coerced_interp, one_sided_smooth_deadband, FilterError, HoldFilter, SoftEllipse, WeightProfile, WlbfFilter};
use crate::rotation::TiltPhase2D;

use super::config::{CrossingConfig, SwingOutConfig};

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Lateral pendulum invariant about a crossing point: constant on undisturbed
/// trajectories of `phi'' = C^2 sin(phi)`.
pub fn pendulum_invariant(phi: f64, phidot: f64, c: f64) -> f64 {
    phidot * phidot / (c * c) + 2.0 * (phi.cos() - 1.0)
}

/// Signed crossing energy, C1 in both arguments.
pub fn crossing_energy(phi: f64, phidot: f64, c: f64) -> f64 {
    phidot * phidot / (c * c) * sgn(phidot) + 2.0 * (phi.cos() - 1.0) * sgn(phi)
}

/// Which foot is the support foot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    /// Sign `lambda` of the foot's crossing coordinate.
    pub fn lambda(self) -> f64 {
        match self {
            Foot::Left => -1.0,
            Foot::Right => 1.0,
        }
    }

    /// Expected support foot for a gait phase: right on `(0, pi]`.
    pub fn expected(mu: f64) -> Foot {
        if mu > 0.0 {
            Foot::Right
        } else {
            Foot::Left
        }
    }

    pub fn crossing_phase(self, cfg: &CrossingConfig) -> f64 {
        match self {
            Foot::Left => cfg.p_xl,
            Foot::Right => cfg.p_xr,
        }
    }
}

/// Crossing coordinates `(phi_X, phidot_X)` of a lateral tilt state.
pub fn crossing_coordinates(px: f64, pxdot: f64, foot: Foot, cfg: &CrossingConfig) -> (f64, f64) {
    let l = foot.lambda();
    (l * (px - foot.crossing_phase(cfg)), l * pxdot)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SwingOutOutput {
    pub tilt: TiltPhase2D,
    pub e_l: f64,
    pub e_r: f64,
    /// Weight of right support in the output blend.
    pub right_weight: f64,
}

#[derive(Debug, Clone)]
pub struct SwingOut {
    cfg: SwingOutConfig,
    wlbf: WlbfFilter<1>,
    hold_l: HoldFilter,
    hold_r: HoldFilter,
    limit: SoftEllipse<2>,
}

impl SwingOut {
    pub fn new(cfg: &SwingOutConfig, profile: WeightProfile) -> Result<Self, FilterError> {
        Ok(Self {
            cfg: *cfg,
            wlbf: WlbfFilter::new(cfg.wlbf_capacity, profile)?,
            hold_l: HoldFilter::new(cfg.hold_time),
            hold_r: HoldFilter::new(cfg.hold_time),
            limit: SoftEllipse::new(cfg.limit, cfg.buffer)?,
        })
    }

    pub fn reset(&mut self) {
        self.wlbf.reset();
        self.hold_l.reset();
        self.hold_r.reset();
    }

    /// Weight of right support, blended across the double support windows.
    pub fn right_support_weight(&self, mu: f64) -> f64 {
        let h = self.cfg.support_blend.sin();
        coerced_interp(mu.sin(), -h, h, 0.0, 1.0)
    }

    pub fn step(&mut self, px_b: f64, t: f64, mu: f64, pd_mean: TiltPhase2D) -> Result<SwingOutOutput, FilterError> {
        let fit = self.wlbf.step(t, [px_b])?;
        let (p, pdot) = (fit.mean_time_value[0], fit.slope[0]);
        let c = &self.cfg.crossing;
        let energy = |foot| {
            let (phi, phidot) = crossing_coordinates(p, pdot, foot, c);
            crossing_energy(phi, phidot, c.c)
        };
        let e_l = energy(Foot::Left);
        let e_r = energy(Foot::Right);
        let activation = |e| self.cfg.gain * one_sided_smooth_deadband(e, c.e_min, self.cfg.deadband_width);
        let held_l = self.hold_l.step(activation(e_l), t);
        let held_r = self.hold_r.step(activation(e_r), t);

        let w = self.right_support_weight(mu);
        let px = w * held_r - (1.0 - w) * held_l;
        let py = if px == 0.0 {
            0.0
        } else {
            // rotate towards the deviation direction mirrored onto the side of px
            let delta = pd_mean.py.abs().atan2(pd_mean.px.abs()).min(self.cfg.max_angle);
            (px.abs() * delta.tan()).min(self.cfg.sagittal_limit).copysign(pd_mean.py)
        };
        let tilt = TiltPhase2D::from_array(self.limit.coerce(&[px, py]));
        Ok(SwingOutOutput {
            tilt,
            e_l,
            e_r,
            right_weight: w,
        })
    }
}
