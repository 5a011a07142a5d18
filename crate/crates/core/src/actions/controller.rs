use bitflags::bitflags;

use crate::deviation::{deviation_tilt, gait_phase_step};
use crate::estimator::{AttitudeEstimator, ImuSample};
use crate::filters::{FilterError, MeanFilter, WlbfFilter};
use crate::rotation::TiltPhase2D;

use super::config::{ConfigError, ControllerConfig};
use super::hip_height::HipHeight;
use super::integral::IFeedback;
use super::leaning::{GaitCommand, Leaning};
use super::pd::PdFeedback;
use super::swing_out::SwingOut;
use super::swing_plane::SwingPlane;
use super::timing::gait_frequency;

bitflags! {
    /// Conditions noted during a controller cycle. None of them abort the cycle.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
    pub struct Diagnostics: u32 {
        /// The fused yaw solve of the deviation tilt missed its tolerance.
        const YAW_SOLVE = 1 << 0;
        /// The accelerometer was outside its trust window.
        const ACCEL_GATED = 1 << 1;
        /// The IMU sample was not finite and was ignored.
        const BAD_SAMPLE = 1 << 2;
        /// The sample time did not advance; time-based filters held their outputs.
        const TIME_NOT_ADVANCING = 1 << 3;
    }
}

/// The nine corrective action outputs of one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationSet {
    pub arm_tilt: TiltPhase2D,
    pub support_foot_tilt: TiltPhase2D,
    pub continuous_foot_tilt: TiltPhase2D,
    pub hip_shift: [f64; 2],
    pub max_hip_height: f64,
    pub lean_tilt: TiltPhase2D,
    pub swing_out_tilt: TiltPhase2D,
    pub swing_ground_plane: TiltPhase2D,
    pub gait_frequency: f64,
}

impl ActivationSet {
    /// Activations that leave the nominal gait unchanged.
    pub fn neutral(f_nom: f64, h_hi: f64) -> Self {
        Self {
            arm_tilt: TiltPhase2D::ZERO,
            support_foot_tilt: TiltPhase2D::ZERO,
            continuous_foot_tilt: TiltPhase2D::ZERO,
            hip_shift: [0.0; 2],
            max_hip_height: h_hi,
            lean_tilt: TiltPhase2D::ZERO,
            swing_out_tilt: TiltPhase2D::ZERO,
            swing_ground_plane: TiltPhase2D::ZERO,
            gait_frequency: f_nom,
        }
    }
}

/// Everything one controller cycle produced, including intermediate signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerOutput {
    pub t: f64,
    /// Gait phase the cycle was evaluated at.
    pub mu: f64,
    pub p_b: TiltPhase2D,
    pub p_e: TiltPhase2D,
    pub p_d: TiltPhase2D,
    pub p_d_mean: TiltPhase2D,
    pub p_d_slope: TiltPhase2D,
    pub activations: ActivationSet,
    pub e_l: f64,
    pub e_r: f64,
    pub instability: f64,
    pub deviation_speed: f64,
    /// Raw I-feedback integrator value.
    pub integral: [f64; 2],
    pub flags: Diagnostics,
}

#[derive(Debug, Clone)]
pub struct Controller {
    cfg: ControllerConfig,
    estimator: AttitudeEstimator,
    mu: f64,
    p_mean: MeanFilter<2>,
    d_wlbf: WlbfFilter<2>,
    pd: PdFeedback,
    integral: IFeedback,
    leaning: Leaning,
    swing_out: SwingOut,
    swing_plane: SwingPlane,
    hip_height: HipHeight,
    last: Option<ControllerOutput>,
}

fn filter_error(e: FilterError) -> ConfigError {
    ConfigError {
        key: "filter".to_string(),
        reason: e.to_string(),
    }
}

impl Controller {
    pub fn new(cfg: ControllerConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let build = || -> Result<Self, FilterError> {
            Ok(Self {
                estimator: AttitudeEstimator::new(cfg.estimator),
                mu: 0.0,
                p_mean: MeanFilter::new(cfg.p_mean_order)?,
                d_wlbf: WlbfFilter::new(cfg.d_wlbf_capacity, cfg.wlbf_profile.clone())?,
                pd: PdFeedback::new(&cfg.pd)?,
                integral: IFeedback::new(&cfg.i, cfg.i_mean_order())?,
                leaning: Leaning::new(&cfg.leaning, cfg.wlbf_profile.clone())?,
                swing_out: SwingOut::new(&cfg.swing_out, cfg.wlbf_profile.clone())?,
                swing_plane: SwingPlane::new(&cfg.swing_plane)?,
                hip_height: HipHeight::new(&cfg.hip_height),
                last: None,
                cfg: cfg.clone(),
            })
        };
        build().map_err(filter_error)
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn set_mu(&mut self, mu: f64) {
        self.mu = crate::rotation::wrap_angle(mu);
    }

    pub fn estimator(&self) -> &AttitudeEstimator {
        &self.estimator
    }

    pub fn estimator_mut(&mut self) -> &mut AttitudeEstimator {
        &mut self.estimator
    }

    pub fn integral(&self) -> &IFeedback {
        &self.integral
    }

    pub fn last_output(&self) -> Option<&ControllerOutput> {
        self.last.as_ref()
    }

    /// Restores the initial state: empty filters, zero integrals, `mu = 0`.
    pub fn reset(&mut self) {
        self.estimator.reset();
        self.mu = 0.0;
        self.p_mean.reset();
        self.d_wlbf.reset();
        self.integral.reset();
        self.leaning.reset();
        self.swing_out.reset();
        self.swing_plane.reset();
        self.hip_height.reset();
        self.last = None;
    }

    /// Runs one full controller cycle and advances the gait phase.
    pub fn step(&mut self, imu: &ImuSample, cmd: &GaitCommand, dt: f64) -> ControllerOutput {
        let cfg = &self.cfg;
        let mut flags = Diagnostics::empty();
        let mu = self.mu;

        let p_b = if imu.is_finite() {
            let p = self.estimator.step(imu, dt);
            if !self.estimator.accel_used() {
                flags |= Diagnostics::ACCEL_GATED;
            }
            p
        } else {
            flags |= Diagnostics::BAD_SAMPLE;
            self.estimator.tilt_phase()
        };

        let p_e = cfg.waveform.eval(mu);
        let dev = deviation_tilt(p_b, p_e, cfg.py_n);
        if !dev.converged {
            flags |= Diagnostics::YAW_SOLVE;
        }
        let p_d = dev.pd;
        let p_d_mean = TiltPhase2D::from_array(self.p_mean.step(p_d.to_array()));

        let t = imu.t;
        let advancing = t.is_finite() && self.last.is_none_or(|l| t > l.t);
        if !advancing {
            flags |= Diagnostics::TIME_NOT_ADVANCING;
        }

        let p_d_slope = match (advancing, self.d_wlbf.step(t, p_d.to_array())) {
            (true, Ok(fit)) => TiltPhase2D::from_array(fit.slope),
            _ => self.last.map_or(TiltPhase2D::ZERO, |l| l.p_d_slope),
        };

        let pd = self.pd.compute(p_d_mean, p_d_slope);
        let i_out = self.integral.step(p_d, dt);

        let neutral = ActivationSet::neutral(cfg.timing.f_nom, cfg.hip_height.h_hi);
        let last_act = self.last.map_or(neutral, |l| l.activations);
        let last_e = self.last.map_or((0.0, 0.0), |l| (l.e_l, l.e_r));

        let lean = if advancing {
            self.leaning.step(t, cmd, dt).ok()
        } else {
            None
        }
        .unwrap_or(last_act.lean_tilt);

        let (swing_out, e_l, e_r) = match advancing.then(|| self.swing_out.step(p_b.px, t, mu, p_d_mean)) {
            Some(Ok(o)) => (o.tilt, o.e_l, o.e_r),
            _ => (last_act.swing_out_tilt, last_e.0, last_e.1),
        };

        let plane = self.swing_plane.step(p_b, p_e, cfg.py_n);
        let f_g = gait_frequency(p_d.px, mu, &cfg.timing);
        let hip = self.hip_height.step(p_d_mean, dt);

        let activations = ActivationSet {
            arm_tilt: if cfg.pd.enabled { pd.arm.output } else { neutral.arm_tilt },
            support_foot_tilt: if cfg.pd.enabled { pd.foot.output } else { neutral.support_foot_tilt },
            continuous_foot_tilt: if cfg.i.enabled { i_out.foot_tilt } else { neutral.continuous_foot_tilt },
            hip_shift: if cfg.i.enabled { i_out.hip_shift } else { neutral.hip_shift },
            max_hip_height: if cfg.hip_height.enabled { hip.h_max } else { neutral.max_hip_height },
            lean_tilt: if cfg.leaning.enabled { lean } else { neutral.lean_tilt },
            swing_out_tilt: if cfg.swing_out.enabled { swing_out } else { neutral.swing_out_tilt },
            swing_ground_plane: if cfg.swing_plane.enabled { plane.tilt } else { neutral.swing_ground_plane },
            gait_frequency: if cfg.timing.enabled { f_g } else { neutral.gait_frequency },
        };

        self.mu = gait_phase_step(mu, activations.gait_frequency, dt);
        let out = ControllerOutput {
            t,
            mu,
            p_b,
            p_e,
            p_d,
            p_d_mean,
            p_d_slope,
            activations,
            e_l,
            e_r,
            instability: hip.instability,
            deviation_speed: hip.speed,
            integral: i_out.integral,
            flags,
        };
        self.last = Some(out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::STANDARD_GRAVITY;

    #[test]
    fn disabled_controller_is_neutral() {
        let cfg = ControllerConfig::all_disabled();
        let mut c = Controller::new(cfg.clone()).unwrap();
        for k in 0..300 {
            let imu = ImuSample {
                t: k as f64 * 0.01,
                gyro: [0.3, -0.2, 0.1],
                accel: [1.0, 0.5, STANDARD_GRAVITY],
            };
            let o = c.step(&imu, &GaitCommand::default(), 0.01);
            assert_eq!(o.activations, ActivationSet::neutral(cfg.timing.f_nom, cfg.hip_height.h_hi));
        }
    }

    #[test]
    fn repeated_time_is_flagged_not_fatal() {
        let mut c = Controller::new(ControllerConfig::default()).unwrap();
        let imu = ImuSample {
            t: 0.0,
            gyro: [0.0; 3],
            accel: [0.0, 0.0, STANDARD_GRAVITY],
        };
        c.step(&imu, &GaitCommand::default(), 0.01);
        let o = c.step(&imu, &GaitCommand::default(), 0.01);
        assert!(o.flags.contains(Diagnostics::TIME_NOT_ADVANCING));
        let bad = ImuSample {
            t: 0.02,
            gyro: [f64::NAN; 3],
            ..imu
        };
        let o = c.step(&bad, &GaitCommand::default(), 0.01);
        assert!(o.flags.contains(Diagnostics::BAD_SAMPLE));
        assert!(o.p_b.is_finite());
    }

    #[test]
    fn reset_restores_initial_state() {
        let mut c = Controller::new(ControllerConfig::default()).unwrap();
        let run = |c: &mut Controller| {
            (0..50)
                .map(|k| {
                    let imu = ImuSample {
                        t: k as f64 * 0.01,
                        gyro: [0.5, 0.1, 0.0],
                        accel: [0.0, 0.0, STANDARD_GRAVITY],
                    };
                    c.step(&imu, &GaitCommand::default(), 0.01)
                })
                .collect::<Vec<_>>()
        };
        let a = run(&mut c);
        c.reset();
        let b = run(&mut c);
        assert_eq!(a, b);
    }
}
