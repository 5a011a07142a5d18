use crate::deviation::ExpectedWaveform;
use crate::estimator::EstimatorConfig;
use crate::filters::{Ellipsoid, FilterError, SoftEllipse, WeightProfile};

/// Gains and output bound of one PD-driven tilt action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdActionConfig {
    pub p_gain_lat: f64,
    pub p_gain_sag: f64,
    pub d_gain_lat: f64,
    pub d_gain_sag: f64,
    pub limit: [f64; 2],
    pub buffer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdConfig {
    pub enabled: bool,
    pub p_deadband: [f64; 2],
    pub d_deadband: [f64; 2],
    pub arm: PdActionConfig,
    pub foot: PdActionConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IConfig {
    pub enabled: bool,
    /// Hard elliptical clamp applied to the deviation tilt before the gain.
    pub input_clamp: [f64; 2],
    pub gain: f64,
    pub bound: [f64; 2],
    pub buffer: f64,
    /// Ripple filter length as a number of nominal gait cycles (two steps each).
    pub mean_cycles: f64,
    pub foot_tilt_gain: f64,
    pub hip_shift_gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaningConfig {
    pub enabled: bool,
    pub wlbf_capacity: usize,
    /// Rate limit of the estimated sagittal gait acceleration, units/s^2 per s.
    pub accel_rate: f64,
    pub velocity_gain: f64,
    pub turn_gain: f64,
    pub accel_gain: f64,
    pub limit: f64,
    pub buffer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingConfig {
    pub c: f64,
    pub p_xl: f64,
    pub p_xr: f64,
    pub e_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingOutConfig {
    pub enabled: bool,
    pub crossing: CrossingConfig,
    /// Half width of the one-sided deadband blend above `e_min`.
    pub deadband_width: f64,
    pub gain: f64,
    pub hold_time: f64,
    pub wlbf_capacity: usize,
    /// Half width in gait phase of the double support windows around 0 and pi.
    pub support_blend: f64,
    /// Largest rotation of the output towards the deviation direction.
    pub max_angle: f64,
    pub sagittal_limit: f64,
    pub limit: [f64; 2],
    pub buffer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingPlaneConfig {
    pub enabled: bool,
    pub mean_order: usize,
    pub deadband: [f64; 2],
    pub gain: f64,
    pub limit: [f64; 2],
    pub buffer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingConfig {
    pub enabled: bool,
    /// Nominal gait frequency in rad/s of gait phase.
    pub f_nom: f64,
    pub gain: f64,
    pub deadband: f64,
    pub f_min: f64,
    pub f_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HipHeightConfig {
    pub enabled: bool,
    /// Use only the sagittal component of the deviation speed.
    pub sagittal_only: bool,
    pub settling_time: f64,
    /// Rate limit of the instability low pass.
    pub instability_rate: f64,
    pub instability_lo: f64,
    pub instability_hi: f64,
    pub h_lo: f64,
    pub h_hi: f64,
    pub rate: f64,
}

/// Full controller configuration. Defaults target a 100 Hz loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub dt: f64,
    pub estimator: EstimatorConfig,
    pub waveform: ExpectedWaveform,
    pub py_n: f64,
    pub p_mean_order: usize,
    pub d_wlbf_capacity: usize,
    pub wlbf_profile: WeightProfile,
    pub pd: PdConfig,
    pub i: IConfig,
    pub leaning: LeaningConfig,
    pub swing_out: SwingOutConfig,
    pub swing_plane: SwingPlaneConfig,
    pub timing: TimingConfig,
    pub hip_height: HipHeightConfig,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            estimator: EstimatorConfig::default(),
            waveform: ExpectedWaveform::default(),
            py_n: 0.0,
            p_mean_order: 5,
            d_wlbf_capacity: 10,
            wlbf_profile: WeightProfile::LinearRecency,
            pd: PdConfig {
                enabled: true,
                p_deadband: [0.01, 0.01],
                d_deadband: [0.05, 0.05],
                arm: PdActionConfig {
                    p_gain_lat: 1.5,
                    p_gain_sag: 1.5,
                    d_gain_lat: 0.15,
                    d_gain_sag: 0.15,
                    limit: [0.6, 0.6],
                    buffer: 0.1,
                },
                foot: PdActionConfig {
                    p_gain_lat: 1.0,
                    p_gain_sag: 1.0,
                    d_gain_lat: 0.1,
                    d_gain_sag: 0.1,
                    limit: [0.4, 0.4],
                    buffer: 0.08,
                },
            },
            i: IConfig {
                enabled: true,
                input_clamp: [0.05, 0.05],
                gain: 0.6,
                bound: [1.0, 1.0],
                buffer: 0.4,
                mean_cycles: 1.0,
                foot_tilt_gain: 0.1,
                hip_shift_gain: 0.1,
            },
            leaning: LeaningConfig {
                enabled: true,
                wlbf_capacity: 20,
                accel_rate: 5.0,
                velocity_gain: 0.05,
                turn_gain: 0.02,
                accel_gain: 0.05,
                limit: 0.2,
                buffer: 0.05,
            },
            swing_out: SwingOutConfig {
                enabled: true,
                crossing: CrossingConfig {
                    c: 3.5,
                    p_xl: -0.1,
                    p_xr: 0.1,
                    e_min: 0.04,
                },
                deadband_width: 0.005,
                gain: 3.0,
                hold_time: 0.4,
                wlbf_capacity: 6,
                support_blend: 0.3,
                max_angle: 1.0,
                sagittal_limit: 0.2,
                limit: [0.4, 0.4],
                buffer: 0.08,
            },
            swing_plane: SwingPlaneConfig {
                enabled: true,
                mean_order: 5,
                deadband: [0.02, 0.02],
                gain: 1.0,
                limit: [0.3, 0.3],
                buffer: 0.06,
            },
            timing: TimingConfig {
                enabled: true,
                f_nom: 2.0 * std::f64::consts::PI,
                gain: 40.0,
                deadband: 0.02,
                f_min: 2.0,
                f_max: 9.0,
            },
            hip_height: HipHeightConfig {
                enabled: true,
                sagittal_only: false,
                settling_time: 1.0,
                instability_rate: 2.0,
                instability_lo: 0.2,
                instability_hi: 0.6,
                h_lo: 0.9,
                h_hi: 1.0,
                rate: 0.2,
            },
        }
    }
}

/// A configuration value that failed validation, named by its config key.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid value for `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

fn check(ok: bool, key: &str, reason: impl Into<String>) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError {
            key: key.to_string(),
            reason: reason.into(),
        })
    }
}

fn check_ellipse(axes: [f64; 2], buffer: f64, key: &str) -> Result<(), ConfigError> {
    match SoftEllipse::new(axes, buffer) {
        Ok(_) => Ok(()),
        Err(FilterError::InvalidSemiAxis { index, value }) => Err(ConfigError {
            key: axis_key(key, index),
            reason: format!("semi-axis must be positive, got {value}"),
        }),
        Err(e) => Err(ConfigError {
            key: format!("{key}_buffer"),
            reason: e.to_string(),
        }),
    }
}

fn axis_key(key: &str, index: usize) -> String {
    format!("{key}_{}", if index == 0 { "x" } else { "y" })
}

fn check_axes(axes: [f64; 2], key: &str) -> Result<(), ConfigError> {
    match Ellipsoid::new(axes) {
        Ok(_) => Ok(()),
        Err(FilterError::InvalidSemiAxis { index, value }) => Err(ConfigError {
            key: axis_key(key, index),
            reason: format!("semi-axis must be positive, got {value}"),
        }),
        Err(e) => Err(ConfigError {
            key: key.to_string(),
            reason: e.to_string(),
        }),
    }
}

impl ControllerConfig {
    /// Ripple filter length in controller cycles.
    pub fn i_mean_order(&self) -> usize {
        let period = 2.0 * std::f64::consts::PI / self.timing.f_nom;
        ((self.i.mean_cycles * period / self.dt).round() as usize).max(1)
    }

    /// Checks every value against its documented domain. Error keys match the
    /// flat config file key names.
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.dt > 0.0 && self.dt.is_finite(), "dt", "must be positive")?;
        check(self.estimator.kp >= 0.0, "estimator_kp", "must be non-negative")?;
        check(self.estimator.ki >= 0.0, "estimator_ki", "must be non-negative")?;
        check(
            self.estimator.accel_trust_lo >= 0.0 && self.estimator.accel_trust_lo < self.estimator.accel_trust_hi,
            "estimator_accel_trust_lo",
            "must be non-negative and below estimator_accel_trust_hi",
        )?;
        check(self.estimator.bias_limit >= 0.0, "estimator_bias_limit", "must be non-negative")?;
        check(self.waveform.x.amplitude >= 0.0, "waveform_amp_x", "must be non-negative")?;
        check(self.waveform.y.amplitude >= 0.0, "waveform_amp_y", "must be non-negative")?;
        check(
            self.py_n.abs() < std::f64::consts::FRAC_PI_2,
            "nominal_pitch",
            "magnitude must be below pi/2",
        )?;
        check(self.p_mean_order >= 1, "p_mean_order", "must be at least 1")?;
        check(self.d_wlbf_capacity >= 2, "d_wlbf_capacity", "must be at least 2")?;

        check_axes(self.pd.p_deadband, "pd_p_deadband")?;
        check_axes(self.pd.d_deadband, "pd_d_deadband")?;
        for (name, a) in [("arm", &self.pd.arm), ("foot", &self.pd.foot)] {
            for (suffix, g) in [
                ("p_gain_lat", a.p_gain_lat),
                ("p_gain_sag", a.p_gain_sag),
                ("d_gain_lat", a.d_gain_lat),
                ("d_gain_sag", a.d_gain_sag),
            ] {
                check(g >= 0.0 && g.is_finite(), &format!("{name}_{suffix}"), "must be non-negative")?;
            }
            check_ellipse(a.limit, a.buffer, &format!("{name}_limit"))?;
        }

        check_axes(self.i.input_clamp, "i_input_clamp")?;
        check(self.i.gain >= 0.0, "i_gain", "must be non-negative")?;
        check_ellipse(self.i.bound, self.i.buffer, "i_bound")?;
        check(self.i.mean_cycles > 0.0, "i_mean_cycles", "must be positive")?;

        check(self.leaning.wlbf_capacity >= 2, "lean_wlbf_capacity", "must be at least 2")?;
        check(self.leaning.accel_rate >= 0.0, "lean_accel_rate", "must be non-negative")?;
        check(
            self.leaning.buffer > 0.0 && self.leaning.buffer < self.leaning.limit,
            "lean_buffer",
            "must lie in (0, lean_limit)",
        )?;

        let c = &self.swing_out.crossing;
        check(c.c > 0.0, "crossing_c", "must be positive")?;
        check(c.p_xl < 0.0, "crossing_p_xl", "must be negative")?;
        check(c.p_xr > 0.0, "crossing_p_xr", "must be positive")?;
        check(c.e_min >= 0.0, "crossing_e_min", "must be non-negative")?;
        check(self.swing_out.deadband_width >= 0.0, "swing_out_deadband_width", "must be non-negative")?;
        check(self.swing_out.gain >= 0.0, "swing_out_gain", "must be non-negative")?;
        check(self.swing_out.hold_time >= 0.0, "swing_out_hold_time", "must be non-negative")?;
        check(self.swing_out.wlbf_capacity >= 2, "swing_out_wlbf_capacity", "must be at least 2")?;
        check(
            self.swing_out.support_blend > 0.0 && self.swing_out.support_blend < std::f64::consts::FRAC_PI_2,
            "swing_out_support_blend",
            "must lie in (0, pi/2)",
        )?;
        check(
            self.swing_out.max_angle >= 0.0 && self.swing_out.max_angle < std::f64::consts::FRAC_PI_2,
            "swing_out_max_angle",
            "must lie in [0, pi/2)",
        )?;
        check(self.swing_out.sagittal_limit >= 0.0, "swing_out_sagittal_limit", "must be non-negative")?;
        check_ellipse(self.swing_out.limit, self.swing_out.buffer, "swing_out_limit")?;

        check(self.swing_plane.mean_order >= 1, "swing_plane_mean_order", "must be at least 1")?;
        check_axes(self.swing_plane.deadband, "swing_plane_deadband")?;
        check(self.swing_plane.gain >= 0.0, "swing_plane_gain", "must be non-negative")?;
        check_ellipse(self.swing_plane.limit, self.swing_plane.buffer, "swing_plane_limit")?;

        let t = &self.timing;
        check(t.f_min > 0.0, "timing_f_min", "must be positive")?;
        check(t.f_min <= t.f_nom && t.f_nom <= t.f_max, "timing_f_nom", "must lie in [timing_f_min, timing_f_max]")?;
        check(t.gain >= 0.0, "timing_gain", "must be non-negative")?;
        check(t.deadband >= 0.0, "timing_deadband", "must be non-negative")?;

        let h = &self.hip_height;
        check(h.settling_time >= 0.0, "hip_settling_time", "must be non-negative")?;
        check(h.instability_rate > 0.0, "hip_instability_rate", "must be positive")?;
        check(
            h.instability_lo < h.instability_hi,
            "hip_instability_lo",
            "must be below hip_instability_hi",
        )?;
        check(h.h_lo > 0.0 && h.h_lo <= h.h_hi, "hip_h_lo", "must lie in (0, hip_h_hi]")?;
        check(h.rate > 0.0, "hip_rate", "must be positive")?;
        Ok(())
    }

    /// Configuration with every corrective action disabled.
    pub fn all_disabled() -> Self {
        let mut c = Self::default();
        c.set_all_enabled(false);
        c
    }

    pub fn set_all_enabled(&mut self, enabled: bool) {
        self.pd.enabled = enabled;
        self.i.enabled = enabled;
        self.leaning.enabled = enabled;
        self.swing_out.enabled = enabled;
        self.swing_plane.enabled = enabled;
        self.timing.enabled = enabled;
        self.hip_height.enabled = enabled;
    }
}
