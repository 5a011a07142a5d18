//! Flat `key = value` configuration covering the controller and the surrogate plant.

use tiltphase::actions::{ConfigError, ControllerConfig};
use tiltphase::filters::WeightProfile;
use tiltphase::plant::PlantConfig;

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub controller: ControllerConfig,
    pub plant: PlantConfig,
}

/// A value that can be written to and read from the flat config format.
trait FlatValue: Sized {
    fn parse_flat(raw: &str) -> Result<Self, String>;
    fn render_flat(&self) -> String;
}

impl FlatValue for f64 {
    fn parse_flat(raw: &str) -> Result<Self, String> {
        let v: f64 = raw.parse().map_err(|_| format!("expected a number, got `{raw}`"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("expected a finite number, got `{raw}`"))
        }
    }

    fn render_flat(&self) -> String {
        format!("{self}")
    }
}

impl FlatValue for usize {
    fn parse_flat(raw: &str) -> Result<Self, String> {
        raw.parse().map_err(|_| format!("expected a non-negative integer, got `{raw}`"))
    }

    fn render_flat(&self) -> String {
        self.to_string()
    }
}

impl FlatValue for bool {
    fn parse_flat(raw: &str) -> Result<Self, String> {
        match raw {
            "true" | "1" | "on" => Ok(true),
            "false" | "0" | "off" => Ok(false),
            _ => Err(format!("expected true or false, got `{raw}`")),
        }
    }

    fn render_flat(&self) -> String {
        self.to_string()
    }
}

/// `uniform`, `linear_recency`, or a comma separated list of weights, newest first.
impl FlatValue for WeightProfile {
    fn parse_flat(raw: &str) -> Result<Self, String> {
        match raw {
            "uniform" => Ok(WeightProfile::Uniform),
            "linear_recency" => Ok(WeightProfile::LinearRecency),
            list => {
                let weights = list
                    .split(',')
                    .map(|w| f64::parse_flat(w.trim()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| format!("expected uniform, linear_recency or a weight list, got `{raw}`"))?;
                if weights.iter().any(|w| *w <= 0.0) {
                    return Err("weights must be positive".to_string());
                }
                Ok(WeightProfile::Custom(weights))
            }
        }
    }

    fn render_flat(&self) -> String {
        match self {
            WeightProfile::Uniform => "uniform".to_string(),
            WeightProfile::LinearRecency => "linear_recency".to_string(),
            WeightProfile::Custom(w) => w.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(","),
        }
    }
}

macro_rules! settings_table {
    ($(|$s:ident| $key:literal => $field:expr;)*) => {
        /// Every config key, in dump order.
        pub const KEYS: &[&str] = &[$($key),*];

        fn get_value(settings: &Settings, key: &str) -> Option<String> {
            match key {
                $($key => {
                    let $s = settings;
                    Some(FlatValue::render_flat(&$field))
                })*
                _ => None,
            }
        }

        fn set_value(settings: &mut Settings, key: &str, raw: &str) -> Result<(), String> {
            match key {
                $($key => {
                    let $s = &mut *settings;
                    $field = FlatValue::parse_flat(raw)?;
                    Ok(())
                })*
                _ => Err(format!("unknown key `{key}`")),
            }
        }
    };
}

settings_table! {
    |s| "dt" => s.controller.dt;
    |s| "estimator_kp" => s.controller.estimator.kp;
    |s| "estimator_ki" => s.controller.estimator.ki;
    |s| "estimator_accel_trust_lo" => s.controller.estimator.accel_trust_lo;
    |s| "estimator_accel_trust_hi" => s.controller.estimator.accel_trust_hi;
    |s| "estimator_bias_limit" => s.controller.estimator.bias_limit;
    |s| "waveform_amp_x" => s.controller.waveform.x.amplitude;
    |s| "waveform_phase_x" => s.controller.waveform.x.phase;
    |s| "waveform_offset_x" => s.controller.waveform.x.offset;
    |s| "waveform_amp_y" => s.controller.waveform.y.amplitude;
    |s| "waveform_phase_y" => s.controller.waveform.y.phase;
    |s| "waveform_offset_y" => s.controller.waveform.y.offset;
    |s| "nominal_pitch" => s.controller.py_n;
    |s| "p_mean_order" => s.controller.p_mean_order;
    |s| "d_wlbf_capacity" => s.controller.d_wlbf_capacity;
    |s| "wlbf_profile" => s.controller.wlbf_profile;
    |s| "pd_enabled" => s.controller.pd.enabled;
    |s| "pd_p_deadband_x" => s.controller.pd.p_deadband[0];
    |s| "pd_p_deadband_y" => s.controller.pd.p_deadband[1];
    |s| "pd_d_deadband_x" => s.controller.pd.d_deadband[0];
    |s| "pd_d_deadband_y" => s.controller.pd.d_deadband[1];
    |s| "arm_p_gain_lat" => s.controller.pd.arm.p_gain_lat;
    |s| "arm_p_gain_sag" => s.controller.pd.arm.p_gain_sag;
    |s| "arm_d_gain_lat" => s.controller.pd.arm.d_gain_lat;
    |s| "arm_d_gain_sag" => s.controller.pd.arm.d_gain_sag;
    |s| "arm_limit_x" => s.controller.pd.arm.limit[0];
    |s| "arm_limit_y" => s.controller.pd.arm.limit[1];
    |s| "arm_limit_buffer" => s.controller.pd.arm.buffer;
    |s| "foot_p_gain_lat" => s.controller.pd.foot.p_gain_lat;
    |s| "foot_p_gain_sag" => s.controller.pd.foot.p_gain_sag;
    |s| "foot_d_gain_lat" => s.controller.pd.foot.d_gain_lat;
    |s| "foot_d_gain_sag" => s.controller.pd.foot.d_gain_sag;
    |s| "foot_limit_x" => s.controller.pd.foot.limit[0];
    |s| "foot_limit_y" => s.controller.pd.foot.limit[1];
    |s| "foot_limit_buffer" => s.controller.pd.foot.buffer;
    |s| "i_enabled" => s.controller.i.enabled;
    |s| "i_input_clamp_x" => s.controller.i.input_clamp[0];
    |s| "i_input_clamp_y" => s.controller.i.input_clamp[1];
    |s| "i_gain" => s.controller.i.gain;
    |s| "i_bound_x" => s.controller.i.bound[0];
    |s| "i_bound_y" => s.controller.i.bound[1];
    |s| "i_bound_buffer" => s.controller.i.buffer;
    |s| "i_mean_cycles" => s.controller.i.mean_cycles;
    |s| "i_foot_tilt_gain" => s.controller.i.foot_tilt_gain;
    |s| "i_hip_shift_gain" => s.controller.i.hip_shift_gain;
    |s| "lean_enabled" => s.controller.leaning.enabled;
    |s| "lean_wlbf_capacity" => s.controller.leaning.wlbf_capacity;
    |s| "lean_accel_rate" => s.controller.leaning.accel_rate;
    |s| "lean_velocity_gain" => s.controller.leaning.velocity_gain;
    |s| "lean_turn_gain" => s.controller.leaning.turn_gain;
    |s| "lean_accel_gain" => s.controller.leaning.accel_gain;
    |s| "lean_limit" => s.controller.leaning.limit;
    |s| "lean_buffer" => s.controller.leaning.buffer;
    |s| "swing_out_enabled" => s.controller.swing_out.enabled;
    |s| "crossing_c" => s.controller.swing_out.crossing.c;
    |s| "crossing_p_xl" => s.controller.swing_out.crossing.p_xl;
    |s| "crossing_p_xr" => s.controller.swing_out.crossing.p_xr;
    |s| "crossing_e_min" => s.controller.swing_out.crossing.e_min;
    |s| "swing_out_deadband_width" => s.controller.swing_out.deadband_width;
    |s| "swing_out_gain" => s.controller.swing_out.gain;
    |s| "swing_out_hold_time" => s.controller.swing_out.hold_time;
    |s| "swing_out_wlbf_capacity" => s.controller.swing_out.wlbf_capacity;
    |s| "swing_out_support_blend" => s.controller.swing_out.support_blend;
    |s| "swing_out_max_angle" => s.controller.swing_out.max_angle;
    |s| "swing_out_sagittal_limit" => s.controller.swing_out.sagittal_limit;
    |s| "swing_out_limit_x" => s.controller.swing_out.limit[0];
    |s| "swing_out_limit_y" => s.controller.swing_out.limit[1];
    |s| "swing_out_limit_buffer" => s.controller.swing_out.buffer;
    |s| "swing_plane_enabled" => s.controller.swing_plane.enabled;
    |s| "swing_plane_mean_order" => s.controller.swing_plane.mean_order;
    |s| "swing_plane_deadband_x" => s.controller.swing_plane.deadband[0];
    |s| "swing_plane_deadband_y" => s.controller.swing_plane.deadband[1];
    |s| "swing_plane_gain" => s.controller.swing_plane.gain;
    |s| "swing_plane_limit_x" => s.controller.swing_plane.limit[0];
    |s| "swing_plane_limit_y" => s.controller.swing_plane.limit[1];
    |s| "swing_plane_limit_buffer" => s.controller.swing_plane.buffer;
    |s| "timing_enabled" => s.controller.timing.enabled;
    |s| "timing_f_nom" => s.controller.timing.f_nom;
    |s| "timing_gain" => s.controller.timing.gain;
    |s| "timing_deadband" => s.controller.timing.deadband;
    |s| "timing_f_min" => s.controller.timing.f_min;
    |s| "timing_f_max" => s.controller.timing.f_max;
    |s| "hip_enabled" => s.controller.hip_height.enabled;
    |s| "hip_sagittal_only" => s.controller.hip_height.sagittal_only;
    |s| "hip_settling_time" => s.controller.hip_height.settling_time;
    |s| "hip_instability_rate" => s.controller.hip_height.instability_rate;
    |s| "hip_instability_lo" => s.controller.hip_height.instability_lo;
    |s| "hip_instability_hi" => s.controller.hip_height.instability_hi;
    |s| "hip_h_lo" => s.controller.hip_height.h_lo;
    |s| "hip_h_hi" => s.controller.hip_height.h_hi;
    |s| "hip_rate" => s.controller.hip_height.rate;
    |s| "plant_dt" => s.plant.dt;
    |s| "plant_c" => s.plant.c;
    |s| "plant_ankle_enabled" => s.plant.ankle_enabled;
    |s| "plant_ankle_stiffness" => s.plant.ankle_stiffness;
    |s| "plant_ankle_damping" => s.plant.ankle_damping;
    |s| "plant_foot_right_min" => s.plant.foot_right[0];
    |s| "plant_foot_right_max" => s.plant.foot_right[1];
    |s| "plant_foot_left_min" => s.plant.foot_left[0];
    |s| "plant_foot_left_max" => s.plant.foot_left[1];
    |s| "plant_foot_sagittal_min" => s.plant.foot_sagittal[0];
    |s| "plant_foot_sagittal_max" => s.plant.foot_sagittal[1];
    |s| "plant_waveform_amp_x" => s.plant.waveform.x.amplitude;
    |s| "plant_waveform_phase_x" => s.plant.waveform.x.phase;
    |s| "plant_waveform_offset_x" => s.plant.waveform.x.offset;
    |s| "plant_waveform_amp_y" => s.plant.waveform.y.amplitude;
    |s| "plant_waveform_phase_y" => s.plant.waveform.y.phase;
    |s| "plant_waveform_offset_y" => s.plant.waveform.y.offset;
    |s| "plant_impulse_scale" => s.plant.impulse_scale;
    |s| "plant_coupling_arm" => s.plant.coupling.arm;
    |s| "plant_coupling_support_foot" => s.plant.coupling.support_foot;
    |s| "plant_coupling_swing_out" => s.plant.coupling.swing_out;
    |s| "plant_coupling_swing_plane" => s.plant.coupling.swing_plane;
    |s| "plant_coupling_continuous_foot" => s.plant.coupling.continuous_foot;
    |s| "plant_coupling_hip_shift" => s.plant.coupling.hip_shift;
    |s| "plant_coupling_lean" => s.plant.coupling.lean;
    |s| "plant_fall_limit" => s.plant.fall_limit;
    |s| "plant_gyro_noise" => s.plant.gyro_noise;
    |s| "plant_accel_noise" => s.plant.accel_noise;
}

impl Settings {
    pub fn get(&self, key: &str) -> Option<String> {
        get_value(self, key)
    }

    /// Sets one key from its textual value. The error names the problem but not the key.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        set_value(self, key, raw.trim())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.controller.validate()?;
        self.plant.validate()
    }

    /// Applies a config file on top of the current values and validates the result.
    pub fn apply_text(&mut self, text: &str) -> Result<(), HarnessError> {
        for (index, line) in text.lines().enumerate() {
            let line_no = index + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| HarnessError::ConfigLine {
                line: line_no,
                reason: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            self.set(key, value).map_err(|reason| HarnessError::ConfigLine {
                line: line_no,
                reason: format!("`{key}`: {reason}"),
            })?;
        }
        self.validate()?;
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, HarnessError> {
        let mut s = Settings::default();
        s.apply_text(text)?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text)
    }

    /// Every key with its current value, one `key = value` line each.
    pub fn dump(&self) -> String {
        let mut out = String::from("# tiltphase configuration\n");
        for key in KEYS {
            let value = self.get(key).expect("table key");
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips() {
        let mut s = Settings::default();
        s.set("timing_gain", "12.5").unwrap();
        s.set("wlbf_profile", "3,2,1").unwrap();
        s.set("hip_enabled", "false").unwrap();
        let back = Settings::from_text(&s.dump()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn every_key_reads_back() {
        let s = Settings::default();
        for key in KEYS {
            let v = s.get(key).unwrap();
            let mut t = Settings::default();
            t.set(key, &v).unwrap();
            assert_eq!(t, s, "{key}");
        }
        let mut unique = KEYS.to_vec();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), KEYS.len());
    }

    #[test]
    fn errors_name_line_and_key() {
        let err = Settings::from_text("dt = 0.01\n\nfoo = 1\n").unwrap_err();
        assert!(matches!(err, HarnessError::ConfigLine { line: 3, .. }), "{err}");
        let err = Settings::from_text("arm_limit_x = -0.2\n").unwrap_err();
        assert!(err.to_string().contains("arm_limit_x"), "{err}");
        let err = Settings::from_text("plant_c = 0\n").unwrap_err();
        assert!(err.to_string().contains("plant_c"), "{err}");
        let err = Settings::from_text("timing_gain = fast\n").unwrap_err();
        assert!(err.to_string().contains("timing_gain"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let s = Settings::from_text("# header\n\n  timing_gain = 30 # tuned\n").unwrap();
        assert_eq!(s.controller.timing.gain, 30.0);
    }
}
