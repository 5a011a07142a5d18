use crate::filters::smooth_deadband;

use super::config::TimingConfig;

/// `+1` in right support (`mu` in `(0, pi]`), `-1` in left support.
pub fn support_sign(mu: f64) -> f64 {
    if mu > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Gait frequency from the lateral deviation tilt. Leaning out over the support
/// foot slows the gait, leaning towards the swing foot speeds it up.
pub fn gait_frequency(p_xd: f64, mu: f64, cfg: &TimingConfig) -> f64 {
    let lean = smooth_deadband(p_xd * support_sign(mu), cfg.deadband);
    (cfg.f_nom - cfg.gain * lean).clamp(cfg.f_min, cfg.f_max)
}
