use tiltphase::actions::{Controller, GaitCommand};
use tiltphase::estimator::ImuSample;

use crate::config::Settings;
use crate::error::HarnessError;
use crate::trace::TraceRecord;

/// Runs the controller open loop over logged IMU samples. The cycle time is the
/// gap between consecutive samples, and the configured `dt` for the first one.
pub fn replay(settings: &Settings, samples: &[ImuSample]) -> Result<Vec<TraceRecord>, HarnessError> {
    let mut controller = Controller::new(settings.controller.clone())?;
    let cmd = GaitCommand::default();
    let mut prev_t = None;
    let records = samples
        .iter()
        .map(|s| {
            let dt = prev_t.map_or(settings.controller.dt, |p| s.t - p);
            prev_t = Some(s.t);
            TraceRecord::from(&controller.step(s, &cmd, dt))
        })
        .collect();
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tiltphase::estimator::STANDARD_GRAVITY;

    #[test]
    fn zero_motion_is_neutral() {
        let samples: Vec<_> = (0..300)
            .map(|k| ImuSample {
                t: k as f64 * 0.01,
                gyro: [0.0; 3],
                accel: [0.0, 0.0, STANDARD_GRAVITY],
            })
            .collect();
        let mut settings = Settings::default();
        // an upright body matches a flat expected waveform exactly
        settings.controller.waveform.x.amplitude = 0.0;
        settings.controller.waveform.y.amplitude = 0.0;
        let records = replay(&settings, &samples).unwrap();
        let f_nom = settings.controller.timing.f_nom;
        for r in &records {
            assert_eq!(r.arm_tilt, [0.0, 0.0]);
            assert_eq!(r.support_foot_tilt, [0.0, 0.0]);
            assert_eq!(r.swing_out_tilt, [0.0, 0.0]);
            assert_eq!(r.gait_frequency, f_nom);
            assert_eq!(r.max_hip_height, settings.controller.hip_height.h_hi);
        }
    }
}
