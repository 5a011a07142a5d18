use tiltphase::deviation::{fit_axis_waveform, ExpectedWaveform, WaveformFit};

use crate::error::HarnessError;
use crate::trace::TraceRecord;

pub const MIN_CYCLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub x: WaveformFit,
    pub y: WaveformFit,
    pub cycles: usize,
    pub samples: usize,
}

impl FitReport {
    pub fn waveform(&self) -> ExpectedWaveform {
        ExpectedWaveform {
            x: self.x.waveform,
            y: self.y.waveform,
        }
    }

    /// Fitted parameters in config file form plus the residuals.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (axis, fit) in [("x", &self.x), ("y", &self.y)] {
            let w = &fit.waveform;
            out.push_str(&format!("waveform_amp_{axis} = {}\n", w.amplitude));
            out.push_str(&format!("waveform_phase_{axis} = {}\n", w.phase));
            out.push_str(&format!("waveform_offset_{axis} = {}\n", w.offset));
        }
        out.push_str(&format!(
            "# residual_rms_x = {}\n# residual_rms_y = {}\n# cycles = {}\n# samples = {}\n",
            self.x.residual_rms, self.y.residual_rms, self.cycles, self.samples
        ));
        out
    }
}

/// Completed gait cycles, counted by wraps of the gait phase.
pub fn count_cycles(records: &[TraceRecord]) -> usize {
    records.windows(2).filter(|w| w[1].mu < w[0].mu - std::f64::consts::PI).count()
}

/// Least-squares fit of the expected waveform to `(mu, P_B)` in a trace.
pub fn fit_waveform(records: &[TraceRecord]) -> Result<FitReport, HarnessError> {
    let cycles = count_cycles(records);
    if cycles < MIN_CYCLES {
        return Err(HarnessError::InsufficientData(format!(
            "trace covers {cycles} gait cycles, at least {MIN_CYCLES} are needed"
        )));
    }
    let axis = |k: usize| -> Vec<(f64, f64)> { records.iter().map(|r| (r.mu, r.p_b[k])).collect() };
    let fit = |k: usize| {
        fit_axis_waveform(&axis(k)).ok_or_else(|| HarnessError::InsufficientData("gait phase does not span the cycle".into()))
    };
    Ok(FitReport {
        x: fit(0)?,
        y: fit(1)?,
        cycles,
        samples: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tiltphase::deviation::gait_phase_step;

    fn record(mu: f64, p_b: [f64; 2]) -> TraceRecord {
        TraceRecord {
            t: 0.0,
            mu,
            p_b,
            p_e: [0.0; 2],
            p_d: [0.0; 2],
            arm_tilt: [0.0; 2],
            support_foot_tilt: [0.0; 2],
            continuous_foot_tilt: [0.0; 2],
            hip_shift: [0.0; 2],
            max_hip_height: 1.0,
            lean_tilt: [0.0; 2],
            swing_out_tilt: [0.0; 2],
            swing_ground_plane: [0.0; 2],
            gait_frequency: 0.0,
            e_l: 0.0,
            e_r: 0.0,
            instability: 0.0,
            speed: 0.0,
            integral: [0.0; 2],
            flags: 0,
        }
    }

    #[test]
    fn needs_ten_cycles() {
        let mut mu = 0.0;
        let records: Vec<_> = (0..500)
            .map(|_| {
                mu = gait_phase_step(mu, std::f64::consts::TAU, 0.01);
                record(mu, [0.0, 0.0])
            })
            .collect();
        assert!(matches!(fit_waveform(&records), Err(HarnessError::InsufficientData(_))));
    }

    #[test]
    fn zero_amplitude_gives_mean() {
        let mut mu = 0.0;
        let records: Vec<_> = (0..1200)
            .map(|_| {
                mu = gait_phase_step(mu, std::f64::consts::TAU, 0.01);
                record(mu, [0.02, -0.01])
            })
            .collect();
        let r = fit_waveform(&records).unwrap();
        assert!(r.x.waveform.amplitude < 1e-12);
        assert!((r.x.waveform.offset - 0.02).abs() < 1e-12);
        assert!((r.y.waveform.offset + 0.01).abs() < 1e-12);
        let line = r.render().lines().find(|l| l.starts_with("waveform_offset_x = ")).unwrap().to_string();
        let printed: f64 = line["waveform_offset_x = ".len()..].parse().unwrap();
        assert_eq!(printed, r.x.waveform.offset);
    }
}
