//! Passive nonlinear complementary filter producing the yaw-free body tilt phase.
//!
//! Gyro rates are integrated as quaternion kinematics; the angle between measured
//! and predicted gravity drives a proportional correction and an optional gyro
//! bias integrator. Only the tilt part of the estimate is exposed downstream, as
//! yaw cannot be observed from an accelerometer.

use crate::rotation::{Quaternion, TiltPhase2D};

pub const STANDARD_GRAVITY: f64 = 9.80665;

/// One timestamped IMU reading in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    /// Angular velocity in rad/s.
    pub gyro: [f64; 3],
    /// Specific force in m/s^2 (reads `+g` along body z when upright and at rest).
    pub accel: [f64; 3],
}

impl ImuSample {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.gyro.iter().all(|v| v.is_finite())
            && self.accel.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub kp: f64,
    pub ki: f64,
    /// Accelerometer magnitudes outside `[lo, hi] * g` skip the correction.
    pub accel_trust_lo: f64,
    pub accel_trust_hi: f64,
    /// Bound on the norm of the gyro bias estimate, rad/s.
    pub bias_limit: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            kp: 2.0,
            ki: 0.0,
            accel_trust_lo: 0.5,
            accel_trust_hi: 1.5,
            bias_limit: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttitudeEstimator {
    config: EstimatorConfig,
    orientation: Quaternion,
    bias: [f64; 3],
    accel_used: bool,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl AttitudeEstimator {
    pub fn new(config: EstimatorConfig) -> Self {
        Self {
            config,
            orientation: Quaternion::IDENTITY,
            bias: [0.0; 3],
            accel_used: false,
        }
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn orientation(&self) -> Quaternion {
        self.orientation
    }

    pub fn bias(&self) -> [f64; 3] {
        self.bias
    }

    /// Whether the accelerometer passed the trust window on the last step.
    pub fn accel_used(&self) -> bool {
        self.accel_used
    }

    pub fn set_orientation(&mut self, q: Quaternion) {
        self.orientation = q;
    }

    pub fn reset(&mut self) {
        self.orientation = Quaternion::IDENTITY;
        self.bias = [0.0; 3];
        self.accel_used = false;
    }

    /// Advances the estimate by `dt` and returns the yaw-free tilt phase.
    pub fn step(&mut self, sample: &ImuSample, dt: f64) -> TiltPhase2D {
        let cfg = self.config;
        let mut omega = [
            sample.gyro[0] - self.bias[0],
            sample.gyro[1] - self.bias[1],
            sample.gyro[2] - self.bias[2],
        ];

        let a = sample.accel;
        let a_norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let lo = cfg.accel_trust_lo * STANDARD_GRAVITY;
        let hi = cfg.accel_trust_hi * STANDARD_GRAVITY;
        self.accel_used = a_norm > 0.0 && a_norm >= lo && a_norm <= hi;
        if self.accel_used {
            let measured = [a[0] / a_norm, a[1] / a_norm, a[2] / a_norm];
            let predicted = self.orientation.inverse_rotate([0.0, 0.0, 1.0]);
            let e = cross(measured, predicted);
            for k in 0..3 {
                omega[k] += cfg.kp * e[k];
            }
            if cfg.ki != 0.0 {
                for k in 0..3 {
                    self.bias[k] -= cfg.ki * e[k] * dt;
                }
                let b = (self.bias[0].powi(2) + self.bias[1].powi(2) + self.bias[2].powi(2)).sqrt();
                if b > cfg.bias_limit {
                    let s = cfg.bias_limit / b;
                    self.bias = self.bias.map(|v| v * s);
                }
            }
        }

        let delta = Quaternion::from_rotation_vector([omega[0] * dt, omega[1] * dt, omega[2] * dt]);
        self.orientation = self.orientation * delta;
        self.tilt_phase()
    }

    /// Tilt phase of the current estimate with its fused yaw removed.
    pub fn tilt_phase(&self) -> TiltPhase2D {
        self.orientation.remove_fused_yaw().tilt_phase_2d()
    }
}
