//! Gait phase, expected tilt phase waveform and the deviation tilt.

use crate::rotation::{wrap_angle, Axis, Quaternion, TiltPhase2D};

/// Advances the gait phase by `f_g * dt`, wrapped to `(-pi, pi]`.
pub fn gait_phase_step(mu: f64, f_g: f64, dt: f64) -> f64 {
    wrap_angle(mu + f_g * dt)
}

/// Sinusoid with offset: `a * sin(mu + phase) + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisWaveform {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
}

impl AxisWaveform {
    pub fn eval(&self, mu: f64) -> f64 {
        self.amplitude * (mu + self.phase).sin() + self.offset
    }

    /// Derivative with respect to the gait phase.
    pub fn derivative(&self, mu: f64) -> f64 {
        self.amplitude * (mu + self.phase).cos()
    }

    /// Second derivative with respect to the gait phase.
    pub fn second_derivative(&self, mu: f64) -> f64 {
        -self.amplitude * (mu + self.phase).sin()
    }
}

/// Expected tilt phase as a function of the gait phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedWaveform {
    pub x: AxisWaveform,
    pub y: AxisWaveform,
}

impl Default for ExpectedWaveform {
    fn default() -> Self {
        Self {
            x: AxisWaveform {
                amplitude: 0.03,
                phase: 0.0,
                offset: 0.0,
            },
            y: AxisWaveform {
                amplitude: 0.03,
                phase: 0.0,
                offset: 0.0,
            },
        }
    }
}

impl ExpectedWaveform {
    pub fn eval(&self, mu: f64) -> TiltPhase2D {
        TiltPhase2D::new(self.x.eval(mu), self.y.eval(mu))
    }
}

pub fn expected_phase(mu: f64, w: &ExpectedWaveform) -> TiltPhase2D {
    w.eval(mu)
}

/// Least-squares fit of one axis of the waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformFit {
    pub waveform: AxisWaveform,
    pub residual_rms: f64,
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    let scale = m.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    if !(d.abs() > 1e-12 * scale.powi(3)) {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = r[i];
        }
        *o = det(mk) / d;
    }
    Some(out)
}

/// Fits `a * sin(mu + phase) + offset` to `(mu, value)` pairs.
///
/// Returns `None` when the phases do not span enough of the cycle to determine
/// the three parameters.
pub fn fit_axis_waveform(samples: &[(f64, f64)]) -> Option<WaveformFit> {
    if samples.len() < 3 {
        return None;
    }
    // a sin(mu + phase) = A sin(mu) + B cos(mu), with A = a cos(phase), B = a sin(phase)
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for &(mu, v) in samples {
        let basis = [mu.sin(), mu.cos(), 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            r[i] += basis[i] * v;
        }
    }
    let [a_sin, a_cos, offset] = solve3(m, r)?;
    let amplitude = a_sin.hypot(a_cos);
    let phase = if amplitude > 0.0 { a_cos.atan2(a_sin) } else { 0.0 };
    let waveform = AxisWaveform {
        amplitude,
        phase,
        offset,
    };
    let sq: f64 = samples
        .iter()
        .map(|&(mu, v)| {
            let e = v - (a_sin * mu.sin() + a_cos * mu.cos() + offset);
            e * e
        })
        .sum();
    Some(WaveformFit {
        waveform,
        residual_rms: (sq / samples.len() as f64).sqrt(),
    })
}

/// Result of the deviation tilt computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationTilt {
    pub pd: TiltPhase2D,
    /// The yaw `psi_E` applied to the expected orientation.
    pub psi_e: f64,
    /// `|fused_yaw(q_d)|` at the returned `psi_e`.
    pub residual: f64,
    /// False when the yaw solve did not reach the residual tolerance.
    pub converged: bool,
}

const RESIDUAL_TOL: f64 = 1e-10;
const SOLVE_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 60;

fn hamilton(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

struct DeviationProblem {
    a: Quaternion,
    b: Quaternion,
}

impl DeviationProblem {
    fn new(p_b: TiltPhase2D, p_e: TiltPhase2D, py_n: f64) -> Self {
        let a = Quaternion::axis_rotation(Axis::Y, py_n) * Quaternion::from_tilt_phase_2d(p_b).conjugate();
        let b = Quaternion::from_tilt_phase_2d(p_e) * Quaternion::axis_rotation(Axis::Y, -py_n);
        Self { a, b }
    }

    fn compose(&self, psi: f64) -> Quaternion {
        self.a * Quaternion::axis_rotation(Axis::Z, psi) * self.b
    }

    fn objective(&self, psi: f64) -> f64 {
        self.compose(psi).fused_yaw()
    }

    /// `q_d(psi) = cos(psi/2) A B + sin(psi/2) A k B`, so the z component vanishes
    /// at `tan(psi/2) = -(A B)_z / (A k B)_z`.
    fn closed_form(&self) -> f64 {
        let a = self.a.to_array();
        let b = self.b.to_array();
        let ab = hamilton(a, b);
        let akb = hamilton(hamilton(a, [0.0, 0.0, 0.0, 1.0]), b);
        if ab[3] == 0.0 && akb[3] == 0.0 {
            return 0.0;
        }
        wrap_angle(2.0 * (-ab[3]).atan2(akb[3]))
    }

    /// Bracketing scan, bisection and Newton refinement of the yaw residual.
    fn iterative(&self, guess: f64) -> f64 {
        const SCAN: usize = 32;
        let mut best = guess;
        let mut best_val = self.objective(guess).abs();
        let mut bracket = None;
        let mut prev = (-std::f64::consts::PI, self.objective(-std::f64::consts::PI));
        for i in 1..=SCAN {
            let psi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / SCAN as f64;
            let f = self.objective(psi);
            if f.abs() < best_val {
                best = psi;
                best_val = f.abs();
            }
            // a genuine root changes sign without a wrap jump
            if prev.1.signum() != f.signum() && (f - prev.1).abs() < std::f64::consts::PI {
                bracket = Some((prev.0, prev.1, psi));
            }
            prev = (psi, f);
        }
        if let Some((mut lo, mut f_lo, mut hi)) = bracket {
            for _ in 0..MAX_ITERATIONS {
                let mid = 0.5 * (lo + hi);
                let f_mid = self.objective(mid);
                if f_mid.abs() < best_val {
                    best = mid;
                    best_val = f_mid.abs();
                }
                if hi - lo < SOLVE_TOL || f_mid == 0.0 {
                    break;
                }
                if f_mid.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
        }
        let h = 1e-7;
        for _ in 0..8 {
            let f = self.objective(best);
            let df = (self.objective(best + h) - self.objective(best - h)) / (2.0 * h);
            if f.abs() < SOLVE_TOL || df == 0.0 || !df.is_finite() {
                break;
            }
            let next = wrap_angle(best - f / df);
            if self.objective(next).abs() < f.abs() {
                best = next;
            } else {
                break;
            }
        }
        best
    }
}

/// Deviation of the body tilt phase from its expectation, relative to the nominal
/// ground plane pitched by `py_n`.
pub fn deviation_tilt(p_b: TiltPhase2D, p_e: TiltPhase2D, py_n: f64) -> DeviationTilt {
    let problem = DeviationProblem::new(p_b, p_e, py_n);
    let mut psi_e = problem.closed_form();
    let mut residual = problem.objective(psi_e).abs();
    if residual > RESIDUAL_TOL {
        let refined = problem.iterative(psi_e);
        let r = problem.objective(refined).abs();
        if r < residual {
            psi_e = refined;
            residual = r;
        }
    }
    let q_d = problem.compose(psi_e);
    DeviationTilt {
        pd: q_d.conjugate().tilt_phase_2d(),
        psi_e,
        residual,
        converged: residual <= RESIDUAL_TOL,
    }
}

/// Pure tilt from the expected to the actual body orientation expressed in the
/// nominal ground plane frame.
pub fn swing_plane_tilt(p_b: TiltPhase2D, p_e: TiltPhase2D, py_n: f64) -> TiltPhase2D {
    let q = Quaternion::axis_rotation(Axis::Y, py_n)
        * Quaternion::from_tilt_phase_2d(p_b).conjugate()
        * Quaternion::from_tilt_phase_2d(p_e)
        * Quaternion::axis_rotation(Axis::Y, -py_n);
    q.tilt_phase_2d()
}
