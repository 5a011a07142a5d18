//! Surrogate closed-loop test plant.
//!
//! Each tilt phase axis is an inverted pendulum `p'' = C^2 sin(p - cop)` about the
//! centre of pressure. The nominal sway of the gait is fed forward, and a limited
//! ankle moves the centre of pressure within the support foot to regulate the
//! remaining error. Once the centre of pressure hits the outer edge of the foot,
//! the motion is a pure pendulum about that edge, which is what makes crossing
//! trajectories irrecoverable without further corrective actions.
//!
//! Corrective actions couple in through a diagonal gain table. Tilts of the arms,
//! support foot and swing leg add accelerations opposing their activation, the
//! swing ground plane adds one along its (already opposing) activation, the hip
//! shift, continuous foot tilt and lean shift the regulated equilibrium, and the
//! maximum hip height scales the pendulum constant.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::actions::{swing_out::Foot, ActivationSet, ConfigError};
use crate::deviation::ExpectedWaveform;
use crate::estimator::{ImuSample, STANDARD_GRAVITY};
use crate::rotation::{wrap_angle, Quaternion, TiltPhase2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisturbanceKind {
    /// Instantaneous velocity change at `start`.
    Impulse,
    /// Constant acceleration over `[start, start + duration)`.
    ConstantForce,
    /// Offset of the regulated equilibrium over `[start, start + duration)`, unknown to the gait.
    SoftwareBias,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub kind: DisturbanceKind,
    /// Direction in the tilt phase plane, 0 along `+px`.
    pub direction: f64,
    pub magnitude: f64,
    pub start: f64,
    pub duration: f64,
}

impl Disturbance {
    fn vector(&self) -> [f64; 2] {
        let (s, c) = self.direction.sin_cos();
        [self.magnitude * c, self.magnitude * s]
    }

    fn active(&self, t: f64) -> bool {
        t >= self.start && t < self.start + self.duration
    }
}

/// Coupling gains from activations to the plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingGains {
    pub arm: f64,
    pub support_foot: f64,
    pub swing_out: f64,
    pub swing_plane: f64,
    pub continuous_foot: f64,
    pub hip_shift: f64,
    pub lean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    pub dt: f64,
    pub c: f64,
    pub ankle_enabled: bool,
    pub ankle_stiffness: f64,
    pub ankle_damping: f64,
    /// Lateral centre of pressure range `[inner/outer]` of each foot, absolute tilt phase.
    pub foot_right: [f64; 2],
    pub foot_left: [f64; 2],
    pub foot_sagittal: [f64; 2],
    pub waveform: ExpectedWaveform,
    /// An impulse `J` changes the tilt phase velocity by `J / impulse_scale`.
    pub impulse_scale: f64,
    pub coupling: CouplingGains,
    pub fall_limit: f64,
    pub gyro_noise: f64,
    pub accel_noise: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            c: 3.5,
            ankle_enabled: true,
            ankle_stiffness: 25.0,
            ankle_damping: 6.0,
            foot_right: [-0.03, 0.10],
            foot_left: [-0.10, 0.03],
            foot_sagittal: [-0.06, 0.09],
            waveform: ExpectedWaveform::default(),
            impulse_scale: 1.0,
            coupling: CouplingGains {
                arm: 4.0,
                support_foot: 4.0,
                swing_out: 4.0,
                swing_plane: 2.0,
                continuous_foot: 2.0,
                hip_shift: 2.0,
                lean: 1.0,
            },
            fall_limit: std::f64::consts::FRAC_PI_2,
            gyro_noise: 0.0,
            accel_noise: 0.0,
        }
    }
}

impl PlantConfig {
    /// Checks the configuration. Error keys match the flat config file names.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |ok: bool, key: &str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError {
                    key: key.to_string(),
                    reason: reason.to_string(),
                })
            }
        };
        check(self.dt > 0.0 && self.dt.is_finite(), "plant_dt", "must be positive")?;
        check(self.c > 0.0 && self.c.is_finite(), "plant_c", "must be positive")?;
        check(self.ankle_stiffness >= 0.0, "plant_ankle_stiffness", "must be non-negative")?;
        check(self.ankle_damping >= 0.0, "plant_ankle_damping", "must be non-negative")?;
        for (name, r) in [
            ("plant_foot_right", self.foot_right),
            ("plant_foot_left", self.foot_left),
            ("plant_foot_sagittal", self.foot_sagittal),
        ] {
            check(r[0] < r[1], &format!("{name}_min"), "must be below the matching _max")?;
        }
        check(self.waveform.x.amplitude >= 0.0, "plant_waveform_amp_x", "must be non-negative")?;
        check(self.waveform.y.amplitude >= 0.0, "plant_waveform_amp_y", "must be non-negative")?;
        check(self.impulse_scale > 0.0, "plant_impulse_scale", "must be positive")?;
        check(self.fall_limit > 0.0, "plant_fall_limit", "must be positive")?;
        check(self.gyro_noise >= 0.0 && self.gyro_noise.is_finite(), "plant_gyro_noise", "must be non-negative")?;
        check(self.accel_noise >= 0.0 && self.accel_noise.is_finite(), "plant_accel_noise", "must be non-negative")?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub t: f64,
    pub p: TiltPhase2D,
    pub v: TiltPhase2D,
    pub mu: f64,
    pub support: Foot,
    /// Centre of pressure of the last evaluation, absolute tilt phase.
    pub cop: TiltPhase2D,
    pub steps: u64,
    pub fallen: bool,
}

#[derive(Debug, Clone)]
pub struct Plant {
    cfg: PlantConfig,
    state: PlantState,
    disturbances: Vec<Disturbance>,
    impulses_applied: Vec<bool>,
    rng: ChaCha8Rng,
    gyro_noise: Option<Normal<f64>>,
    accel_noise: Option<Normal<f64>>,
}

struct Inputs {
    act: ActivationSet,
    f_g: f64,
    force: [f64; 2],
    bias: [f64; 2],
    support: Foot,
}

fn noise(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite positive sigma"))
}

/// `sin(a/2)/a` and its scaled derivative `(d/da sin(a/2)/a) / a`.
fn tilt_factors(a: f64) -> (f64, f64) {
    if a < 1e-3 {
        let a2 = a * a;
        (0.5 - a2 / 48.0, -1.0 / 24.0 + a2 / 960.0)
    } else {
        let (s, c) = (0.5 * a).sin_cos();
        (s / a, (0.5 * a * c - s) / (a * a * a))
    }
}

impl Plant {
    pub fn new(cfg: PlantConfig, seed: u64) -> Self {
        let gyro_noise = noise(cfg.gyro_noise);
        let accel_noise = noise(cfg.accel_noise);
        let mut plant = Self {
            state: PlantState {
                t: 0.0,
                p: TiltPhase2D::ZERO,
                v: TiltPhase2D::ZERO,
                mu: 0.0,
                support: Foot::Left,
                cop: TiltPhase2D::ZERO,
                steps: 0,
                fallen: false,
            },
            cfg,
            disturbances: Vec::new(),
            impulses_applied: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            gyro_noise,
            accel_noise,
        };
        plant.reset_to_nominal(0.0, 0.0);
        plant
    }

    pub fn config(&self) -> &PlantConfig {
        &self.cfg
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut PlantState {
        &mut self.state
    }

    pub fn set_disturbances(&mut self, disturbances: Vec<Disturbance>) {
        self.impulses_applied = vec![false; disturbances.len()];
        self.disturbances = disturbances;
    }

    /// Places the plant on its nominal trajectory at gait phase `mu`.
    pub fn reset_to_nominal(&mut self, t: f64, mu: f64) {
        let f = crate::actions::ControllerConfig::default().timing.f_nom;
        let w = &self.cfg.waveform;
        self.state.t = t;
        self.state.mu = wrap_angle(mu);
        self.state.p = w.eval(mu);
        self.state.v = TiltPhase2D::new(w.x.derivative(mu) * f, w.y.derivative(mu) * f);
        self.state.support = Foot::expected(self.state.mu);
        self.state.fallen = false;
    }

    /// Adds an instantaneous velocity change of `impulse / impulse_scale` along `direction`.
    pub fn apply_push(&mut self, direction: f64, impulse: f64) {
        if self.state.fallen || impulse == 0.0 {
            return;
        }
        let dv = impulse / self.cfg.impulse_scale;
        let (s, c) = direction.sin_cos();
        self.state.v += TiltPhase2D::new(dv * c, dv * s);
    }

    fn external(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        let mut force = [0.0; 2];
        let mut bias = [0.0; 2];
        for d in self.disturbances.iter().filter(|d| d.active(t)) {
            let v = d.vector();
            let target = match d.kind {
                DisturbanceKind::ConstantForce => &mut force,
                DisturbanceKind::SoftwareBias => &mut bias,
                DisturbanceKind::Impulse => continue,
            };
            target[0] += v[0];
            target[1] += v[1];
        }
        (force, bias)
    }

    fn foot_range(&self, axis: usize, support: Foot) -> [f64; 2] {
        match (axis, support) {
            (0, Foot::Right) => self.cfg.foot_right,
            (0, Foot::Left) => self.cfg.foot_left,
            _ => self.cfg.foot_sagittal,
        }
    }

    /// Accelerations and centre of pressure at state `(p, v)` and gait phase `mu`.
    fn dynamics(&self, p: [f64; 2], v: [f64; 2], mu: f64, u: &Inputs) -> ([f64; 2], [f64; 2]) {
        let cfg = &self.cfg;
        let c = &cfg.coupling;
        let a = &u.act;
        let c_eff = cfg.c * a.max_hip_height;
        let c2 = c_eff * c_eff;
        let shift = [
            u.bias[0] - c.continuous_foot * a.continuous_foot_tilt.px + c.hip_shift * a.hip_shift[1],
            u.bias[1] - c.continuous_foot * a.continuous_foot_tilt.py - c.hip_shift * a.hip_shift[0]
                + c.lean * a.lean_tilt.py,
        ];
        let actions = [
            -c.arm * a.arm_tilt.px - c.support_foot * a.support_foot_tilt.px - c.swing_out * a.swing_out_tilt.px
                + c.swing_plane * a.swing_ground_plane.px,
            -c.arm * a.arm_tilt.py - c.support_foot * a.support_foot_tilt.py - c.swing_out * a.swing_out_tilt.py
                + c.swing_plane * a.swing_ground_plane.py,
        ];
        let waves = [&cfg.waveform.x, &cfg.waveform.y];
        let mut acc = [0.0; 2];
        let mut cop = [0.0; 2];
        for k in 0..2 {
            let r = waves[k].eval(mu);
            let rd = waves[k].derivative(mu) * u.f_g;
            let rdd = waves[k].second_derivative(mu) * u.f_g * u.f_g;
            let e = p[k] - r - shift[k];
            let ed = v[k] - rd;
            // centre of pressure offset from the nominal trajectory
            let offset = if cfg.ankle_enabled {
                let want = -cfg.ankle_stiffness * e - cfg.ankle_damping * ed;
                let range = self.foot_range(k, u.support);
                let off = e + shift[k] - (want / c2).clamp(-1.0, 1.0).asin();
                off.clamp(range[0] - r, range[1] - r)
            } else {
                0.0
            };
            cop[k] = r + offset;
            acc[k] = rdd + c2 * (p[k] - r - offset).sin() + actions[k] + u.force[k];
        }
        (acc, cop)
    }

    /// One RK4 step of the plant.
    fn substep(&mut self, act: &ActivationSet, f_g: f64, dt: f64) {
        let s = self.state;
        let (force, bias) = self.external(s.t);
        let inputs = Inputs {
            act: *act,
            f_g,
            force,
            bias,
            support: s.support,
        };
        let p0 = s.p.to_array();
        let v0 = s.v.to_array();
        let eval = |p: [f64; 2], v: [f64; 2], tau: f64| self.dynamics(p, v, s.mu + f_g * tau, &inputs);
        let add = |x: [f64; 2], d: [f64; 2], h: f64| [x[0] + h * d[0], x[1] + h * d[1]];

        let (a1, cop) = eval(p0, v0, 0.0);
        let k1 = (v0, a1);
        let (p2, v2) = (add(p0, k1.0, 0.5 * dt), add(v0, k1.1, 0.5 * dt));
        let k2 = (v2, eval(p2, v2, 0.5 * dt).0);
        let (p3, v3) = (add(p0, k2.0, 0.5 * dt), add(v0, k2.1, 0.5 * dt));
        let k3 = (v3, eval(p3, v3, 0.5 * dt).0);
        let (p4, v4) = (add(p0, k3.0, dt), add(v0, k3.1, dt));
        let k4 = (v4, eval(p4, v4, dt).0);

        let mut p = [0.0; 2];
        let mut v = [0.0; 2];
        for i in 0..2 {
            p[i] = p0[i] + dt / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
            v[i] = v0[i] + dt / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
        }
        let st = &mut self.state;
        st.p = TiltPhase2D::from_array(p);
        st.v = TiltPhase2D::from_array(v);
        st.cop = TiltPhase2D::from_array(cop);
        st.t = s.t + dt;
        st.mu = wrap_angle(s.mu + f_g * dt);
        let support = Foot::expected(st.mu);
        if support != st.support {
            st.support = support;
            st.steps += 1;
        }
        if st.p.norm() > self.cfg.fall_limit || !st.p.is_finite() {
            st.fallen = true;
        }
    }

    fn apply_due_impulses(&mut self) {
        let t = self.state.t;
        for i in 0..self.disturbances.len() {
            let d = self.disturbances[i];
            if d.kind == DisturbanceKind::Impulse && !self.impulses_applied[i] && t >= d.start {
                self.impulses_applied[i] = true;
                self.apply_push(d.direction, d.magnitude);
            }
        }
    }

    /// Advances by `duration` using the activations and gait frequency of one
    /// controller cycle, then returns the IMU reading at the new state.
    pub fn step(&mut self, act: &ActivationSet, duration: f64) -> ImuSample {
        let n = ((duration / self.cfg.dt).round() as usize).max(1);
        let h = duration / n as f64;
        for _ in 0..n {
            if self.state.fallen {
                break;
            }
            self.apply_due_impulses();
            self.substep(act, act.gait_frequency, h);
        }
        self.imu()
    }

    /// Noise-free IMU reading of the current state.
    pub fn ideal_imu(&self) -> ImuSample {
        let p = self.state.p;
        let pd = self.state.v;
        let q = Quaternion::from_tilt_phase_2d(p);
        let a = p.norm();
        let (s, t) = tilt_factors(a);
        let pp = p.px * pd.px + p.py * pd.py;
        let qdot = [
            -0.5 * s * pp,
            pd.px * s + p.px * t * pp,
            pd.py * s + p.py * t * pp,
            0.0,
        ];
        // body rate: 2 vec(q* qdot)
        let [w, x, y, z] = q.to_array();
        let (cw, cx, cy, cz) = (w, -x, -y, -z);
        let gyro = [
            2.0 * (cw * qdot[1] + cx * qdot[0] + cy * qdot[3] - cz * qdot[2]),
            2.0 * (cw * qdot[2] - cx * qdot[3] + cy * qdot[0] + cz * qdot[1]),
            2.0 * (cw * qdot[3] + cx * qdot[2] - cy * qdot[1] + cz * qdot[0]),
        ];
        ImuSample {
            t: self.state.t,
            gyro,
            accel: q.inverse_rotate([0.0, 0.0, STANDARD_GRAVITY]),
        }
    }

    /// IMU reading of the current state with the configured sensor noise.
    pub fn imu(&mut self) -> ImuSample {
        let mut s = self.ideal_imu();
        if let Some(n) = self.gyro_noise {
            for g in s.gyro.iter_mut() {
                *g += n.sample(&mut self.rng);
            }
        }
        if let Some(n) = self.accel_noise {
            for a in s.accel.iter_mut() {
                *a += n.sample(&mut self.rng);
            }
        }
        s
    }
}
