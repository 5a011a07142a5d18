//! Invariant suite and controller latency benchmark.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tiltphase::actions::{pendulum_invariant, ActivationSet, Controller, GaitCommand};
use tiltphase::closed_loop::ClosedLoop;
use tiltphase::deviation::{AxisWaveform, ExpectedWaveform};
use tiltphase::filters::{MeanFilter, WeightProfile, WlbfFilter};
use tiltphase::plant::{Plant, PlantConfig};
use tiltphase::rotation::{Quaternion, TiltPhase2D};

use crate::config::Settings;

pub const LATENCY_MEAN_LIMIT: Duration = Duration::from_micros(50);
pub const LATENCY_P99_LIMIT: Duration = Duration::from_micros(200);

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Latency {
    pub cycles: usize,
    pub mean: Duration,
    pub p99: Duration,
    pub max: Duration,
}

impl Latency {
    pub fn within_budget(&self) -> bool {
        self.mean < LATENCY_MEAN_LIMIT && self.p99 < LATENCY_P99_LIMIT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {:width$}  {}\n", c.name, c.detail));
        }
        out
    }
}

pub fn run_selftest(settings: &Settings, seed: u64) -> SelftestReport {
    let mut checks = Vec::new();
    let valid = match settings.validate() {
        Ok(()) => {
            checks.push(Check::new("config", true, "all keys valid".into()));
            true
        }
        Err(e) => {
            checks.push(Check::new("config", false, e.to_string()));
            false
        }
    };
    checks.push(rotation_round_trips(seed, 10_000));
    checks.push(wlbf_oracle(seed, 1_000));
    checks.push(mean_filter_oracle(seed, 1_000));
    checks.push(energy_conservation(&settings.plant));
    if valid {
        checks.push(determinism(settings, seed));
        let latency = latency_benchmark(settings, seed, 3_000);
        checks.push(Check::new(
            "latency",
            latency.within_budget(),
            format!(
                "mean {:.2} us, p99 {:.2} us, max {:.2} us over {} cycles (limits {} / {} us)",
                micros(latency.mean),
                micros(latency.p99),
                micros(latency.max),
                latency.cycles,
                LATENCY_MEAN_LIMIT.as_micros(),
                LATENCY_P99_LIMIT.as_micros()
            ),
        ));
    } else {
        checks.push(Check::new("determinism", false, "skipped: invalid config".into()));
        checks.push(Check::new("latency", false, "skipped: invalid config".into()));
    }
    SelftestReport { checks }
}

fn micros(d: Duration) -> f64 {
    d.as_secs_f64() * 1e6
}

fn random_quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2: f64 = c.iter().map(|v| v * v).sum();
        if (1e-4..=1.0).contains(&n2) {
            if let Ok(q) = Quaternion::from_components(c[0], c[1], c[2], c[3]) {
                return q;
            }
        }
    }
}

fn rotation_round_trips(seed: u64, n: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < n {
        let q = random_quaternion(&mut rng);
        if q.tilt_angles().alpha >= std::f64::consts::PI - 1e-6 {
            continue;
        }
        tested += 1;
        let back = Quaternion::from_tilt_phase(q.tilt_phase()).to_array();
        let a = q.to_array();
        // q and -q are the same rotation
        let dot: f64 = a.iter().zip(&back).map(|(u, v)| u * v).sum();
        let sign = dot.signum();
        let err = a.iter().zip(&back).map(|(u, v)| (u - sign * v).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    Check::new("rotation_round_trip", worst < 1e-10, format!("max error {worst:.3e} over {n} rotations"))
}

/// Weighted line fit by the 2x2 normal equations, returning (value at `t_eval`, slope).
fn weighted_line_fit(samples: &[(f64, f64, f64)], t_eval: f64) -> (f64, f64) {
    let (mut sw, mut st, mut stt, mut sx, mut stx) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(w, t, x) in samples {
        sw += w;
        st += w * t;
        stt += w * t * t;
        sx += w * x;
        stx += w * t * x;
    }
    let det = sw * stt - st * st;
    if det.abs() <= 1e-12 * sw * stt {
        return (sx / sw, 0.0);
    }
    let intercept = (stt * sx - st * stx) / det;
    let slope = (sw * stx - st * sx) / det;
    (intercept + slope * t_eval, slope)
}

fn wlbf_oracle(seed: u64, n: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let capacity = rng.random_range(2..40);
        let profile = if rng.random_bool(0.5) {
            WeightProfile::LinearRecency
        } else {
            WeightProfile::Uniform
        };
        let mut filter = WlbfFilter::<1>::new(capacity, profile.clone()).expect("capacity is positive");
        let len = rng.random_range(2..=capacity);
        let mut t = rng.random_range(-10.0..10.0);
        let mut raw = Vec::with_capacity(len);
        let mut out = None;
        for _ in 0..len {
            t += rng.random_range(0.001..0.1);
            let x = rng.random_range(-1.0..1.0);
            raw.push((t, x));
            out = Some(filter.step(t, [x]).expect("times increase"));
        }
        let out = out.expect("at least two samples");
        let weighted: Vec<_> = raw
            .iter()
            .enumerate()
                .map(|(k, &(tk, x))| (profile.weight(len - 1 - k, len), tk - t, x))
            .collect();
        let (value, slope) = weighted_line_fit(&weighted, 0.0);
        let scale = 1.0 + value.abs().max(slope.abs());
        worst = worst.max((out.value[0] - value).abs() / scale).max((out.slope[0] - slope).abs() / scale);
    }
    Check::new("wlbf_oracle", worst < 1e-9, format!("max relative error {worst:.3e} over {n} buffers"))
}

fn mean_filter_oracle(seed: u64, n: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let order = rng.random_range(1..30);
        let mut filter = MeanFilter::<1>::new(order).expect("order is positive");
        let xs: Vec<f64> = (0..rng.random_range(1..80)).map(|_| rng.random_range(-1.0..1.0)).collect();
        for (k, &x) in xs.iter().enumerate() {
            let got = filter.step([x])[0];
            let window = &xs[(k + 1).saturating_sub(order)..=k];
            let expect = window.iter().sum::<f64>() / window.len() as f64;
            worst = worst.max((got - expect).abs());
        }
    }
    Check::new("mean_filter_oracle", worst < 1e-12, format!("max error {worst:.3e} over {n} sequences"))
}

fn energy_conservation(base: &PlantConfig) -> Check {
    let flat = AxisWaveform {
        amplitude: 0.0,
        phase: 0.0,
        offset: 0.0,
    };
    let cfg = PlantConfig {
        ankle_enabled: false,
        waveform: ExpectedWaveform { x: flat, y: flat },
        fall_limit: 1e6,
        gyro_noise: 0.0,
        accel_noise: 0.0,
        ..base.clone()
    };
    let act = ActivationSet::neutral(2.0 * std::f64::consts::PI, 1.0);
    let mut worst: f64 = 0.0;
    for &(p0, v0) in &[(0.1, 0.3), (-0.3, 1.2), (0.05, -0.6)] {
        let g0 = pendulum_invariant(p0, v0, cfg.c);
        let mut plant = Plant::new(cfg.clone(), 0);
        plant.state_mut().p = TiltPhase2D::new(p0, 0.0);
        plant.state_mut().v = TiltPhase2D::new(v0, 0.0);
        for _ in 0..500 {
            plant.step(&act, 0.01);
            let s = plant.state();
            worst = worst.max(((pendulum_invariant(s.p.px, s.v.px, cfg.c) - g0) / g0).abs());
        }
    }
    Check::new("energy_conservation", worst < 1e-3, format!("max relative drift {worst:.3e} over 5 s"))
}

fn determinism(settings: &Settings, seed: u64) -> Check {
    let run = || {
        let mut sim = ClosedLoop::new(settings.controller.clone(), settings.plant.clone(), seed).expect("validated config");
        let mut out = Vec::new();
        sim.run(3.0, |r| out.push(*r));
        out
    };
    let (a, b) = (run(), run());
    Check::new("determinism", a == b, format!("{} cycles compared", a.len()))
}

/// Times `Controller::step` inside the closed loop, after a short warm-up.
pub fn latency_benchmark(settings: &Settings, seed: u64, cycles: usize) -> Latency {
    let warmup = 200;
    let mut controller = Controller::new(settings.controller.clone()).expect("validated config");
    let mut plant = Plant::new(settings.plant.clone(), seed);
    let dt = settings.controller.dt;
    let cmd = GaitCommand::default();
    let mut imu = plant.imu();
    let mut times = Vec::with_capacity(cycles);
    for k in 0..warmup + cycles {
        let start = Instant::now();
        let out = controller.step(&imu, &cmd, dt);
        let elapsed = start.elapsed();
        if k >= warmup {
            times.push(elapsed);
        }
        imu = plant.step(&out.activations, dt);
        if plant.state().fallen {
            plant = Plant::new(settings.plant.clone(), seed.wrapping_add(k as u64));
            controller.reset();
            imu = plant.imu();
        }
    }
    let total: Duration = times.iter().sum();
    times.sort_unstable();
    let p99 = times[((times.len() as f64 * 0.99).ceil() as usize).clamp(1, times.len()) - 1];
    Latency {
        cycles,
        mean: total / cycles as u32,
        p99,
        max: *times.last().expect("cycles > 0"),
    }
}
