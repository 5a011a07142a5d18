//! Push battery: random-direction pushes during in-place walking, controller on
//! against controller off with identical seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tiltphase::closed_loop::ClosedLoop;

use crate::config::Settings;
use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct PushTestConfig {
    pub levels: Vec<f64>,
    pub pushes: usize,
    pub seed: u64,
    /// Walking time before the push window opens, s.
    pub settle: f64,
    /// Width of the window the push time is drawn from, s.
    pub window: f64,
    /// Time the plant must stay up after the push, s.
    pub observe: f64,
}

impl Default for PushTestConfig {
    fn default() -> Self {
        Self {
            levels: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.6],
            pushes: 20,
            seed: 1,
            settle: 2.0,
            window: 1.0,
            observe: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelResult {
    pub impulse: f64,
    pub pushes: usize,
    pub withstood_on: usize,
    pub withstood_off: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushTrial {
    pub direction: f64,
    pub delay: f64,
    pub noise_seed: u64,
}

impl PushTrial {
    /// The trial for push `index` at level `level`, derived only from the battery seed.
    pub fn derive(seed: u64, level: usize, index: usize, window: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((level as u64) << 32) | index as u64);
        PushTrial {
            direction: rng.random_range(0.0..std::f64::consts::TAU),
            delay: rng.random_range(0.0..window.max(f64::MIN_POSITIVE)),
            noise_seed: rng.random(),
        }
    }
}

/// Settings with every corrective action switched on or off.
pub fn with_controller(settings: &Settings, on: bool) -> Settings {
    let mut s = settings.clone();
    s.controller.set_all_enabled(on);
    s
}

/// Walks in place, pushes once and reports whether the plant stayed up.
pub fn withstands(settings: &Settings, trial: &PushTrial, impulse: f64, settle: f64, observe: f64) -> Result<bool, HarnessError> {
    let mut sim = ClosedLoop::new(settings.controller.clone(), settings.plant.clone(), trial.noise_seed)?;
    if !sim.run(settle + trial.delay, |_| {}) {
        return Ok(false);
    }
    sim.plant_mut().apply_push(trial.direction, impulse);
    Ok(sim.run(observe, |_| {}))
}

/// Paired battery over the impulse ladder.
pub fn push_battery(settings: &Settings, cfg: &PushTestConfig) -> Result<Vec<LevelResult>, HarnessError> {
    let on = with_controller(settings, true);
    let off = with_controller(settings, false);
    on.validate()?;
    let jobs: Vec<(usize, usize, bool)> = (0..cfg.levels.len())
        .flat_map(|l| (0..cfg.pushes).flat_map(move |i| [(l, i, true), (l, i, false)]))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(l, i, enabled)| {
            let trial = PushTrial::derive(cfg.seed, l, i, cfg.window);
            let s = if enabled { &on } else { &off };
            withstands(s, &trial, cfg.levels[l], cfg.settle, cfg.observe).map(|ok| (l, enabled, ok))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut results: Vec<LevelResult> = cfg
        .levels
        .iter()
        .map(|&impulse| LevelResult {
            impulse,
            pushes: cfg.pushes,
            withstood_on: 0,
            withstood_off: 0,
        })
        .collect();
    for (l, enabled, ok) in outcomes {
        if ok {
            let r = &mut results[l];
            if enabled {
                r.withstood_on += 1;
            } else {
                r.withstood_off += 1;
            }
        }
    }
    Ok(results)
}

/// Lateral push conditions: push times spread over one gait cycle, both directions.
pub fn lateral_conditions(phases: usize, window: f64) -> Vec<PushTrial> {
    (0..phases)
        .flat_map(|k| {
            let delay = window * k as f64 / phases as f64;
            [0.0, std::f64::consts::PI].map(|direction| PushTrial {
                direction,
                delay,
                noise_seed: k as u64,
            })
        })
        .collect()
}

/// Largest impulse withstood in one condition, by bisection to `tol`.
pub fn threshold_for(settings: &Settings, trial: &PushTrial, cfg: &PushTestConfig, tol: f64) -> Result<f64, HarnessError> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while withstands(settings, trial, hi, cfg.settle, cfg.observe)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Ok(f64::INFINITY);
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if withstands(settings, trial, mid, cfg.settle, cfg.observe)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Worst-case threshold over the lateral conditions.
pub fn lateral_threshold(settings: &Settings, conditions: &[PushTrial], cfg: &PushTestConfig, tol: f64) -> Result<f64, HarnessError> {
    let values = conditions
        .par_iter()
        .map(|c| threshold_for(settings, c, cfg, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}

pub fn render_report(results: &[LevelResult], thresholds: Option<(f64, f64)>) -> String {
    let mut out = String::from("impulse\tpushes\ton\toff\n");
    for r in results {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", r.impulse, r.pushes, r.withstood_on, r.withstood_off));
    }
    if let Some((on, off)) = thresholds {
        out.push_str(&format!("threshold_on\t{on:.4}\nthreshold_off\t{off:.4}\nratio\t{:.3}\n", on / off));
    }
    out
}
