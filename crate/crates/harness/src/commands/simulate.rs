use tiltphase::closed_loop::{ClosedLoop, CycleRecord};

use crate::config::Settings;
use crate::error::HarnessError;
use crate::scenario::Scenario;
use crate::trace::TraceRecord;

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub records: Vec<TraceRecord>,
    pub cycles: Vec<CycleRecord>,
    pub fallen: bool,
}

/// Runs the closed loop for the scenario. `seed` overrides the scenario seed.
pub fn simulate(base: &Settings, scenario: &Scenario, seed: Option<u64>) -> Result<SimulationResult, HarnessError> {
    let settings = scenario.apply(base)?;
    let mut sim = ClosedLoop::new(settings.controller, settings.plant, seed.unwrap_or(scenario.seed))?;
    sim.set_commands(scenario.command_schedule());
    sim.set_disturbances(scenario.plant_disturbances());
    let mut cycles = Vec::new();
    let survived = sim.run(scenario.duration, |r| cycles.push(*r));
    Ok(SimulationResult {
        records: cycles.iter().map(|c| TraceRecord::from(&c.output)).collect(),
        cycles,
        fallen: !survived,
    })
}
