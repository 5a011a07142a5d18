//! Plant and controller stepped together at the controller rate.

use crate::actions::{ConfigError, Controller, ControllerConfig, ControllerOutput, GaitCommand};
use crate::estimator::ImuSample;
use crate::plant::{Disturbance, Plant, PlantConfig, PlantState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub output: ControllerOutput,
    /// Plant state after the cycle's activations were applied.
    pub plant: PlantState,
}

#[derive(Debug, Clone)]
pub struct ClosedLoop {
    controller: Controller,
    plant: Plant,
    commands: Vec<(f64, GaitCommand)>,
    imu: ImuSample,
}

impl ClosedLoop {
    pub fn new(controller: ControllerConfig, plant: PlantConfig, seed: u64) -> Result<Self, ConfigError> {
        let controller = Controller::new(controller)?;
        let mut plant = Plant::new(plant, seed);
        let imu = plant.imu();
        Ok(Self {
            controller,
            plant,
            commands: Vec::new(),
            imu,
        })
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn plant_mut(&mut self) -> &mut Plant {
        &mut self.plant
    }

    pub fn set_disturbances(&mut self, disturbances: Vec<Disturbance>) {
        self.plant.set_disturbances(disturbances);
    }

    /// Piecewise constant command schedule of `(start time, command)` pairs.
    pub fn set_commands(&mut self, mut commands: Vec<(f64, GaitCommand)>) {
        commands.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.commands = commands;
    }

    pub fn command_at(&self, t: f64) -> GaitCommand {
        self.commands
            .iter()
            .take_while(|(start, _)| *start <= t)
            .last()
            .map_or_else(GaitCommand::default, |(_, c)| *c)
    }

    pub fn time(&self) -> f64 {
        self.plant.state().t
    }

    pub fn fallen(&self) -> bool {
        self.plant.state().fallen
    }

    /// Runs one controller cycle and advances the plant by one controller period.
    pub fn cycle(&mut self) -> CycleRecord {
        let dt = self.controller.config().dt;
        let cmd = self.command_at(self.imu.t);
        let output = self.controller.step(&self.imu, &cmd, dt);
        self.imu = self.plant.step(&output.activations, dt);
        CycleRecord {
            output,
            plant: *self.plant.state(),
        }
    }

    /// Runs for `duration` seconds, stopping early once fallen. Returns whether the
    /// plant stayed up.
    pub fn run<F: FnMut(&CycleRecord)>(&mut self, duration: f64, mut on_cycle: F) -> bool {
        let n = (duration / self.controller.config().dt).round() as usize;
        for _ in 0..n {
            let rec = self.cycle();
            on_cycle(&rec);
            if rec.plant.fallen {
                return false;
            }
        }
        true
    }
}
