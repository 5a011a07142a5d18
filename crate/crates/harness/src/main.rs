use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tiltphase_harness::commands::{fit, pushtest, replay, selftest, simulate};
use tiltphase_harness::{imu_log, trace, HarnessError, Scenario, Settings, TraceRecord};

/// Tilt phase controller harness.
#[derive(Debug, Parser)]
#[command(name = "tiltphase", version, arg_required_else_help = true)]
struct Cli {
    /// Flat `key = value` config file applied over the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    dump_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the controller against the surrogate plant. Exits 2 if the plant falls.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write CSV instead of the trace format.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the controller open loop over a logged IMU stream.
    Replay {
        log: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Paired push battery, controller on against controller off.
    Pushtest {
        /// Scenario whose overrides and seed apply to every push.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Comma-separated impulse ladder.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[arg(long, default_value_t = 20)]
        pushes: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Also search the worst-case lateral threshold for both conditions.
        #[arg(long)]
        threshold: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the expected waveform to the (mu, P_B) columns of a trace.
    FitWaveform { trace: PathBuf },
    /// Invariant suite and latency benchmark.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    // usage errors exit 1 so that 2 always means the plant fell
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn write_output(path: Option<&Path>, text: &[u8]) -> Result<(), HarnessError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| HarnessError::io(p, e)),
        None => std::io::stdout().write_all(text).map_err(|e| HarnessError::io(Path::new("<stdout>"), e)),
    }
}

fn encode_records(records: &[TraceRecord], csv: bool) -> Result<Vec<u8>, HarnessError> {
    if csv {
        let mut buf = Vec::new();
        trace::write_csv(&mut buf, records)?;
        Ok(buf)
    } else {
        Ok(trace::render_trace(records).into_bytes())
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    let settings = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    if cli.dump_config {
        print!("{}", settings.dump());
        return Ok(ExitCode::SUCCESS);
    }
    let Some(command) = cli.command else {
        return Err(HarnessError::Scenario("no subcommand given".into()));
    };
    match command {
        Command::Simulate { scenario, out, csv, seed } => {
            let scenario = Scenario::load(&scenario)?;
            let result = simulate::simulate(&settings, &scenario, seed)?;
            write_output(out.as_deref(), &encode_records(&result.records, csv)?)?;
            if result.fallen {
                eprintln!("plant fell at t = {:.3} s", result.cycles.last().map_or(0.0, |c| c.plant.t));
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { log, out, csv } => {
            let samples = imu_log::load_imu_log(&log)?;
            let records = replay::replay(&settings, &samples)?;
            write_output(out.as_deref(), &encode_records(&records, csv)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Pushtest {
            scenario,
            levels,
            pushes,
            seed,
            threshold,
            out,
        } => {
            let mut cfg = pushtest::PushTestConfig {
                pushes,
                ..Default::default()
            };
            let mut settings = settings;
            if let Some(path) = scenario {
                let scenario = Scenario::load(&path)?;
                settings = scenario.apply(&settings)?;
                cfg.seed = scenario.seed;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(levels) = levels {
                if let Some(bad) = levels.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return Err(HarnessError::Scenario(format!("impulse level {bad} is not a non-negative number")));
                }
                cfg.levels = levels;
            }
            let results = pushtest::push_battery(&settings, &cfg)?;
            let thresholds = if threshold {
                let conditions = pushtest::lateral_conditions(8, 1.0);
                let on = pushtest::lateral_threshold(&pushtest::with_controller(&settings, true), &conditions, &cfg, 1e-3)?;
                let off = pushtest::lateral_threshold(&pushtest::with_controller(&settings, false), &conditions, &cfg, 1e-3)?;
                Some((on, off))
            } else {
                None
            };
            write_output(out.as_deref(), pushtest::render_report(&results, thresholds).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FitWaveform { trace: path } => {
            let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
            let records = trace::read_trace(&text)?;
            print!("{}", fit::fit_waveform(&records)?.render());
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { seed } => {
            let report = selftest::run_selftest(&settings, seed);
            print!("{}", report.render());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
