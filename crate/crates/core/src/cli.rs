//! Command-line runner. Exit status: 0 on success, 1 on other failures,
//! 2 on a bad configuration (with its key path), 3 on a numeric fault
//! (with the experiment time).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, Experiment, ExperimentConfig, NamedTf, ObserverMode};
use crate::experiments::{run_experiment, write_outcome, ExperimentError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAULT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "elastic-joint",
    version,
    about = "Force-control experiments on a simulated elastic actuator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML file layered over the experiment's defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for sensor noise.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Open-loop current chirp into the locked actuator; empirical bode.
    BodeOpenLoop {
        #[command(flatten)]
        common: Common,
        /// Chirp current amplitude, A.
        #[arg(long)]
        amp: Option<f64>,
    },
    /// Perturbed actuator with the observer on and off, compared to the model.
    DobVerify {
        #[command(flatten)]
        common: Common,
    },
    /// Force step through the full controller, swept over derivative gain.
    PidStep {
        #[command(flatten)]
        common: Common,
    },
    /// Leaky integration of a constant acceleration under three leak settings.
    LeakyDemo {
        #[command(flatten)]
        common: Common,
    },
    /// Bilinear discretization of a named transfer function.
    Discretize {
        #[command(flatten)]
        common: Common,
        /// pn, qd, qinv or pid.
        #[arg(long)]
        tf: Option<NamedTf>,
        /// Sample rate, Hz.
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Joint chirp on the pendulum; tracking error with and without the observer.
    PendulumChirp {
        #[command(flatten)]
        common: Common,
        /// on, off or both.
        #[arg(long)]
        dob: Option<ObserverMode>,
    },
    /// Rational fit of an FRF CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        frf: Option<PathBuf>,
        #[arg(long)]
        num: Option<usize>,
        #[arg(long)]
        den: Option<usize>,
    },
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::BodeOpenLoop { .. } => Experiment::BodeOpenLoop,
            Command::DobVerify { .. } => Experiment::DobVerify,
            Command::PidStep { .. } => Experiment::PidStep,
            Command::LeakyDemo { .. } => Experiment::LeakyDemo,
            Command::Discretize { .. } => Experiment::Discretize,
            Command::PendulumChirp { .. } => Experiment::PendulumChirp,
            Command::Fit { .. } => Experiment::Fit,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::BodeOpenLoop { common, .. }
            | Command::DobVerify { common }
            | Command::PidStep { common }
            | Command::LeakyDemo { common }
            | Command::Discretize { common, .. }
            | Command::PendulumChirp { common, .. }
            | Command::Fit { common, .. } => common,
        }
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let experiment = self.experiment();
        let common = self.common();
        let mut cfg = match &common.config {
            Some(path) => ExperimentConfig::load(experiment, path)?,
            None => ExperimentConfig::defaults(experiment),
        };
        if let Some(out) = &common.out {
            cfg.out_dir = out.to_string_lossy().into_owned();
        }
        if let Some(seed) = common.seed {
            cfg.seed = seed;
        }
        match self {
            Command::BodeOpenLoop { amp: Some(a), .. } => cfg.sysid.amplitude = *a,
            Command::Discretize { tf, rate, .. } => {
                if let Some(tf) = tf {
                    cfg.lti.tf = *tf;
                }
                if let Some(r) = rate {
                    cfg.lti.rate_hz = *r;
                }
            }
            Command::PendulumChirp { dob: Some(d), .. } => cfg.control.observer = *d,
            Command::Fit { frf, num, den, .. } => {
                if let Some(p) = frf {
                    cfg.sysid.frf_path = p.to_string_lossy().into_owned();
                }
                if let Some(n) = num {
                    cfg.sysid.num_order = *n;
                }
                if let Some(d) = den {
                    cfg.sysid.den_order = *d;
                }
            }
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (program name first), runs the experiment and returns the
/// exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return if code == 0 { EXIT_OK } else { EXIT_CONFIG };
        }
    };
    let cfg = match cli.command.resolve() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = run_experiment(&cfg).and_then(|o| write_outcome(&cfg, &o).map(|_| o));
    match result {
        Ok(outcome) => {
            if !outcome.printout.is_empty() {
                let _ = writeln!(stdout, "{}", outcome.printout.trim_end());
            }
            let _ = writeln!(stdout, "wrote {}", cfg.out_dir().display());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &ExperimentError) -> i32 {
    match e {
        ExperimentError::Config(_) => EXIT_CONFIG,
        ExperimentError::Fault { .. } => EXIT_FAULT,
        ExperimentError::Failed(_) | ExperimentError::Io(_) => EXIT_FAILURE,
    }
}
