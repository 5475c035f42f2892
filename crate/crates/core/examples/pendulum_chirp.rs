//! Joint chirp on the weighted pendulum through the full stack, with the
//! observer at the table blend and switched off.

use elastic_joint::config::{Experiment, ExperimentConfig};
use elastic_joint::experiments::pendulum_tracking;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::defaults(Experiment::PendulumChirp);
    let p = cfg.pendulum_setup().params;
    println!("natural frequency {:.4} Hz", p.natural_frequency_hz());
    for gamma in [cfg.control.gamma, 0.0] {
        let run = pendulum_tracking(&cfg, gamma)?;
        match run.diverged_at {
            Some(t) => println!(
                "gamma {gamma}: band RMS {:.3} mm, diverged at {t:.3} s",
                run.band_rms * 1e3
            ),
            None => println!("gamma {gamma}: band RMS {:.3} mm", run.band_rms * 1e3),
        }
    }
    Ok(())
}
