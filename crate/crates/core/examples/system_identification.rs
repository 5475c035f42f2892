//! Chirp the simulated actuator, estimate its frequency response and fit a
//! third-order model.

use elastic_joint::config::{Experiment, ExperimentConfig};
use elastic_joint::experiments::{chirp_frf, current_chirp_run};
use elastic_joint::sysid::fit_rational;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::defaults(Experiment::BodeOpenLoop);
    cfg.plant.stiction = false;
    let log = current_chirp_run(&cfg, None)?;
    let frf = chirp_frf(&cfg, &log)?;
    let fit = fit_rational(&frf.valid_response(), 0, 3)?;
    let tf = fit.tf.normalized();
    let lead = tf.den().coeffs()[0];
    println!(
        "num {:.4?}",
        tf.num().coeffs().iter().map(|c| c / lead * 0.01).collect::<Vec<_>>()
    );
    println!(
        "den {:.4?}",
        tf.den().coeffs().iter().map(|c| c / lead * 0.01).collect::<Vec<_>>()
    );
    println!(
        "residual {:.2e}, {} bins, stable {}",
        fit.residual,
        fit.bins,
        tf.is_stable()
    );
    Ok(())
}
