//! A plant with its denominator scaled by 1.3, driven by a current chirp
//! with and without the observer, compared to the nominal model.

use elastic_joint::config::{Experiment, ExperimentConfig};
use elastic_joint::experiments::{chirp_frf, current_chirp_run, deviation_from_nominal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::defaults(Experiment::DobVerify);
    cfg.scenario.duration = 60.0;
    for factor in [0.7, 1.3] {
        cfg.plant.den_scale = [factor; 4];
        for gamma in [None, Some(1.0)] {
            let log = current_chirp_run(&cfg, gamma)?;
            let frf = chirp_frf(&cfg, &log)?;
            let (db, deg) = deviation_from_nominal(&frf, cfg.sysid.grid_lo_hz, cfg.sysid.compare_hi_hz)?;
            let label = if gamma.is_some() {
                "observer on "
            } else {
                "observer off"
            };
            println!("x{factor} {label}: {db:.2} dB, {deg:.1} deg from nominal");
        }
    }
    Ok(())
}
