//! Tustin discretization of the nominal actuator model, compared against the
//! continuous response up to 40 Hz.

use elastic_joint::lti::{bilinear_discretize, freq_response, log_grid, max_bode_deviation};
use elastic_joint::nominal_plant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plant = nominal_plant();
    let grid = log_grid(0.1, 40.0, 10)?;
    let continuous = freq_response(&plant, &grid)?;
    println!("continuous DC gain {:.6}", plant.dc_gain());

    for rate in [200.0, 500.0, 1000.0, 5000.0] {
        let filt = bilinear_discretize(&plant, 1.0 / rate)?;
        let discrete = freq_response(&filt, &grid)?;
        let (db, deg) = max_bode_deviation(&continuous, &discrete);
        println!(
            "{rate:>6} Hz: b_hat = {:.4?}  max gap {db:.3} dB / {deg:.2} deg  DC {:.6}",
            filt.b_hat(),
            filt.dc_gain()
        );
    }
    Ok(())
}
