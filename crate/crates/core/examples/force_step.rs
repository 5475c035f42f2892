//! Hand-rolled two-rate loop: a 500 N force step on the locked actuator,
//! control at 1 kHz and plant substeps at 20 kHz.

use std::f64::consts::PI;

use elastic_joint::control::{build_force_controller, DobConfig, PidConfig};
use elastic_joint::plant::{LseaParams, LseaPlant, Stiction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (control_dt, substeps) = (1e-3, 20);
    let pid = PidConfig::from_lambda_c(1.0, 20.0, 2.5, 3.5)?;
    let params = LseaParams {
        stiction: Some(Stiction::default()),
        ..LseaParams::default()
    };

    for gamma in [0.0, 1.0] {
        let dob = DobConfig::nominal(2.0 * PI * 25.0, gamma);
        let mut ctl = build_force_controller(&pid, &dob, 3.2, control_dt)?;
        let mut plant = LseaPlant::new(params.clone())?;
        let mut f_out = 0.0;
        let mut peak = 0.0f64;
        for k in 0..1000 {
            let f_d = if k >= 100 { 500.0 } else { 0.0 };
            let i_m = ctl.step(f_d, f_out);
            for _ in 0..substeps {
                f_out = plant.step(i_m, control_dt / substeps as f64) * params.force_scale;
            }
            peak = peak.max(f_out);
        }
        println!(
            "gamma {gamma}: final {f_out:.1} N, peak {peak:.1} N, overshoot {:.1} %",
            (peak / 500.0 - 1.0) * 100.0
        );
    }
    Ok(())
}
