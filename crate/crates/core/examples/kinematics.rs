//! Joint setpoints mapped into actuator space, for the pendulum and for a
//! coupled two-joint pair, and the impedance force that follows.

use nalgebra::{DVector, Matrix2, Vector2};

use elastic_joint::control::{impedance_step, ImpedanceConfig};
use elastic_joint::kinematics::{condition_number, to_actuator_space, PendulumMap, Setpoints, TwoDofAffineMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = |x: &[f64]| DVector::from_column_slice(x);
    let imp = ImpedanceConfig::new(40.0, 5.0)?;

    let pendulum = PendulumMap::new(0.07)?.with_trig();
    let joint = Setpoints::new(v(&[0.2]), v(&[0.5]), v(&[15.0]))?;
    let q_measured = v(&[0.18]);
    let act = to_actuator_space(&pendulum, &joint, &q_measured)?;
    let q_hat_a = 0.07 * q_measured[0].sin();
    let f_d = impedance_step(&imp, act.position[0], act.velocity[0], q_hat_a, 0.0, act.effort[0]);
    println!(
        "pendulum: q_a_d {:.5} m, qdot_a_d {:.5} m/s, f_ff {:.1} N, f_d {:.1} N",
        act.position[0], act.velocity[0], act.effort[0], f_d
    );

    let pair = TwoDofAffineMap::new(Matrix2::new(0.05, 0.01, -0.02, 0.04), Vector2::new(0.1, -0.2));
    let joint = Setpoints::new(v(&[0.3, -0.1]), v(&[1.0, 0.5]), v(&[10.0, -4.0]))?;
    let q_measured = v(&[0.29, -0.12]);
    let act = to_actuator_space(&pair, &joint, &q_measured)?;
    let joint_power = joint.effort.dot(&joint.velocity);
    let actuator_power = act.effort.dot(&act.velocity);
    println!(
        "pair: q_a_d {:.4?}, f_ff {:.2?} N",
        act.position.as_slice(),
        act.effort.as_slice()
    );
    println!(
        "      power {joint_power:.6} W joint side, {actuator_power:.6} W actuator side, cond {:.2}",
        condition_number(&pair, &q_measured)
    );
    Ok(())
}
