use elastic_joint::control::LeakyState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dt = 1e-3;
    let q_measured = 0.1;
    for (alpha_v, alpha_p) in [(0.0, 0.0), (0.75, 0.0), (0.0, 0.75), (0.75, 0.75)] {
        let mut st = LeakyState::new(alpha_v, alpha_p, dt, 0.0)?;
        // 25 ms of constant acceleration, then let the leak act.
        for _ in 0..25 {
            st.step(1.0, q_measured);
        }
        let wound = (st.q_bar_d, st.qdot_bar_d);
        for _ in 0..10 {
            st.step(0.0, q_measured);
        }
        println!(
            "alpha_v {alpha_v:.2} alpha_p {alpha_p:.2}: after input q {:.6} qdot {:.6}; 10 steps later q {:.6} qdot {:.2e}",
            wound.0, wound.1, st.q_bar_d, st.qdot_bar_d
        );
    }
    Ok(())
}
