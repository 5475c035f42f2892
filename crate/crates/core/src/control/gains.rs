use serde::{Deserialize, Serialize};

use super::{ControlError, ImpedanceConfig, PidConfig};

/// One actuator's gain row: impedance, feedforward, PID and observer blend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSet {
    /// Virtual stiffness, N/m.
    pub k: f64,
    /// Virtual damping, N s/m.
    pub b: f64,
    /// Feedforward current per kN of desired force.
    pub k_ff: f64,
    pub k_p: f64,
    pub k_i: f64,
    pub k_d: f64,
    pub lambda_c: f64,
    pub gamma: f64,
}

impl GainSet {
    pub fn pid(&self) -> Result<PidConfig, ControlError> {
        PidConfig::from_lambda_c(self.k_p, self.k_i, self.k_d, self.lambda_c)
    }

    pub fn impedance(&self) -> Result<ImpedanceConfig, ControlError> {
        ImpedanceConfig::new(self.k, self.b)
    }
}

const HIP: GainSet = GainSet {
    k: 40.0,
    b: 5.0,
    k_ff: 3.2,
    k_p: 15.0,
    k_i: 4.0,
    k_d: 2.5,
    lambda_c: 3.5,
    gamma: 0.8,
};
const THIGH: GainSet = GainSet {
    k: 30.0,
    b: 5.0,
    k_ff: 3.2,
    k_p: 20.0,
    k_i: 5.0,
    k_d: 2.5,
    lambda_c: 3.5,
    gamma: 0.4,
};
const KNEE: GainSet = GainSet {
    k: 30.0,
    b: 5.0,
    k_ff: 3.2,
    k_p: 20.0,
    k_i: 5.0,
    k_d: 2.5,
    lambda_c: 3.5,
    gamma: 0.5,
};
const ANKLE: GainSet = GainSet {
    k: 40.0,
    b: 2.5,
    k_ff: 3.2,
    k_p: 15.0,
    k_i: 4.0,
    k_d: 2.5,
    lambda_c: 3.5,
    gamma: 1.0,
};

/// Lower-body gain table. Left and right legs use identical rows.
pub const LOWER_BODY_GAINS: [(&str, GainSet); 6] = [
    ("front_hip", HIP),
    ("back_hip", HIP),
    ("thigh", THIGH),
    ("knee", KNEE),
    ("left_ankle", ANKLE),
    ("right_ankle", ANKLE),
];

/// Looks up a row of [`LOWER_BODY_GAINS`] by actuator name.
pub fn actuator_gains(name: &str) -> Option<GainSet> {
    LOWER_BODY_GAINS.iter().find(|(n, _)| *n == name).map(|(_, g)| *g)
}
