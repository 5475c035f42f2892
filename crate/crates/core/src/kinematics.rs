//! Joint space to actuator space mappings for 1-DoF and 2-DoF pairs.
//!
//! Positions go through the forward map, velocities through the Jacobian
//! evaluated at the *measured* joint angles, and feedforward joint torques
//! through the inverse transpose of that Jacobian.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use thiserror::Error;

/// Default `|det J|` below which a Jacobian counts as singular (SI units).
pub const DEFAULT_SINGULARITY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("joint {index} at {value} is outside [{lo}, {hi}]")]
    OutOfRange { index: usize, value: f64, lo: f64, hi: f64 },
    #[error("Jacobian is singular: |det| = {det:e} below {threshold:e}")]
    Singular { det: f64, threshold: f64 },
    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    InvalidParameter(String),
}

/// A joint/actuator pair geometry.
pub trait JointActuatorMap {
    /// Number of joints (and actuators), 1 or 2.
    fn dim(&self) -> usize;

    /// `f_ja`: joint positions to actuator positions.
    fn forward(&self, q_j: &DVector<f64>) -> DVector<f64>;

    /// `J_ja(q_j)`.
    fn jacobian(&self, q_j: &DVector<f64>) -> DMatrix<f64>;

    /// Inclusive joint range, per joint.
    fn joint_range(&self) -> Vec<(f64, f64)>;

    fn singularity_threshold(&self) -> f64 {
        DEFAULT_SINGULARITY_THRESHOLD
    }
}

/// Position, velocity and effort for one side of the map.
#[derive(Debug, Clone, PartialEq)]
pub struct Setpoints {
    pub position: DVector<f64>,
    pub velocity: DVector<f64>,
    /// Joint torque (N m) or actuator force (N).
    pub effort: DVector<f64>,
}

impl Setpoints {
    pub fn new(position: DVector<f64>, velocity: DVector<f64>, effort: DVector<f64>) -> Result<Self, KinematicsError> {
        let n = position.len();
        for v in [&velocity, &effort] {
            if v.len() != n {
                return Err(KinematicsError::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(Setpoints {
            position,
            velocity,
            effort,
        })
    }
}

fn check_dim(map: &dyn JointActuatorMap, v: &DVector<f64>) -> Result<(), KinematicsError> {
    if v.len() != map.dim() {
        return Err(KinematicsError::DimensionMismatch {
            expected: map.dim(),
            got: v.len(),
        });
    }
    Ok(())
}

fn check_range(map: &dyn JointActuatorMap, q_j: &DVector<f64>) -> Result<(), KinematicsError> {
    for (index, (&value, (lo, hi))) in q_j.iter().zip(map.joint_range()).enumerate() {
        if !(value >= lo && value <= hi) {
            return Err(KinematicsError::OutOfRange { index, value, lo, hi });
        }
    }
    Ok(())
}

/// Desired actuator position `f_ja(q_bar_j_d)` and velocity
/// `J_ja(q_j_measured) qdot_bar_j_d`.
pub fn actuator_setpoints(
    map: &dyn JointActuatorMap,
    q_bar_j_d: &DVector<f64>,
    qdot_bar_j_d: &DVector<f64>,
    q_j_measured: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>), KinematicsError> {
    check_dim(map, q_bar_j_d)?;
    check_dim(map, qdot_bar_j_d)?;
    check_dim(map, q_j_measured)?;
    check_range(map, q_j_measured)?;
    let position = map.forward(q_bar_j_d);
    let velocity = map.jacobian(q_j_measured) * qdot_bar_j_d;
    Ok((position, velocity))
}

/// Feedforward actuator force `J_ja(q_j)^-T tau_ff_d`.
pub fn ff_force(
    map: &dyn JointActuatorMap,
    q_j_measured: &DVector<f64>,
    tau_ff_d: &DVector<f64>,
) -> Result<DVector<f64>, KinematicsError> {
    check_dim(map, q_j_measured)?;
    check_dim(map, tau_ff_d)?;
    let jt = map.jacobian(q_j_measured).transpose();
    let det = jt.determinant();
    let threshold = map.singularity_threshold();
    if !(det.abs() >= threshold) {
        return Err(KinematicsError::Singular { det, threshold });
    }
    jt.lu()
        .solve(tau_ff_d)
        .ok_or(KinematicsError::Singular { det, threshold })
}

/// Full mapping of joint setpoints to actuator setpoints.
pub fn to_actuator_space(
    map: &dyn JointActuatorMap,
    joint: &Setpoints,
    q_j_measured: &DVector<f64>,
) -> Result<Setpoints, KinematicsError> {
    let (position, velocity) = actuator_setpoints(map, &joint.position, &joint.velocity, q_j_measured)?;
    let effort = ff_force(map, q_j_measured, &joint.effort)?;
    Setpoints::new(position, velocity, effort)
}

/// 2-norm condition number of the Jacobian at `q_j`.
pub fn condition_number(map: &dyn JointActuatorMap, q_j: &DVector<f64>) -> f64 {
    let sv = map.jacobian(q_j).singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Pendulum driven through a moment arm `l2`: `q_a = l2 q_j`, or
/// `q_a = l2 sin q_j` with trigonometric coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumMap {
    pub l2: f64,
    pub trig: bool,
    pub range: (f64, f64),
    pub singularity_threshold: f64,
}

impl PendulumMap {
    pub fn new(l2: f64) -> Result<Self, KinematicsError> {
        if !(l2 > 0.0) || !l2.is_finite() {
            return Err(KinematicsError::InvalidParameter(format!(
                "l2 must be positive, got {l2}"
            )));
        }
        Ok(PendulumMap {
            l2,
            trig: false,
            range: (-std::f64::consts::PI, std::f64::consts::PI),
            singularity_threshold: DEFAULT_SINGULARITY_THRESHOLD,
        })
    }

    /// Uses `l2 sin q` instead of the small-angle form; the range narrows to
    /// keep `cos q` away from zero.
    pub fn with_trig(mut self) -> Self {
        self.trig = true;
        self.range = (-1.4, 1.4);
        self
    }
}

impl JointActuatorMap for PendulumMap {
    fn dim(&self) -> usize {
        1
    }

    fn forward(&self, q_j: &DVector<f64>) -> DVector<f64> {
        q_j.map(|q| if self.trig { self.l2 * q.sin() } else { self.l2 * q })
    }

    fn jacobian(&self, q_j: &DVector<f64>) -> DMatrix<f64> {
        let q = q_j[0];
        let j = if self.trig { self.l2 * q.cos() } else { self.l2 };
        DMatrix::from_element(1, 1, j)
    }

    fn joint_range(&self) -> Vec<(f64, f64)> {
        vec![self.range]
    }

    fn singularity_threshold(&self) -> f64 {
        self.singularity_threshold
    }
}

/// Two joints coupled through a constant Jacobian: `q_a = J q_j + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoDofAffineMap {
    pub jacobian: Matrix2<f64>,
    pub offset: Vector2<f64>,
    pub range: [(f64, f64); 2],
    pub singularity_threshold: f64,
}

impl TwoDofAffineMap {
    pub fn new(jacobian: Matrix2<f64>, offset: Vector2<f64>) -> Self {
        let wide = (f64::NEG_INFINITY, f64::INFINITY);
        TwoDofAffineMap {
            jacobian,
            offset,
            range: [wide, wide],
            singularity_threshold: DEFAULT_SINGULARITY_THRESHOLD,
        }
    }

    pub fn identity() -> Self {
        Self::new(Matrix2::identity(), Vector2::zeros())
    }

    pub fn with_range(mut self, range: [(f64, f64); 2]) -> Self {
        self.range = range;
        self
    }
}

impl JointActuatorMap for TwoDofAffineMap {
    fn dim(&self) -> usize {
        2
    }

    fn forward(&self, q_j: &DVector<f64>) -> DVector<f64> {
        let q = Vector2::new(q_j[0], q_j[1]);
        let a = self.jacobian * q + self.offset;
        DVector::from_column_slice(a.as_slice())
    }

    fn jacobian(&self, _q_j: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(2, 2, self.jacobian.as_slice())
    }

    fn joint_range(&self) -> Vec<(f64, f64)> {
        self.range.to_vec()
    }

    fn singularity_threshold(&self) -> f64 {
        self.singularity_threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn pendulum_map_setpoints() {
        let map = PendulumMap::new(0.07).unwrap();
        let (q, qd) = actuator_setpoints(&map, &v(&[0.1]), &v(&[1.0]), &v(&[0.1])).unwrap();
        assert!((q[0] - 0.007).abs() < 1e-15);
        assert!((qd[0] - 0.07).abs() < 1e-15);
    }

    #[test]
    fn identity_passes_through() {
        let map = TwoDofAffineMap::identity();
        let (q, qd) = actuator_setpoints(&map, &v(&[0.3, -0.2]), &v(&[1.5, 2.5]), &v(&[0.0, 0.0])).unwrap();
        assert_eq!(q, v(&[0.3, -0.2]));
        assert_eq!(qd, v(&[1.5, 2.5]));
        let f = ff_force(&map, &v(&[0.0, 0.0]), &v(&[3.0, -4.0])).unwrap();
        assert_eq!(f, v(&[3.0, -4.0]));
    }

    #[test]
    fn diagonal_two_dof() {
        let map = TwoDofAffineMap::new(Matrix2::new(0.05, 0.0, 0.0, 0.05), Vector2::zeros());
        let (_, qd) = actuator_setpoints(&map, &v(&[0.0, 0.0]), &v(&[1.0, 2.0]), &v(&[0.0, 0.0])).unwrap();
        assert!((qd[0] - 0.05).abs() < 1e-15 && (qd[1] - 0.1).abs() < 1e-15);
        let f = ff_force(&map, &v(&[0.0, 0.0]), &v(&[1.0, 2.0])).unwrap();
        assert!((f[0] - 20.0).abs() < 1e-12 && (f[1] - 40.0).abs() < 1e-12);
    }

    #[test]
    fn pendulum_ff_force() {
        let map = PendulumMap::new(0.07).unwrap();
        let f = ff_force(&map, &v(&[0.0]), &v(&[7.0])).unwrap();
        assert!((f[0] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn singular_jacobian_rejected() {
        let map = TwoDofAffineMap::new(Matrix2::new(1.0, 2.0, 2.0, 4.0), Vector2::zeros());
        assert!(matches!(
            ff_force(&map, &v(&[0.0, 0.0]), &v(&[1.0, 1.0])),
            Err(KinematicsError::Singular { .. })
        ));
    }

    #[test]
    fn out_of_range_measurement() {
        let map = PendulumMap::new(0.07).unwrap().with_trig();
        assert!(matches!(
            actuator_setpoints(&map, &v(&[0.0]), &v(&[0.0]), &v(&[1.5])),
            Err(KinematicsError::OutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let map = PendulumMap::new(0.07).unwrap();
        assert!(matches!(
            actuator_setpoints(&map, &v(&[0.0, 1.0]), &v(&[0.0]), &v(&[0.0])),
            Err(KinematicsError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn trig_jacobian_evaluated_at_measurement() {
        let map = PendulumMap::new(0.07).unwrap().with_trig();
        let (_, qd) = actuator_setpoints(&map, &v(&[0.0]), &v(&[1.0]), &v(&[0.5])).unwrap();
        assert!((qd[0] - 0.07 * 0.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn condition_of_diagonal() {
        let map = TwoDofAffineMap::new(Matrix2::new(2.0, 0.0, 0.0, 0.5), Vector2::zeros());
        assert!((condition_number(&map, &v(&[0.0, 0.0])) - 4.0).abs() < 1e-12);
    }
}
