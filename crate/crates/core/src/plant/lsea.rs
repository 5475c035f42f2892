use num_complex::Complex64;

use crate::control::{DEFAULT_FORCE_SCALE, NOMINAL_PLANT_DEN, NOMINAL_PLANT_GAIN};
use crate::lti::{ContinuousTransferFunction, Polynomial};

use super::PlantError;

/// Default spring between motor carriage and load, N/m.
pub const DEFAULT_SPRING_STIFFNESS: f64 = 2.0e5;

/// Multiplicative errors on the identified model. `den` is ordered highest
/// power first, like the polynomial it scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub den: [f64; 4],
    pub gain: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation {
            den: [1.0; 4],
            gain: 1.0,
        }
    }
}

impl Perturbation {
    /// Every denominator coefficient scaled by the same factor.
    pub fn uniform(factor: f64) -> Self {
        Perturbation {
            den: [factor; 4],
            gain: 1.0,
        }
    }

    fn validate(&self) -> Result<(), PlantError> {
        for f in self.den.iter().chain([&self.gain]) {
            if !(*f > 0.0) || !f.is_finite() {
                return Err(PlantError::InvalidParameter(format!(
                    "perturbation factors must be positive, got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// Karnopp friction on the motor carriage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stiction {
    /// Breakaway (and kinetic) friction, in amperes of motor current.
    pub breakaway: f64,
    /// Carriage speed below which the carriage may stick, model units/s.
    pub velocity_threshold: f64,
}

impl Default for Stiction {
    fn default() -> Self {
        Stiction {
            breakaway: 0.03,
            velocity_threshold: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LseaParams {
    pub perturbation: Perturbation,
    pub stiction: Option<Stiction>,
    /// Total free play between carriage and load, m.
    pub backlash: f64,
    /// Time constant of an extra first-order lag on the current, s.
    pub extra_lag: Option<f64>,
    pub spring_stiffness: f64,
    /// Newtons per model output unit.
    pub force_scale: f64,
}

impl Default for LseaParams {
    fn default() -> Self {
        LseaParams {
            perturbation: Perturbation::default(),
            stiction: None,
            backlash: 0.0,
            extra_lag: None,
            spring_stiffness: DEFAULT_SPRING_STIFFNESS,
            force_scale: DEFAULT_FORCE_SCALE,
        }
    }
}

impl LseaParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        self.perturbation.validate()?;
        if let Some(s) = self.stiction {
            if !(s.breakaway >= 0.0) || !(s.velocity_threshold >= 0.0) {
                return Err(PlantError::InvalidParameter(
                    "stiction breakaway and velocity threshold must be non-negative".into(),
                ));
            }
        }
        if !(self.backlash >= 0.0) || !self.backlash.is_finite() {
            return Err(PlantError::InvalidParameter(format!(
                "backlash must be non-negative, got {}",
                self.backlash
            )));
        }
        if let Some(tau) = self.extra_lag {
            if !(tau > 0.0) || !tau.is_finite() {
                return Err(PlantError::InvalidParameter(format!(
                    "extra lag time constant must be positive, got {tau}"
                )));
            }
        }
        for (name, v) in [
            ("spring_stiffness", self.spring_stiffness),
            ("force_scale", self.force_scale),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PlantError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// The (perturbed) linear model, ignoring stiction, backlash and any
    /// extra lag.
    pub fn transfer_function(&self) -> ContinuousTransferFunction {
        let p = &self.perturbation;
        let den: Vec<f64> = NOMINAL_PLANT_DEN.iter().zip(p.den).map(|(a, f)| a * f).collect();
        ContinuousTransferFunction::from_coeffs(&[NOMINAL_PLANT_GAIN * p.gain], &den)
            .expect("positive factors keep the model valid")
    }
}

/// The cubic split as a current lag feeding a spring-mass carriage:
///
/// ```text
/// P(s) = 1/(tau s + 1) * k/(s^2 + alpha s + beta)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factorization {
    pub tau: f64,
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Factorization {
    pub fn of(tf: &ContinuousTransferFunction) -> Result<Self, PlantError> {
        let den = tf.den();
        if den.degree() != 3 || tf.num().degree() != 0 {
            return Err(PlantError::InvalidParameter(
                "actuator model must be a constant over a cubic".into(),
            ));
        }
        let lead = den.leading();
        let gain = tf.num().leading() / lead;
        let monic = den.monic();
        let roots = monic.roots();
        let real = roots
            .iter()
            .filter(|r| r.im.abs() <= 1e-9 * r.norm().max(1.0))
            .min_by(|a, b| a.re.total_cmp(&b.re))
            .map(|r| r.re)
            .ok_or_else(|| PlantError::InvalidParameter("cubic without a real root".into()))?;
        if !(real < 0.0) {
            return Err(PlantError::InvalidParameter(format!(
                "current lag pole must be stable, got {real}"
            )));
        }
        // Deflate by (s - real).
        let c = monic.coeffs();
        let alpha = c[1] + real;
        let beta = c[2] + real * alpha;
        if !(beta > 0.0) {
            return Err(PlantError::InvalidParameter(format!(
                "carriage stiffness term must be positive, got {beta}"
            )));
        }
        Ok(Factorization {
            tau: -1.0 / real,
            k: gain / -real,
            alpha,
            beta,
        })
    }

    pub fn transfer_function(&self) -> ContinuousTransferFunction {
        let lag = Polynomial::from_raw(vec![self.tau, 1.0]);
        let mech = Polynomial::from_raw(vec![1.0, self.alpha, self.beta]);
        ContinuousTransferFunction::new(Polynomial::constant(self.k), lag.mul(&mech)).expect("factorization is causal")
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.k / ((self.tau * s + 1.0) * (s * s + self.alpha * s + self.beta))
    }
}

/// Indices into the actuator state vector.
pub(crate) const I_F: usize = 0;
pub(crate) const I_X: usize = 1;
pub(crate) const P_M: usize = 2;
pub(crate) const V_M: usize = 3;

/// Elastic actuator on a locked or moving load.
///
/// State is the filtered current, an optional extra-lag current, the
/// carriage position expressed as spring force at zero load (model units)
/// and its rate.
#[derive(Debug, Clone)]
pub struct LseaPlant {
    params: LseaParams,
    model: Factorization,
    pub(crate) state: [f64; 4],
    pub(crate) stuck: bool,
}

impl LseaPlant {
    pub fn new(params: LseaParams) -> Result<Self, PlantError> {
        params.validate()?;
        let model = Factorization::of(&params.transfer_function())?;
        Ok(LseaPlant {
            params,
            model,
            state: [0.0; 4],
            stuck: false,
        })
    }

    pub fn nominal() -> Self {
        Self::new(LseaParams::default()).expect("nominal parameters are valid")
    }

    pub fn params(&self) -> &LseaParams {
        &self.params
    }

    pub fn model(&self) -> &Factorization {
        &self.model
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    pub fn is_stuck(&self) -> bool {
        self.stuck
    }

    pub fn reset(&mut self) {
        self.state = [0.0; 4];
        self.stuck = false;
    }

    /// Meters of carriage travel per model unit.
    pub(crate) fn meters_per_unit(&self) -> f64 {
        self.params.force_scale / self.params.spring_stiffness
    }

    /// Carriage position, m.
    pub fn motor_position(&self) -> f64 {
        self.state[P_M] * self.meters_per_unit()
    }

    /// Spring force in model units against a load at `x_load` meters.
    pub fn force_at(&self, x_load: f64) -> f64 {
        self.engaged(self.state[P_M], x_load)
    }

    fn engaged(&self, p_m: f64, x_load: f64) -> f64 {
        let scale = self.meters_per_unit();
        let half = 0.5 * self.params.backlash;
        let d = p_m * scale - x_load;
        let e = if d > half {
            d - half
        } else if d < -half {
            d + half
        } else {
            0.0
        };
        e / scale
    }

    /// Output with the load locked at zero, model units.
    pub fn output(&self) -> f64 {
        self.force_at(0.0)
    }

    /// One RK4 substep against a locked load. Returns the output in model
    /// units.
    pub fn step(&mut self, i_m: f64, dt: f64) -> f64 {
        self.advance(i_m, dt, &mut [], |_| 0.0, |_, _| []);
        self.output()
    }

    /// Advances the actuator together with an attached load. `load_pos`
    /// maps load state to load position (m); `load_deriv` gives the load
    /// state derivative under an actuator force in model units.
    pub(crate) fn advance<const N: usize>(
        &mut self,
        i_m: f64,
        dt: f64,
        load: &mut [f64; N],
        load_pos: impl Fn(&[f64; N]) -> f64,
        load_deriv: impl Fn(&[f64; N], f64) -> [f64; N],
    ) {
        let model = self.model;
        let v0 = self.state[V_M];
        let drive_at =
            |plant: &Self, load: &[f64; N]| plant.state[I_F] - model.beta * plant.force_at(load_pos(load)) / model.k;

        let mut friction = 0.0;
        self.stuck = false;
        if let Some(s) = self.params.stiction {
            let drive = drive_at(self, load);
            if v0.abs() < s.velocity_threshold && drive.abs() <= s.breakaway {
                self.stuck = true;
                self.state[V_M] = 0.0;
            } else {
                let dir = if v0.abs() >= s.velocity_threshold {
                    v0.signum()
                } else {
                    drive.signum()
                };
                friction = s.breakaway * dir;
            }
        }

        let stuck = self.stuck;
        let extra = self.params.extra_lag;
        let deriv = |y: &[f64; 4], l: &[f64; N]| -> ([f64; 4], [f64; N]) {
            let f = self.engaged(y[P_M], load_pos(l));
            let mut dy = [0.0; 4];
            let lag_in = match extra {
                Some(tau) => {
                    dy[I_X] = (i_m - y[I_X]) / tau;
                    y[I_X]
                }
                None => i_m,
            };
            dy[I_F] = (lag_in - y[I_F]) / model.tau;
            if !stuck {
                dy[P_M] = y[V_M];
                dy[V_M] = model.k * (y[I_F] - friction) - model.alpha * y[V_M] - model.beta * f;
            }
            (dy, load_deriv(l, f))
        };

        let (y0, l0) = (self.state, *load);
        let (k1, m1) = deriv(&y0, &l0);
        let (k2, m2) = deriv(&axpy(&y0, 0.5 * dt, &k1), &axpy(&l0, 0.5 * dt, &m1));
        let (k3, m3) = deriv(&axpy(&y0, 0.5 * dt, &k2), &axpy(&l0, 0.5 * dt, &m2));
        let (k4, m4) = deriv(&axpy(&y0, dt, &k3), &axpy(&l0, dt, &m3));
        self.state = rk4_combine(&y0, dt, &k1, &k2, &k3, &k4);
        *load = rk4_combine(&l0, dt, &m1, &m2, &m3, &m4);

        if let Some(s) = self.params.stiction {
            let v1 = self.state[V_M];
            if !stuck
                && (v1.signum() != v0.signum() || v1.abs() < s.velocity_threshold)
                && drive_at(self, load).abs() <= s.breakaway
            {
                self.state[V_M] = 0.0;
                self.stuck = true;
            }
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

fn rk4_combine<const N: usize>(
    y: &[f64; N],
    dt: f64,
    k1: &[f64; N],
    k2: &[f64; N],
    k3: &[f64; N],
    k4: &[f64; N],
) -> [f64; N] {
    std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// One substep of the locked actuator; returns the output in model units.
pub fn lsea_step(plant: &mut LseaPlant, i_m: f64, dt: f64) -> f64 {
    plant.step(i_m, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_factorization_reproduces_model() {
        let plant = LseaPlant::nominal();
        let m = plant.model();
        assert!((1.0 / m.tau - 99.824).abs() < 1e-2);
        let tf = m.transfer_function().normalized();
        let want = crate::control::nominal_plant().normalized();
        for (a, b) in tf.den().coeffs().iter().zip(want.den().coeffs()) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert!((tf.num().leading() - want.num().leading()).abs() < 1e-9 * want.num().leading());
    }

    #[test]
    fn zero_input_stays_at_rest() {
        let mut p = LseaPlant::nominal();
        for _ in 0..1000 {
            assert_eq!(lsea_step(&mut p, 0.0, 5e-5), 0.0);
        }
    }

    #[test]
    fn unit_current_settles_to_dc_gain() {
        let mut p = LseaPlant::nominal();
        let mut y = 0.0;
        for _ in 0..(20.0 / 5e-5) as usize {
            y = lsea_step(&mut p, 1.0, 5e-5);
        }
        assert!((y - 208.8 / 987.0).abs() < 1e-9, "{y}");
    }

    #[test]
    fn held_below_breakaway_never_moves() {
        let params = LseaParams {
            stiction: Some(Stiction {
                breakaway: 0.3,
                velocity_threshold: 5e-3,
            }),
            ..Default::default()
        };
        let mut p = LseaPlant::new(params).unwrap();
        for _ in 0..40_000 {
            assert_eq!(lsea_step(&mut p, 0.2, 5e-5), 0.0);
        }
        assert!(p.is_stuck());
        for _ in 0..40_000 {
            lsea_step(&mut p, -0.2, 5e-5);
        }
        assert_eq!(p.output(), 0.0);
    }

    #[test]
    fn breakaway_exceeded_moves_and_restick() {
        let params = LseaParams {
            stiction: Some(Stiction {
                breakaway: 0.3,
                velocity_threshold: 5e-3,
            }),
            ..Default::default()
        };
        let mut p = LseaPlant::new(params).unwrap();
        for _ in 0..40_000 {
            lsea_step(&mut p, 1.0, 5e-5);
        }
        // The carriage rests anywhere the spring load stays within the
        // breakaway band around the frictionless equilibrium.
        let y = p.output();
        let dc = 208.8 / 987.0;
        assert!(y != dc && (y - dc).abs() <= 0.3 * dc + 1e-12, "{y}");
        assert!(p.is_stuck());
    }

    #[test]
    fn backlash_shifts_carriage_not_steady_force() {
        let mut p = LseaPlant::new(LseaParams {
            backlash: 0.002,
            ..Default::default()
        })
        .unwrap();
        for _ in 0..200_000 {
            lsea_step(&mut p, 0.5, 5e-5);
        }
        let f = 0.5 * 208.8 / 987.0;
        assert!((p.output() - f).abs() < 1e-9);
        // 1 mm of one-sided play on top of the spring deflection.
        let x = 0.001 + f * 1000.0 / DEFAULT_SPRING_STIFFNESS;
        assert!((p.motor_position() - x).abs() < 1e-9);
    }

    #[test]
    fn perturbed_dc_gain() {
        let params = LseaParams {
            perturbation: Perturbation::uniform(0.7),
            ..Default::default()
        };
        let tf = params.transfer_function();
        assert!((tf.dc_gain() - 208.8 / (0.7 * 987.0)).abs() < 1e-12);
        assert!(LseaPlant::new(params).is_ok());
    }

    #[test]
    fn invalid_parameters_rejected() {
        let bad = LseaParams {
            perturbation: Perturbation::uniform(0.0),
            ..Default::default()
        };
        assert!(LseaPlant::new(bad).is_err());
        let bad = LseaParams {
            backlash: -1.0,
            ..Default::default()
        };
        assert!(LseaPlant::new(bad).is_err());
    }
}
