use std::io::Write;

use nalgebra::DVector;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::control::{
    build_force_controller, impedance_step, DisturbanceObserver, DobConfig, ImpedanceConfig, PidConfig,
};
use crate::kinematics::{actuator_setpoints, ff_force, JointActuatorMap, PendulumMap};
use crate::sysid::ChirpSpec;

use super::{LseaParams, LseaPlant, PendulumParams, PlantError};

/// Loop rates, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub control_hz: f64,
    pub reference_hz: f64,
    pub plant_hz: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates {
            control_hz: 1000.0,
            reference_hz: 200.0,
            plant_hz: 20_000.0,
        }
    }
}

fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let k = r.round();
    (k >= 1.0 && (r - k).abs() < 1e-9 * r).then_some(k as usize)
}

impl Rates {
    pub fn validate(&self) -> Result<(usize, usize), PlantError> {
        for (name, v) in [
            ("control", self.control_hz),
            ("reference", self.reference_hz),
            ("plant", self.plant_hz),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PlantError::InvalidRates(format!(
                    "{name} rate must be positive, got {v}"
                )));
            }
        }
        let substeps = integer_ratio(self.plant_hz, self.control_hz).ok_or_else(|| {
            PlantError::InvalidRates(format!(
                "plant rate {} Hz is not an integer multiple of control rate {} Hz",
                self.plant_hz, self.control_hz
            ))
        })?;
        let hold = integer_ratio(self.control_hz, self.reference_hz).ok_or_else(|| {
            PlantError::InvalidRates(format!(
                "control rate {} Hz is not an integer multiple of reference rate {} Hz",
                self.control_hz, self.reference_hz
            ))
        })?;
        Ok((substeps, hold))
    }

    pub fn control_period(&self) -> f64 {
        1.0 / self.control_hz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSetup {
    pub pid: PidConfig,
    pub dob: DobConfig,
    /// Feedforward current per unit model force, A/kN.
    pub k_ff: f64,
    pub impedance: ImpedanceConfig,
}

/// How a current excitation reaches the amplifier between control ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputHold {
    /// Zero-order hold of the value computed at the control tick.
    Sampled,
    /// The excitation is re-evaluated every plant substep, as from an
    /// analog signal generator.
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Excitation {
    /// Current chirp into the locked actuator, optionally wrapped by the
    /// disturbance observer (`i_m = u_c - gamma d_hat`).
    CurrentChirp {
        chirp: ChirpSpec,
        hold: InputHold,
        observer: bool,
    },
    /// Desired force step through the full force controller, locked load.
    ForceStep { force_n: f64, start: f64 },
    /// Joint chirp on the pendulum through kinematics, impedance and the
    /// force controller.
    JointChirp { chirp: ChirpSpec },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumSetup {
    pub params: PendulumParams,
    /// Couple through `l2 sin theta` instead of `l2 theta`.
    pub trig: bool,
    pub theta0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub rates: Rates,
    pub duration: f64,
    pub plant: LseaParams,
    /// `None` locks the load.
    pub pendulum: Option<PendulumSetup>,
    pub controller: ControllerSetup,
    pub excitation: Excitation,
    /// Standard deviation of additive force-sensor noise, N.
    pub force_noise: f64,
    pub seed: u64,
}

/// One row per control tick.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimLog {
    pub t: Vec<f64>,
    /// Joint angle reference for joint chirps, current for current chirps,
    /// desired force for force steps.
    pub ref_pos: Vec<f64>,
    pub q_bar_a_d: Vec<f64>,
    pub qdot_bar_a_d: Vec<f64>,
    pub f_d: Vec<f64>,
    /// Measured output force, N.
    pub f_o: Vec<f64>,
    pub i_m: Vec<f64>,
    pub d_hat: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_dot: Vec<f64>,
    /// Actuator position from the carriage side, m.
    pub q_hat_a_m: Vec<f64>,
    /// Actuator position from the joint side, m.
    pub q_hat_a_j: Vec<f64>,
    /// Command ahead of the observer junction, A.
    pub u_c: Vec<f64>,
}

pub const SIMLOG_COLUMNS: [&str; 12] = [
    "t",
    "ref_pos",
    "q_bar_a_d",
    "qdot_bar_a_d",
    "f_d",
    "f_o",
    "i_m",
    "d_hat",
    "theta",
    "theta_dot",
    "q_hat_a_m",
    "q_hat_a_j",
];

impl SimLog {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn columns(&self) -> [&[f64]; 12] {
        [
            &self.t,
            &self.ref_pos,
            &self.q_bar_a_d,
            &self.qdot_bar_a_d,
            &self.f_d,
            &self.f_o,
            &self.i_m,
            &self.d_hat,
            &self.theta,
            &self.theta_dot,
            &self.q_hat_a_m,
            &self.q_hat_a_j,
        ]
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), PlantError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SIMLOG_COLUMNS)?;
        let cols = self.columns();
        for k in 0..self.len() {
            out.write_record(cols.iter().map(|c| format!("{:.8e}", c[k])))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Outcome of [`run_scenario_partial`]: every row logged before the run
/// stopped, and the fault that stopped it.
#[derive(Debug)]
pub struct SimRun {
    pub log: SimLog,
    pub fault: Option<PlantError>,
}

/// Runs a scenario from rest. Identical scenarios give bit-identical logs.
pub fn run_scenario(sc: &SimScenario) -> Result<SimLog, PlantError> {
    let run = run_scenario_partial(sc)?;
    match run.fault {
        Some(e) => Err(e),
        None => Ok(run.log),
    }
}

/// Like [`run_scenario`], but faults raised during the run are returned
/// alongside the rows logged so far. Setup errors still fail outright.
pub fn run_scenario_partial(sc: &SimScenario) -> Result<SimRun, PlantError> {
    let mut log = SimLog::default();
    let fault = simulate(sc, &mut log)?.err();
    Ok(SimRun { log, fault })
}

/// Outer error: invalid setup. Inner error: fault during the run.
fn simulate(sc: &SimScenario, log: &mut SimLog) -> Result<Result<(), PlantError>, PlantError> {
    let (substeps, hold) = sc.rates.validate()?;
    if !(sc.duration >= 0.0) || !sc.duration.is_finite() {
        return Err(PlantError::InvalidParameter(format!(
            "duration must be non-negative, got {}",
            sc.duration
        )));
    }
    if !(sc.force_noise >= 0.0) {
        return Err(PlantError::InvalidParameter("force noise must be non-negative".into()));
    }
    let period = sc.rates.control_period();
    let h = period / substeps as f64;
    let ticks = (sc.duration * sc.rates.control_hz).round() as usize;

    let mut plant = LseaPlant::new(sc.plant.clone())?;
    let scale = sc.plant.force_scale;
    let pendulum = sc.pendulum;
    if let Some(p) = &pendulum {
        p.params.validate()?;
    }
    let mut load: Vec<f64> = match pendulum {
        Some(p) => vec![p.theta0, 0.0],
        None => Vec::new(),
    };

    let c = &sc.controller;
    let mut force_ctl = build_force_controller(&c.pid, &c.dob, c.k_ff, period)?.with_force_scale(scale)?;
    let mut observer = DisturbanceObserver::new(&c.dob, period)?;
    let map = match (&sc.excitation, pendulum) {
        (Excitation::JointChirp { .. }, Some(p)) => {
            let m = PendulumMap::new(p.params.l2)?;
            Some(if p.trig { m.with_trig() } else { m })
        }
        (Excitation::JointChirp { .. }, None) => {
            return Err(PlantError::InvalidParameter("joint chirp needs a pendulum".into()));
        }
        _ => None,
    };
    if let Excitation::CurrentChirp { chirp, .. } | Excitation::JointChirp { chirp } = &sc.excitation {
        chirp.validate()?;
    }

    let noise = Normal::new(0.0, sc.force_noise).expect("non-negative deviation");
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);

    let mut reference = (0.0, 0.0, 0.0); // q_d, qdot_d, tau_ff
    let coupled = |x: &[f64]| -> f64 {
        match pendulum {
            Some(p) if p.trig => p.params.l2 * x[0].sin(),
            Some(p) => p.params.l2 * x[0],
            None => 0.0,
        }
    };

    let range = map.as_ref().map(|m| m.joint_range()[0]);
    for k in 0..ticks {
        let t = k as f64 * period;
        if let (Some((lo, hi)), Some(theta)) = (range, load.first()) {
            if !(lo..=hi).contains(theta) {
                return Ok(Err(PlantError::LoadDiverged { t, theta: *theta }));
            }
        }
        let x_load = coupled(&load);
        let f_true = plant.force_at(x_load) * scale;
        let f_meas = if sc.force_noise > 0.0 {
            f_true + noise.sample(&mut rng)
        } else {
            f_true
        };
        let (theta, theta_dot) = match pendulum {
            Some(_) => (load[0], load[1]),
            None => (0.0, 0.0),
        };
        let q_hat_a_m = plant.motor_position();
        let q_hat_a_j = x_load;

        let mut row = Row {
            t,
            theta,
            theta_dot,
            q_hat_a_m,
            q_hat_a_j,
            f_o: f_meas,
            ..Row::default()
        };
        // Extra current applied between ticks in continuous-hold mode.
        let mut continuous: Option<&ChirpSpec> = None;
        match &sc.excitation {
            Excitation::CurrentChirp {
                chirp,
                hold: input_hold,
                observer: with_observer,
            } => {
                let u_c = chirp.value_at(t);
                row.ref_pos = u_c;
                row.u_c = u_c;
                if *with_observer {
                    row.i_m = observer.step(u_c, f_meas / scale);
                    row.d_hat = observer.last_estimate();
                } else {
                    row.i_m = u_c;
                }
                if *input_hold == InputHold::Continuous {
                    continuous = Some(chirp);
                }
            }
            Excitation::ForceStep { force_n, start } => {
                let f_d = if t >= *start { *force_n } else { 0.0 };
                row.ref_pos = f_d;
                row.f_d = f_d;
                row.i_m = force_ctl.step(f_d, f_meas);
                let terms = force_ctl.last_terms();
                row.d_hat = terms.disturbance;
                row.u_c = terms.pid + terms.feedforward;
            }
            Excitation::JointChirp { chirp } => {
                let p = pendulum.expect("checked above");
                let map = map.as_ref().expect("checked above");
                if k % hold == 0 {
                    let (q, qd, qdd) = (chirp.value_at(t), chirp.velocity_at(t), chirp.acceleration_at(t));
                    reference = (q, qd, p.params.feedforward_torque(q, qdd));
                }
                let (q_d, qdot_d, tau_ff) = reference;
                let q_meas = DVector::from_element(1, theta);
                let mapped = actuator_setpoints(
                    map,
                    &DVector::from_element(1, q_d),
                    &DVector::from_element(1, qdot_d),
                    &q_meas,
                )
                .and_then(|sp| Ok((sp, ff_force(map, &q_meas, &DVector::from_element(1, tau_ff))?[0])));
                let ((qa, qda), f_ff) = match mapped {
                    Ok(v) => v,
                    Err(e) => return Ok(Err(e.into())),
                };
                let qdot_hat = (map.jacobian(&q_meas) * DVector::from_element(1, theta_dot))[0];
                let f_d = impedance_step(&c.impedance, qa[0], qda[0], q_hat_a_j, qdot_hat, f_ff);
                row.ref_pos = q_d;
                row.q_bar_a_d = qa[0];
                row.qdot_bar_a_d = qda[0];
                row.f_d = f_d;
                row.i_m = force_ctl.step(f_d, f_meas);
                let terms = force_ctl.last_terms();
                row.d_hat = terms.disturbance;
                row.u_c = terms.pid + terms.feedforward;
            }
        }
        if force_ctl.fault() || !row.is_finite() {
            return Ok(Err(PlantError::NumericFault { t }));
        }
        row.push(log);

        for j in 0..substeps {
            let i_cmd = match continuous {
                Some(ch) => row.i_m + ch.value_at(t + (j as f64 + 0.5) * h) - row.u_c,
                None => row.i_m,
            };
            match pendulum {
                Some(p) => {
                    let mut l = [load[0], load[1]];
                    let pp = p.params;
                    let trig = p.trig;
                    plant.advance(
                        i_cmd,
                        h,
                        &mut l,
                        |x| if trig { pp.l2 * x[0].sin() } else { pp.l2 * x[0] },
                        |x, f| {
                            let arm = if trig { pp.l2 * x[0].cos() } else { pp.l2 };
                            [x[1], pp.acceleration(x[0], x[1], arm * f * scale)]
                        },
                    );
                    load[0] = l[0];
                    load[1] = l[1];
                }
                None => {
                    plant.step(i_cmd, h);
                }
            }
        }
        if plant.state().iter().chain(&load).any(|v| !v.is_finite()) {
            return Ok(Err(PlantError::NumericFault { t: t + period }));
        }
    }
    Ok(Ok(()))
}

#[derive(Default)]
struct Row {
    t: f64,
    ref_pos: f64,
    q_bar_a_d: f64,
    qdot_bar_a_d: f64,
    f_d: f64,
    f_o: f64,
    i_m: f64,
    d_hat: f64,
    theta: f64,
    theta_dot: f64,
    q_hat_a_m: f64,
    q_hat_a_j: f64,
    u_c: f64,
}

impl Row {
    fn is_finite(&self) -> bool {
        [
            self.ref_pos,
            self.q_bar_a_d,
            self.qdot_bar_a_d,
            self.f_d,
            self.f_o,
            self.i_m,
            self.d_hat,
            self.theta,
            self.theta_dot,
            self.q_hat_a_m,
            self.q_hat_a_j,
            self.u_c,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    fn push(&self, log: &mut SimLog) {
        log.t.push(self.t);
        log.ref_pos.push(self.ref_pos);
        log.q_bar_a_d.push(self.q_bar_a_d);
        log.qdot_bar_a_d.push(self.qdot_bar_a_d);
        log.f_d.push(self.f_d);
        log.f_o.push(self.f_o);
        log.i_m.push(self.i_m);
        log.d_hat.push(self.d_hat);
        log.theta.push(self.theta);
        log.theta_dot.push(self.theta_dot);
        log.q_hat_a_m.push(self.q_hat_a_m);
        log.q_hat_a_j.push(self.q_hat_a_j);
        log.u_c.push(self.u_c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::nominal_plant;
    use crate::lti::{freq_response, log_grid, max_bode_deviation};
    use crate::sysid::{empirical_frf, ChirpSpec, TimeSeries};

    fn controller(gamma: f64) -> ControllerSetup {
        ControllerSetup {
            pid: PidConfig::from_lambda_c(1.0, 20.0, 0.0, 3.5).unwrap(),
            dob: DobConfig::nominal(2.0 * std::f64::consts::PI * 25.0, gamma),
            k_ff: 3.2,
            impedance: ImpedanceConfig::new(40.0, 5.0).unwrap(),
        }
    }

    fn linear_plant() -> LseaParams {
        LseaParams {
            stiction: None,
            ..Default::default()
        }
    }

    fn step_scenario(duration: f64) -> SimScenario {
        SimScenario {
            rates: Rates::default(),
            duration,
            plant: linear_plant(),
            pendulum: None,
            controller: controller(1.0),
            excitation: Excitation::ForceStep {
                force_n: 500.0,
                start: 0.05,
            },
            force_noise: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn zero_duration_writes_header_only() {
        let log = run_scenario(&step_scenario(0.0)).unwrap();
        assert!(log.is_empty());
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), SIMLOG_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn rate_ratio_must_be_integer() {
        let mut sc = step_scenario(0.1);
        sc.rates.plant_hz = 15_500.0;
        assert!(matches!(run_scenario(&sc), Err(PlantError::InvalidRates(_))));
        sc.rates = Rates {
            reference_hz: 300.0,
            ..Rates::default()
        };
        assert!(matches!(run_scenario(&sc), Err(PlantError::InvalidRates(_))));
    }

    #[test]
    fn identical_scenarios_are_bit_identical() {
        let mut sc = step_scenario(0.3);
        sc.force_noise = 2.0;
        sc.seed = 11;
        sc.plant = LseaParams::default();
        let a = run_scenario(&sc).unwrap();
        let b = run_scenario(&sc).unwrap();
        assert_eq!(a, b);
        sc.seed = 12;
        assert_ne!(a.f_o, run_scenario(&sc).unwrap().f_o);
    }

    #[test]
    fn force_step_settles_on_target() {
        let log = run_scenario(&step_scenario(1.5)).unwrap();
        assert!(log.t.windows(2).all(|w| w[1] > w[0]));
        let last = *log.f_o.last().unwrap();
        assert!((last - 500.0).abs() < 5.0, "{last}");
    }

    #[test]
    fn joint_chirp_needs_pendulum() {
        let mut sc = step_scenario(0.1);
        sc.excitation = Excitation::JointChirp {
            chirp: ChirpSpec::linear(0.1, 2.75, 1.0, 0.001).unwrap(),
        };
        assert!(matches!(run_scenario(&sc), Err(PlantError::InvalidParameter(_))));
    }

    #[test]
    fn halving_substep_converged() {
        let mut sc = step_scenario(0.5);
        sc.plant = LseaParams::default();
        sc.pendulum = Some(PendulumSetup {
            params: PendulumParams::default(),
            trig: false,
            theta0: 0.05,
        });
        let a = run_scenario(&sc).unwrap();
        sc.rates.plant_hz *= 2.0;
        let b = run_scenario(&sc).unwrap();
        let rms =
            |x: &[f64], y: &[f64]| (x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
        assert!(rms(&a.f_o, &b.f_o) / 500.0 < 1e-6, "force {}", rms(&a.f_o, &b.f_o));
        assert!(rms(&a.theta, &b.theta) < 1e-6);
        assert!(rms(&a.i_m, &b.i_m) < 1e-6);
    }

    #[test]
    fn linear_limit_matches_nominal_model() {
        let chirp = ChirpSpec::exponential(1.0, 0.1, 100.0, 120.0, 0.001).unwrap();
        let sc = SimScenario {
            plant: linear_plant(),
            excitation: Excitation::CurrentChirp {
                chirp,
                hold: InputHold::Continuous,
                observer: false,
            },
            ..step_scenario(120.0)
        };
        let log = run_scenario(&sc).unwrap();
        let u = TimeSeries::new(0.001, log.u_c.clone()).unwrap();
        let y = TimeSeries::new(0.001, log.f_o.iter().map(|f| f / 1000.0).collect()).unwrap();
        let grid = log_grid(0.2, 30.0, 10).unwrap();
        let est = empirical_frf(&u, &y, &grid).unwrap();
        let exact = freq_response(&nominal_plant(), &grid).unwrap();
        let (db, _) = max_bode_deviation(&est.valid_response(), &exact);
        assert!(db < 0.2, "{db} dB");
    }

    #[test]
    fn diverging_load_is_reported_with_partial_log() {
        let params = PendulumParams::default();
        let sc = SimScenario {
            pendulum: Some(PendulumSetup {
                params,
                trig: false,
                theta0: 0.0,
            }),
            controller: ControllerSetup {
                pid: PidConfig::from_lambda_c(15.0, 4.0, 2.5, 3.5).unwrap(),
                ..controller(0.0)
            },
            excitation: Excitation::JointChirp {
                chirp: ChirpSpec::linear(0.1, 2.75, 2.0, 0.001).unwrap(),
            },
            plant: LseaParams::default(),
            ..step_scenario(2.0)
        };
        let run = run_scenario_partial(&sc).unwrap();
        match run.fault {
            Some(PlantError::LoadDiverged { t, theta }) => {
                assert!(theta.abs() > std::f64::consts::PI);
                assert!((run.log.len() as f64 * 0.001 - t).abs() < 1e-9);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
