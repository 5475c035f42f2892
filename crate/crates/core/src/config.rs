//! Experiment configuration: a TOML file whose sections mirror the crate's
//! modules. Each experiment starts from its own defaults; a user file only
//! needs the keys it changes.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{actuator_gains, DobConfig, GainSet, ImpedanceConfig, PidConfig, DEFAULT_FORCE_SCALE};
use crate::plant::{
    ControllerSetup, InputHold, LseaParams, PendulumParams, PendulumSetup, Perturbation, Rates, Stiction,
    DEFAULT_SPRING_STIFFNESS,
};

/// Rejected configuration, located by its dotted key path.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BodeOpenLoop,
    DobVerify,
    PidStep,
    LeakyDemo,
    Discretize,
    PendulumChirp,
    Fit,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::BodeOpenLoop,
        Experiment::DobVerify,
        Experiment::PidStep,
        Experiment::LeakyDemo,
        Experiment::Discretize,
        Experiment::PendulumChirp,
        Experiment::Fit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::BodeOpenLoop => "bode-open-loop",
            Experiment::DobVerify => "dob-verify",
            Experiment::PidStep => "pid-step",
            Experiment::LeakyDemo => "leaky-demo",
            Experiment::Discretize => "discretize",
            Experiment::PendulumChirp => "pendulum-chirp",
            Experiment::Fit => "fit",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

/// Which observer settings a pendulum run compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObserverMode {
    On,
    Off,
    Both,
}

impl FromStr for ObserverMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "on" => Ok(ObserverMode::On),
            "off" => Ok(ObserverMode::Off),
            "both" => Ok(ObserverMode::Both),
            _ => Err(format!("unknown observer mode `{s}` (expected on, off or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoldMode {
    Sampled,
    Continuous,
}

impl From<HoldMode> for InputHold {
    fn from(h: HoldMode) -> Self {
        match h {
            HoldMode::Sampled => InputHold::Sampled,
            HoldMode::Continuous => InputHold::Continuous,
        }
    }
}

/// Transfer functions the discretizer knows by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedTf {
    /// Nominal actuator model.
    Pn,
    /// Observer low-pass.
    Qd,
    /// Low-passed inverse model.
    Qinv,
    /// Force-loop PID.
    Pid,
}

impl FromStr for NamedTf {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pn" => Ok(NamedTf::Pn),
            "qd" => Ok(NamedTf::Qd),
            "qinv" => Ok(NamedTf::Qinv),
            "pid" => Ok(NamedTf::Pid),
            _ => Err(format!(
                "unknown transfer function `{s}` (expected pn, qd, qinv or pid)"
            )),
        }
    }
}

/// Gain row in the lower-body table layout plus the observer cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub k: f64,
    pub b: f64,
    pub k_ff: f64,
    pub k_p: f64,
    pub k_i: f64,
    pub k_d: f64,
    pub lambda_c: f64,
    pub gamma: f64,
    /// Q-filter cutoff, Hz.
    pub cutoff_hz: f64,
    pub observer: ObserverMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakySection {
    pub dt: f64,
    pub input_steps: usize,
    pub steps: usize,
    pub measurement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    /// Factors on the model denominator, highest power first.
    pub den_scale: [f64; 4],
    pub gain_scale: f64,
    pub stiction: bool,
    pub breakaway: f64,
    pub velocity_threshold: f64,
    pub backlash: f64,
    /// Extra current lag time constant, s; zero disables it.
    pub extra_lag: f64,
    pub spring_stiffness: f64,
    pub force_scale: f64,
    pub force_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumSection {
    pub m: f64,
    pub l1: f64,
    pub l2: f64,
    pub g: f64,
    pub c: f64,
    pub trig: bool,
    pub theta0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub control_hz: f64,
    pub reference_hz: f64,
    pub plant_hz: f64,
    pub duration: f64,
    pub step_force: f64,
    pub step_start: f64,
    pub kd_sweep: Vec<f64>,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SysidSection {
    pub amplitude: f64,
    pub f_start: f64,
    pub f_end: f64,
    pub omega_o: f64,
    pub hold: HoldMode,
    pub grid_lo_hz: f64,
    pub grid_hi_hz: f64,
    pub points_per_decade: usize,
    pub segments: usize,
    pub overlap: f64,
    /// Upper edge of the band the summary compares against the model.
    pub compare_hi_hz: f64,
    pub frf_path: String,
    pub num_order: usize,
    pub den_order: usize,
    pub sk_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LtiSection {
    pub tf: NamedTf,
    pub rate_hz: f64,
    pub compare_hi_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out_dir: String,
    pub control: ControlSection,
    pub leaky: LeakySection,
    pub plant: PlantSection,
    pub pendulum: PendulumSection,
    pub scenario: ScenarioSection,
    pub sysid: SysidSection,
    pub lti: LtiSection,
}

/// Gains used on the locked testbed. The table rows were tuned for the
/// robot and ring on the bare actuator.
pub const TESTBED_GAINS: GainSet = GainSet {
    k: 40.0,
    b: 5.0,
    k_ff: 3.2,
    k_p: 1.0,
    k_i: 20.0,
    k_d: 2.5,
    lambda_c: 3.5,
    gamma: 1.0,
};

impl ExperimentConfig {
    /// Resolved defaults for one experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let hip = actuator_gains("front_hip").expect("table row");
        let gains = match experiment {
            Experiment::PendulumChirp | Experiment::Discretize => hip,
            _ => TESTBED_GAINS,
        };
        let mut cfg = ExperimentConfig {
            experiment,
            seed: 0,
            out_dir: format!("out/{}", experiment.name()),
            control: ControlSection {
                k: gains.k,
                b: gains.b,
                k_ff: gains.k_ff,
                k_p: gains.k_p,
                k_i: gains.k_i,
                k_d: gains.k_d,
                lambda_c: gains.lambda_c,
                gamma: gains.gamma,
                cutoff_hz: 25.0,
                observer: ObserverMode::Both,
            },
            leaky: LeakySection {
                dt: 0.001,
                input_steps: 25,
                steps: 65,
                measurement: 0.1,
            },
            plant: PlantSection {
                den_scale: [1.0; 4],
                gain_scale: 1.0,
                stiction: true,
                breakaway: Stiction::default().breakaway,
                velocity_threshold: Stiction::default().velocity_threshold,
                backlash: 0.0,
                extra_lag: 0.0,
                spring_stiffness: DEFAULT_SPRING_STIFFNESS,
                force_scale: DEFAULT_FORCE_SCALE,
                force_noise: 0.0,
            },
            pendulum: PendulumSection {
                m: 10.0,
                l1: 0.33,
                l2: 0.07,
                g: 9.81,
                c: 0.0,
                trig: false,
                theta0: 0.0,
            },
            scenario: ScenarioSection {
                control_hz: 1000.0,
                reference_hz: 200.0,
                plant_hz: 20_000.0,
                duration: 120.0,
                step_force: 500.0,
                step_start: 0.1,
                kd_sweep: vec![0.0, 2.5, 5.0, 10.0],
                band_lo_hz: 0.5,
                band_hi_hz: 1.2,
            },
            sysid: SysidSection {
                amplitude: 1.0,
                f_start: 0.1,
                f_end: 100.0,
                omega_o: 2.75,
                hold: HoldMode::Continuous,
                grid_lo_hz: 0.1,
                grid_hi_hz: 100.0,
                points_per_decade: 20,
                segments: 8,
                overlap: 0.5,
                compare_hi_hz: 30.0,
                frf_path: "frf.csv".into(),
                num_order: 0,
                den_order: 3,
                sk_iterations: 0,
            },
            lti: LtiSection {
                tf: NamedTf::Pn,
                rate_hz: 1000.0,
                compare_hi_hz: 40.0,
            },
        };
        match experiment {
            Experiment::DobVerify => {
                cfg.plant.den_scale = [1.3; 4];
                cfg.sysid.amplitude = 1.75;
                cfg.sysid.f_start = 0.05;
                cfg.sysid.f_end = 50.0;
                cfg.sysid.hold = HoldMode::Sampled;
                cfg.sysid.grid_hi_hz = 10.0;
                cfg.sysid.compare_hi_hz = 10.0;
            }
            Experiment::PidStep => cfg.scenario.duration = 1.0,
            Experiment::PendulumChirp => {
                cfg.scenario.duration = 2.0;
                cfg.sysid.amplitude = 0.1;
            }
            _ => {}
        }
        cfg
    }

    /// Reads a TOML file over the experiment's defaults. A file that names
    /// a different experiment is rejected.
    pub fn load(experiment: Experiment, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(experiment, &text)
    }

    pub fn from_toml_str(experiment: Experiment, text: &str) -> Result<Self, ConfigError> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::new("<syntax>", e.message()))?;
        if let Some(v) = user.get("experiment") {
            if v.as_str() != Some(experiment.name()) {
                return Err(ConfigError::new(
                    "experiment",
                    format!("file is for {v}, but `{experiment}` was requested"),
                ));
            }
        }
        let mut merged = toml::Table::try_from(Self::defaults(experiment)).expect("defaults serialize");
        merge(&mut merged, user, "")?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(toml::Value::Table(merged)).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(
                if path == "." { "<root>".into() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(&self.out_dir)
    }

    /// Range checks that the types alone cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.control;
        finite("control.k", c.k, 0.0)?;
        finite("control.b", c.b, 0.0)?;
        finite("control.k_ff", c.k_ff, f64::NEG_INFINITY)?;
        finite("control.k_p", c.k_p, 0.0)?;
        finite("control.k_i", c.k_i, 0.0)?;
        finite("control.k_d", c.k_d, 0.0)?;
        positive("control.lambda_c", c.lambda_c)?;
        if !(0.0..=1.0).contains(&c.gamma) {
            return Err(ConfigError::new(
                "control.gamma",
                format!("must lie in [0, 1], got {}", c.gamma),
            ));
        }
        positive("control.cutoff_hz", c.cutoff_hz)?;

        positive("leaky.dt", self.leaky.dt)?;
        finite("leaky.measurement", self.leaky.measurement, f64::NEG_INFINITY)?;

        let p = &self.plant;
        for (i, f) in p.den_scale.iter().enumerate() {
            positive(&format!("plant.den_scale[{i}]"), *f)?;
        }
        positive("plant.gain_scale", p.gain_scale)?;
        finite("plant.breakaway", p.breakaway, 0.0)?;
        finite("plant.velocity_threshold", p.velocity_threshold, 0.0)?;
        finite("plant.backlash", p.backlash, 0.0)?;
        finite("plant.extra_lag", p.extra_lag, 0.0)?;
        positive("plant.spring_stiffness", p.spring_stiffness)?;
        positive("plant.force_scale", p.force_scale)?;
        finite("plant.force_noise", p.force_noise, 0.0)?;

        let pe = &self.pendulum;
        positive("pendulum.m", pe.m)?;
        positive("pendulum.l1", pe.l1)?;
        positive("pendulum.l2", pe.l2)?;
        finite("pendulum.g", pe.g, 0.0)?;
        finite("pendulum.c", pe.c, 0.0)?;
        finite("pendulum.theta0", pe.theta0, f64::NEG_INFINITY)?;

        let s = &self.scenario;
        positive("scenario.control_hz", s.control_hz)?;
        positive("scenario.reference_hz", s.reference_hz)?;
        positive("scenario.plant_hz", s.plant_hz)?;
        self.rates()
            .validate()
            .map_err(|e| ConfigError::new("scenario.plant_hz", e.to_string()))?;
        positive("scenario.duration", s.duration)?;
        finite("scenario.step_force", s.step_force, f64::NEG_INFINITY)?;
        finite("scenario.step_start", s.step_start, 0.0)?;
        for (i, kd) in s.kd_sweep.iter().enumerate() {
            finite(&format!("scenario.kd_sweep[{i}]"), *kd, 0.0)?;
        }
        positive("scenario.band_lo_hz", s.band_lo_hz)?;
        if !(s.band_hi_hz > s.band_lo_hz) {
            return Err(ConfigError::new("scenario.band_hi_hz", "must exceed band_lo_hz"));
        }

        let y = &self.sysid;
        positive("sysid.amplitude", y.amplitude)?;
        positive("sysid.f_start", y.f_start)?;
        if !(y.f_end > y.f_start) {
            return Err(ConfigError::new("sysid.f_end", "must exceed f_start"));
        }
        positive("sysid.omega_o", y.omega_o)?;
        positive("sysid.grid_lo_hz", y.grid_lo_hz)?;
        if !(y.grid_hi_hz > y.grid_lo_hz) {
            return Err(ConfigError::new("sysid.grid_hi_hz", "must exceed grid_lo_hz"));
        }
        if y.points_per_decade == 0 {
            return Err(ConfigError::new("sysid.points_per_decade", "must be at least 1"));
        }
        if y.segments == 0 {
            return Err(ConfigError::new("sysid.segments", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&y.overlap) {
            return Err(ConfigError::new("sysid.overlap", "must lie in [0, 1)"));
        }
        positive("sysid.compare_hi_hz", y.compare_hi_hz)?;
        if y.num_order > y.den_order {
            return Err(ConfigError::new("sysid.num_order", "must not exceed den_order"));
        }

        positive("lti.rate_hz", self.lti.rate_hz)?;
        positive("lti.compare_hi_hz", self.lti.compare_hi_hz)?;
        Ok(())
    }

    pub fn rates(&self) -> Rates {
        let s = &self.scenario;
        Rates {
            control_hz: s.control_hz,
            reference_hz: s.reference_hz,
            plant_hz: s.plant_hz,
        }
    }

    pub fn gains(&self) -> GainSet {
        let c = &self.control;
        GainSet {
            k: c.k,
            b: c.b,
            k_ff: c.k_ff,
            k_p: c.k_p,
            k_i: c.k_i,
            k_d: c.k_d,
            lambda_c: c.lambda_c,
            gamma: c.gamma,
        }
    }

    pub fn omega_c(&self) -> f64 {
        2.0 * PI * self.control.cutoff_hz
    }

    /// Controller with the configured gains and the given blend.
    pub fn controller(&self, gamma: f64) -> Result<ControllerSetup, ConfigError> {
        let c = &self.control;
        let pid = PidConfig::from_lambda_c(c.k_p, c.k_i, c.k_d, c.lambda_c)
            .map_err(|e| ConfigError::new("control", e.to_string()))?;
        let impedance = ImpedanceConfig::new(c.k, c.b).map_err(|e| ConfigError::new("control", e.to_string()))?;
        Ok(ControllerSetup {
            pid,
            dob: DobConfig::nominal(self.omega_c(), gamma),
            k_ff: c.k_ff,
            impedance,
        })
    }

    pub fn lsea(&self) -> LseaParams {
        let p = &self.plant;
        LseaParams {
            perturbation: Perturbation {
                den: p.den_scale,
                gain: p.gain_scale,
            },
            stiction: p.stiction.then_some(Stiction {
                breakaway: p.breakaway,
                velocity_threshold: p.velocity_threshold,
            }),
            backlash: p.backlash,
            extra_lag: (p.extra_lag > 0.0).then_some(p.extra_lag),
            spring_stiffness: p.spring_stiffness,
            force_scale: p.force_scale,
        }
    }

    pub fn pendulum_setup(&self) -> PendulumSetup {
        let p = &self.pendulum;
        PendulumSetup {
            params: PendulumParams {
                m: p.m,
                l1: p.l1,
                l2: p.l2,
                g: p.g,
                c: p.c,
            },
            trig: p.trig,
            theta0: p.theta0,
        }
    }
}

fn finite(path: &str, v: f64, min: f64) -> Result<(), ConfigError> {
    if !v.is_finite() || v < min {
        let bound = if min == 0.0 {
            "non-negative and finite"
        } else {
            "finite"
        };
        return Err(ConfigError::new(path, format!("must be {bound}, got {v}")));
    }
    Ok(())
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(ConfigError::new(path, format!("must be positive, got {v}")));
    }
    Ok(())
}

/// Overlays `user` onto `base`. Tables merge key by key; anything else
/// replaces. Keys absent from `base` are unknown.
fn merge(base: &mut toml::Table, user: toml::Table, prefix: &str) -> Result<(), ConfigError> {
    for (key, value) in user {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match (base.get_mut(&key), value) {
            (None, _) => return Err(ConfigError::new(path, "unknown key")),
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u, &path)?,
            (Some(toml::Value::Table(_)), _) => return Err(ConfigError::new(path, "expected a table")),
            (Some(slot), v) => *slot = v,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        for e in Experiment::ALL {
            let cfg = ExperimentConfig::defaults(e);
            cfg.validate().unwrap();
            let text = cfg.to_toml_string();
            assert_eq!(ExperimentConfig::from_toml_str(e, &text).unwrap(), cfg, "{e}");
        }
    }

    #[test]
    fn partial_file_overrides_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            Experiment::PidStep,
            "seed = 4\n[control]\nk_p = 2.0\n[plant]\nden_scale = [0.7, 0.7, 0.7, 0.7]\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.control.k_p, 2.0);
        assert_eq!(cfg.control.k_i, TESTBED_GAINS.k_i);
        assert_eq!(cfg.lsea().perturbation.den, [0.7; 4]);
    }

    #[test]
    fn pendulum_defaults_use_table_row() {
        let cfg = ExperimentConfig::defaults(Experiment::PendulumChirp);
        assert_eq!(cfg.gains(), actuator_gains("front_hip").unwrap());
    }

    #[test]
    fn unknown_key_reports_path() {
        let e = ExperimentConfig::from_toml_str(Experiment::PidStep, "[control]\nkp = 2.0\n").unwrap_err();
        assert_eq!(e.path, "control.kp");
        let e = ExperimentConfig::from_toml_str(Experiment::PidStep, "[nonsense]\n").unwrap_err();
        assert_eq!(e.path, "nonsense");
    }

    #[test]
    fn wrong_type_reports_path() {
        let e = ExperimentConfig::from_toml_str(Experiment::PidStep, "[scenario]\nduration = \"long\"\n").unwrap_err();
        assert_eq!(e.path, "scenario.duration");
        let e = ExperimentConfig::from_toml_str(Experiment::PidStep, "[sysid]\nhold = \"sometimes\"\n").unwrap_err();
        assert_eq!(e.path, "sysid.hold");
    }

    #[test]
    fn range_errors_report_path() {
        let e = ExperimentConfig::from_toml_str(Experiment::PidStep, "[control]\ngamma = 1.5\n").unwrap_err();
        assert_eq!(e.path, "control.gamma");
        let e = ExperimentConfig::from_toml_str(Experiment::PidStep, "[scenario]\nplant_hz = 15500.0\n").unwrap_err();
        assert_eq!(e.path, "scenario.plant_hz");
        let e = ExperimentConfig::from_toml_str(Experiment::PidStep, "[plant]\nden_scale = [1.0, -1.0, 1.0, 1.0]\n")
            .unwrap_err();
        assert_eq!(e.path, "plant.den_scale[1]");
    }

    #[test]
    fn experiment_mismatch_rejected() {
        let e = ExperimentConfig::from_toml_str(Experiment::PidStep, "experiment = \"fit\"\n").unwrap_err();
        assert_eq!(e.path, "experiment");
    }

    #[test]
    fn syntax_error() {
        let e = ExperimentConfig::from_toml_str(Experiment::Fit, "[control\n").unwrap_err();
        assert_eq!(e.path, "<syntax>");
    }
}
