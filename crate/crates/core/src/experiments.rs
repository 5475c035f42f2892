//! Named experiment workflows. Each one turns a resolved
//! [`ExperimentConfig`] into CSV artifacts and a table of scalar metrics;
//! the typed building blocks are public for direct use.

use std::fs;
use std::path::Path;

use thiserror::Error;
use toml::{Table, Value};

use crate::config::{ConfigError, Experiment, ExperimentConfig, NamedTf, ObserverMode};
use crate::control::{nominal_plant, q_filter, LeakyState, PidConfig};
use crate::lti::{
    bilinear_discretize, freq_response, log_grid, max_bode_deviation, ContinuousTransferFunction, DiscreteIirFilter,
    FrequencyResponse,
};
use crate::plant::{run_scenario, run_scenario_partial, Excitation, InputHold, PlantError, SimLog, SimScenario};
use crate::sysid::{
    empirical_frf_with, fit_rational_with, read_frf_csv, write_frf_csv, ChirpSpec, EmpiricalFrf, FitOptions,
    FrfOptions, RationalFit, SysidError, TimeSeries,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{detail}")]
    Fault { t: f64, detail: String },
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<PlantError> for ExperimentError {
    fn from(e: PlantError) -> Self {
        match e {
            PlantError::NumericFault { t } => ExperimentError::Fault {
                t,
                detail: e.to_string(),
            },
            PlantError::LoadDiverged { t, .. } => ExperimentError::Fault {
                t,
                detail: e.to_string(),
            },
            PlantError::InvalidParameter(m) | PlantError::InvalidRates(m) => {
                ExperimentError::Config(ConfigError::new("<scenario>", m))
            }
            other => ExperimentError::Failed(other.to_string()),
        }
    }
}

impl From<SysidError> for ExperimentError {
    fn from(e: SysidError) -> Self {
        ExperimentError::Failed(e.to_string())
    }
}

impl From<crate::lti::LtiError> for ExperimentError {
    fn from(e: crate::lti::LtiError) -> Self {
        ExperimentError::Failed(e.to_string())
    }
}

/// Everything an experiment produces, before it touches the disk.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub summary: Table,
    /// File name inside the output directory, and its bytes.
    pub files: Vec<(String, Vec<u8>)>,
    /// Text for standard output.
    pub printout: String,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    cfg.validate()?;
    let mut out = match cfg.experiment {
        Experiment::BodeOpenLoop => bode_open_loop(cfg)?,
        Experiment::DobVerify => dob_verify(cfg)?,
        Experiment::PidStep => pid_step(cfg)?,
        Experiment::LeakyDemo => leaky_demo(cfg)?,
        Experiment::Discretize => discretize(cfg)?,
        Experiment::PendulumChirp => pendulum_chirp(cfg)?,
        Experiment::Fit => fit(cfg)?,
    };
    out.summary
        .insert("experiment".into(), Value::from(cfg.experiment.name()));
    Ok(out)
}

/// Writes the resolved config, every artifact and `summary.toml`.
pub fn write_outcome(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<(), ExperimentError> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml_string())?;
    for (name, bytes) in &outcome.files {
        fs::write(dir.join(name), bytes)?;
    }
    let summary = toml::to_string(&outcome.summary).map_err(|e| ExperimentError::Failed(e.to_string()))?;
    fs::write(dir.join("summary.toml"), summary)?;
    Ok(())
}

fn log_bytes(log: &SimLog) -> Result<Vec<u8>, ExperimentError> {
    let mut buf = Vec::new();
    log.write_csv(&mut buf)?;
    Ok(buf)
}

fn frf_bytes(frf: &EmpiricalFrf) -> Result<Vec<u8>, ExperimentError> {
    let mut buf = Vec::new();
    frf.write_csv(&mut buf)?;
    Ok(buf)
}

// Current chirps on the locked actuator.

/// Chirp used by the current-driven experiments.
pub fn current_chirp_spec(cfg: &ExperimentConfig) -> Result<ChirpSpec, ExperimentError> {
    let y = &cfg.sysid;
    Ok(ChirpSpec::exponential(
        y.amplitude,
        y.f_start,
        y.f_end,
        cfg.scenario.duration,
        cfg.rates().control_period(),
    )?)
}

/// Drives the locked actuator with the configured current chirp. `gamma`
/// wraps the input with the observer at that blend; `None` runs open loop.
pub fn current_chirp_run(cfg: &ExperimentConfig, gamma: Option<f64>) -> Result<SimLog, ExperimentError> {
    let chirp = current_chirp_spec(cfg)?;
    let sc = SimScenario {
        rates: cfg.rates(),
        duration: cfg.scenario.duration,
        plant: cfg.lsea(),
        pendulum: None,
        controller: cfg.controller(gamma.unwrap_or(0.0))?,
        excitation: Excitation::CurrentChirp {
            chirp,
            hold: InputHold::from(cfg.sysid.hold),
            observer: gamma.is_some(),
        },
        force_noise: cfg.plant.force_noise,
        seed: cfg.seed,
    };
    Ok(run_scenario(&sc)?)
}

/// Empirical response from the command ahead of the observer to the
/// measured force, in model units, on the configured grid.
pub fn chirp_frf(cfg: &ExperimentConfig, log: &SimLog) -> Result<EmpiricalFrf, ExperimentError> {
    let y = &cfg.sysid;
    let period = cfg.rates().control_period();
    let nyquist = 0.5 / period;
    let grid: Vec<f64> = log_grid(y.grid_lo_hz, y.grid_hi_hz, y.points_per_decade)?
        .into_iter()
        .filter(|f| *f < nyquist)
        .collect();
    let u = TimeSeries::new(period, log.u_c.clone())?;
    let out = TimeSeries::new(period, log.f_o.iter().map(|f| f / cfg.plant.force_scale).collect())?;
    let opts = FrfOptions {
        segments: y.segments,
        overlap: y.overlap,
        ..FrfOptions::default()
    };
    Ok(empirical_frf_with(&u, &out, &grid, &opts)?)
}

/// Largest magnitude (dB) and phase (degrees) gaps to the nominal model over
/// the valid bins inside `[lo, hi]` Hz.
pub fn deviation_from_nominal(frf: &EmpiricalFrf, lo: f64, hi: f64) -> Result<(f64, f64), ExperimentError> {
    let est = frf.valid_response().band(lo, hi);
    if est.is_empty() {
        return Err(ExperimentError::Failed(format!(
            "no valid bins between {lo} and {hi} Hz"
        )));
    }
    let model = freq_response(&nominal_plant(), est.freqs_hz())?;
    Ok(max_bode_deviation(&est, &model))
}

/// First frequency at which the magnitude falls 3 dB below the lowest
/// valid bin.
pub fn bandwidth_hz(resp: &FrequencyResponse) -> Option<f64> {
    let mag = resp.magnitude_db();
    let (first, rest) = mag.split_first()?;
    rest.iter()
        .position(|m| *m < first - 3.0)
        .map(|i| resp.freqs_hz()[i + 1])
}

fn bode_open_loop(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let log = current_chirp_run(cfg, None)?;
    let frf = chirp_frf(cfg, &log)?;
    let (db, deg) = deviation_from_nominal(&frf, cfg.sysid.grid_lo_hz, cfg.sysid.compare_hi_hz)?;
    let valid = frf.valid_response();
    let mut s = Table::new();
    s.insert("amplitude_a".into(), cfg.sysid.amplitude.into());
    s.insert("valid_bins".into(), (valid.len() as i64).into());
    s.insert("max_deviation_db".into(), db.into());
    s.insert("max_deviation_deg".into(), deg.into());
    s.insert("compare_hi_hz".into(), cfg.sysid.compare_hi_hz.into());
    s.insert("bandwidth_hz".into(), bandwidth_hz(&valid).unwrap_or(f64::NAN).into());
    s.insert("min_coherence".into(), min_valid(&frf.coherence, &frf.valid).into());
    Ok(Outcome {
        summary: s,
        files: vec![
            ("log.csv".into(), log_bytes(&log)?),
            ("frf.csv".into(), frf_bytes(&frf)?),
        ],
        printout: format!("max deviation from nominal: {db:.3} dB, {deg:.2} deg"),
    })
}

fn min_valid(values: &[f64], valid: &[bool]) -> f64 {
    values
        .iter()
        .zip(valid)
        .filter(|(_, ok)| **ok)
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min)
}

fn dob_verify(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut out = Outcome::default();
    let mut lines = Vec::new();
    for (label, gamma) in [("observer_on", cfg.control.gamma), ("observer_off", 0.0)] {
        let log = current_chirp_run(cfg, Some(gamma))?;
        let frf = chirp_frf(cfg, &log)?;
        let (db, deg) = deviation_from_nominal(&frf, cfg.sysid.grid_lo_hz, cfg.sysid.compare_hi_hz)?;
        let mut t = Table::new();
        t.insert("gamma".into(), gamma.into());
        t.insert("max_deviation_db".into(), db.into());
        t.insert("max_deviation_deg".into(), deg.into());
        t.insert("within_2db".into(), (db <= 2.0).into());
        out.summary.insert(label.into(), t.into());
        out.files.push((format!("frf_{label}.csv"), frf_bytes(&frf)?));
        out.files.push((format!("log_{label}.csv"), log_bytes(&log)?));
        lines.push(format!("{label} (gamma {gamma}): max deviation {db:.3} dB"));
    }
    out.summary.insert(
        "perturbation".into(),
        Value::try_from(cfg.plant.den_scale.to_vec()).expect("floats"),
    );
    out.printout = lines.join("\n");
    Ok(out)
}

// Force steps.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    pub final_n: f64,
    pub peak_n: f64,
    pub overshoot_pct: f64,
    /// 10 % to 90 % of the target, s.
    pub rise_time: f64,
    /// Last entry into the 2 % band, measured from the step, s.
    pub settling_time: f64,
    /// Peak-to-peak force over the last tenth of the run, N.
    pub residual_ripple_n: f64,
    pub peak_current_a: f64,
}

pub fn step_metrics(log: &SimLog, target: f64, start: f64) -> StepMetrics {
    let after: Vec<(f64, f64)> = log
        .t
        .iter()
        .zip(&log.f_o)
        .filter(|(t, _)| **t >= start)
        .map(|(t, f)| (*t, *f))
        .collect();
    let cross = |level: f64| after.iter().find(|(_, f)| *f >= level * target).map(|(t, _)| *t);
    let rise_time = match (cross(0.1), cross(0.9)) {
        (Some(a), Some(b)) => b - a,
        _ => f64::NAN,
    };
    let band = 0.02 * target.abs();
    let settling_time = match after.iter().rposition(|(_, f)| (f - target).abs() > band) {
        None => 0.0,
        Some(i) if i + 1 < after.len() => after[i + 1].0 - start,
        Some(_) => f64::NAN,
    };
    let peak_n = after.iter().map(|(_, f)| *f).fold(f64::NEG_INFINITY, f64::max);
    let tail = &log.f_o[log.len() - (log.len() / 10).max(1)..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    StepMetrics {
        final_n: *log.f_o.last().unwrap_or(&f64::NAN),
        peak_n,
        overshoot_pct: 100.0 * (peak_n - target) / target,
        rise_time,
        settling_time,
        residual_ripple_n: hi - lo,
        peak_current_a: log.i_m.iter().map(|v| v.abs()).fold(0.0, f64::max),
    }
}

/// A desired-force step through the full controller on the locked actuator,
/// with the derivative gain replaced by `k_d`.
pub fn force_step_run(cfg: &ExperimentConfig, k_d: f64) -> Result<SimLog, ExperimentError> {
    let mut controller = cfg.controller(cfg.control.gamma)?;
    controller.pid = PidConfig::from_lambda_c(cfg.control.k_p, cfg.control.k_i, k_d, cfg.control.lambda_c)
        .map_err(|e| ConfigError::new("scenario.kd_sweep", e.to_string()))?;
    let sc = SimScenario {
        rates: cfg.rates(),
        duration: cfg.scenario.duration,
        plant: cfg.lsea(),
        pendulum: None,
        controller,
        excitation: Excitation::ForceStep {
            force_n: cfg.scenario.step_force,
            start: cfg.scenario.step_start,
        },
        force_noise: cfg.plant.force_noise,
        seed: cfg.seed,
    };
    Ok(run_scenario(&sc)?)
}

fn pid_step(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut out = Outcome::default();
    let mut runs = Vec::new();
    let target = cfg.scenario.step_force;
    for (i, &kd) in cfg.scenario.kd_sweep.iter().enumerate() {
        let log = force_step_run(cfg, kd)?;
        let m = step_metrics(&log, target, cfg.scenario.step_start);
        let mut t = Table::new();
        t.insert("k_d".into(), kd.into());
        t.insert("final_n".into(), m.final_n.into());
        t.insert("peak_n".into(), m.peak_n.into());
        t.insert("overshoot_pct".into(), m.overshoot_pct.into());
        t.insert("rise_time_s".into(), m.rise_time.into());
        t.insert("settling_time_s".into(), m.settling_time.into());
        t.insert("residual_ripple_n".into(), m.residual_ripple_n.into());
        t.insert("peak_current_a".into(), m.peak_current_a.into());
        runs.push(Value::Table(t));
        out.files.push((format!("step_{i}.csv"), log_bytes(&log)?));
        out.printout.push_str(&format!(
            "k_d {kd}: overshoot {:.1} %, settling {:.3} s, final {:.1} N\n",
            m.overshoot_pct, m.settling_time, m.final_n
        ));
    }
    out.summary.insert("target_n".into(), target.into());
    out.summary.insert("gamma".into(), cfg.control.gamma.into());
    out.summary.insert("runs".into(), Value::Array(runs));
    Ok(out)
}

// Leaky integration.

#[derive(Debug, Clone, PartialEq)]
pub struct LeakyCase {
    pub alpha_v: f64,
    pub alpha_p: f64,
    /// `(q_bar_d, qdot_bar_d)` after each step.
    pub trace: Vec<(f64, f64)>,
}

/// Unit acceleration for `input_steps` steps, then zero, under the three
/// standard leak settings: none, full position leak, and 0.75 on both.
pub fn leaky_cases(cfg: &ExperimentConfig) -> Result<Vec<LeakyCase>, ExperimentError> {
    let l = &cfg.leaky;
    [(0.0, 0.0), (0.0, 1.0), (0.75, 0.75)]
        .into_iter()
        .map(|(alpha_v, alpha_p)| {
            let mut st =
                LeakyState::new(alpha_v, alpha_p, l.dt, 0.0).map_err(|e| ConfigError::new("leaky", e.to_string()))?;
            let trace = (0..l.steps)
                .map(|k| st.step(if k < l.input_steps { 1.0 } else { 0.0 }, l.measurement))
                .collect();
            Ok(LeakyCase {
                alpha_v,
                alpha_p,
                trace,
            })
        })
        .collect()
}

fn leaky_demo(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let cases = leaky_cases(cfg)?;
    let l = &cfg.leaky;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string(), "qddot_d".to_string()];
    for c in &cases {
        header.push(format!("q_av{}_ap{}", c.alpha_v, c.alpha_p));
        header.push(format!("qdot_av{}_ap{}", c.alpha_v, c.alpha_p));
    }
    w.write_record(&header).map_err(PlantError::from)?;
    for k in 0..l.steps {
        let mut row = vec![
            (k + 1).to_string(),
            format!("{}", if k < l.input_steps { 1.0 } else { 0.0 }),
        ];
        for c in &cases {
            row.push(format!("{:.8e}", c.trace[k].0));
            row.push(format!("{:.8e}", c.trace[k].1));
        }
        w.write_record(&row).map_err(PlantError::from)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Failed(e.to_string()))?;

    let mut out = Outcome::default();
    for c in &cases {
        let mut t = Table::new();
        let at_input_end = c.trace.get(l.input_steps.saturating_sub(1)).map_or(f64::NAN, |p| p.1);
        t.insert("alpha_v".into(), c.alpha_v.into());
        t.insert("alpha_p".into(), c.alpha_p.into());
        t.insert("velocity_at_input_end".into(), at_input_end.into());
        t.insert("final_velocity".into(), c.trace.last().map_or(f64::NAN, |p| p.1).into());
        t.insert("final_position".into(), c.trace.last().map_or(f64::NAN, |p| p.0).into());
        let settle = c
            .trace
            .iter()
            .enumerate()
            .skip(l.input_steps)
            .find(|(_, p)| p.1.abs() < 1e-4);
        t.insert(
            "steps_to_velocity_below_1e-4".into(),
            settle.map_or(-1, |(k, _)| (k + 1 - l.input_steps) as i64).into(),
        );
        out.summary
            .insert(format!("alpha_v_{}_alpha_p_{}", c.alpha_v, c.alpha_p), t.into());
    }
    out.files.push(("leaky.csv".into(), bytes));
    Ok(out)
}

// Discretization.

/// The continuous transfer function behind a name.
pub fn named_transfer_function(
    cfg: &ExperimentConfig,
    which: NamedTf,
) -> Result<ContinuousTransferFunction, ExperimentError> {
    let omega_c = cfg.omega_c();
    let c = &cfg.control;
    let q = q_filter(omega_c).map_err(|e| ConfigError::new("control.cutoff_hz", e.to_string()))?;
    Ok(match which {
        NamedTf::Pn => nominal_plant(),
        NamedTf::Qd => q,
        NamedTf::Qinv => q.divide(&nominal_plant())?,
        NamedTf::Pid => PidConfig::from_lambda_c(c.k_p, c.k_i, c.k_d, c.lambda_c)
            .map_err(|e| ConfigError::new("control", e.to_string()))?
            .transfer_function(),
    })
}

/// Continuous and discrete responses on a log grid up to `compare_hi_hz`
/// (or just below Nyquist).
pub fn discretization_comparison(
    tf: &ContinuousTransferFunction,
    rate_hz: f64,
    compare_hi_hz: f64,
) -> Result<(DiscreteIirFilter, FrequencyResponse, FrequencyResponse), ExperimentError> {
    let filt = bilinear_discretize(tf, 1.0 / rate_hz)?;
    let hi = compare_hi_hz.min(0.49 * rate_hz);
    let grid = log_grid(0.1, hi, 50)?;
    Ok((filt.clone(), freq_response(tf, &grid)?, freq_response(&filt, &grid)?))
}

fn discretize(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let which = cfg.lti.tf;
    let tf = named_transfer_function(cfg, which)?;
    let (filt, cont, disc) = discretization_comparison(&tf, cfg.lti.rate_hz, cfg.lti.compare_hi_hz)?;
    let (db, deg) = max_bode_deviation(&disc, &cont);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["f_hz", "cont_mag_db", "cont_phase_deg", "disc_mag_db", "disc_phase_deg"])
        .map_err(PlantError::from)?;
    let (cm, cp, dm, dp) = (
        cont.magnitude_db(),
        cont.phase_deg(),
        disc.magnitude_db(),
        disc.phase_deg(),
    );
    for (k, f) in cont.freqs_hz().iter().enumerate() {
        w.write_record([f, &cm[k], &cp[k], &dm[k], &dp[k]].map(|v| format!("{v:.8e}")))
            .map_err(PlantError::from)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Failed(e.to_string()))?;

    let floats = |v: &[f64]| Value::try_from(v.to_vec()).expect("floats");
    let mut s = Table::new();
    s.insert("tf".into(), Value::try_from(which).expect("name"));
    s.insert("rate_hz".into(), cfg.lti.rate_hz.into());
    s.insert("a_hat".into(), floats(filt.a_hat()));
    s.insert("b_hat".into(), floats(filt.b_hat()));
    s.insert("dc_gain_discrete".into(), filt.dc_gain().into());
    s.insert("dc_gain_continuous".into(), tf.dc_gain().into());
    s.insert("max_deviation_db".into(), db.into());
    s.insert("max_deviation_deg".into(), deg.into());
    s.insert(
        "compare_hi_hz".into(),
        cont.freqs_hz().last().copied().unwrap_or(f64::NAN).into(),
    );
    s.insert("stable".into(), filt.is_stable().into());

    let fmt = |v: &[f64]| v.iter().map(|c| format!("{c:.12e}")).collect::<Vec<_>>().join(", ");
    let dc = if tf.dc_gain().is_finite() {
        format!("{:.6}", filt.dc_gain())
    } else {
        "inf (pole at z = 1)".into()
    };
    let printout = format!(
        "y0 = sum(b_hat[i] y_i) + sum(a_hat[i] x_i)\na_hat = [{}]\nb_hat = [{}]\nH(z = 1) = {dc}",
        fmt(filt.a_hat()),
        fmt(filt.b_hat()),
    );
    Ok(Outcome {
        summary: s,
        files: vec![("bode.csv".into(), bytes)],
        printout,
    })
}

// Pendulum tracking.

#[derive(Debug, Clone)]
pub struct TrackingRun {
    pub gamma: f64,
    pub log: SimLog,
    /// Time at which the pendulum left the map's range, if it did.
    pub diverged_at: Option<f64>,
    /// RMS of desired minus joint-side actuator position over the band, m.
    /// Infinite when the run diverged before the band ended.
    pub band_rms: f64,
}

pub fn joint_chirp_spec(cfg: &ExperimentConfig) -> Result<ChirpSpec, ExperimentError> {
    Ok(ChirpSpec::linear(
        cfg.sysid.amplitude,
        cfg.sysid.omega_o,
        cfg.scenario.duration,
        cfg.rates().control_period(),
    )?)
}

/// Joint chirp on the pendulum with the observer at blend `gamma`.
pub fn pendulum_tracking(cfg: &ExperimentConfig, gamma: f64) -> Result<TrackingRun, ExperimentError> {
    let chirp = joint_chirp_spec(cfg)?;
    let sc = SimScenario {
        rates: cfg.rates(),
        duration: cfg.scenario.duration,
        plant: cfg.lsea(),
        pendulum: Some(cfg.pendulum_setup()),
        controller: cfg.controller(gamma)?,
        excitation: Excitation::JointChirp { chirp },
        force_noise: cfg.plant.force_noise,
        seed: cfg.seed,
    };
    let run = run_scenario_partial(&sc)?;
    let diverged_at = match run.fault {
        None => None,
        Some(PlantError::LoadDiverged { t, .. }) => Some(t),
        Some(e) => return Err(e.into()),
    };
    let (lo, hi) = (cfg.scenario.band_lo_hz, cfg.scenario.band_hi_hz);
    let band_end = chirp.crossing_time(hi).unwrap_or(f64::INFINITY);
    let band_rms = if diverged_at.is_some_and(|t| t <= band_end) {
        f64::INFINITY
    } else {
        let errs: Vec<f64> = run
            .log
            .t
            .iter()
            .enumerate()
            .filter(|(_, t)| (lo..=hi).contains(&chirp.instantaneous_frequency_hz(**t)))
            .map(|(k, _)| run.log.q_bar_a_d[k] - run.log.q_hat_a_j[k])
            .collect();
        if errs.is_empty() {
            return Err(ExperimentError::Failed(format!(
                "chirp never enters the {lo}-{hi} Hz band"
            )));
        }
        (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt()
    };
    Ok(TrackingRun {
        gamma,
        log: run.log,
        diverged_at,
        band_rms,
    })
}

fn pendulum_chirp(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mode = cfg.control.observer;
    let mut runs = Vec::new();
    if matches!(mode, ObserverMode::On | ObserverMode::Both) {
        runs.push(("observer_on", pendulum_tracking(cfg, cfg.control.gamma)?));
    }
    if matches!(mode, ObserverMode::Off | ObserverMode::Both) {
        runs.push(("observer_off", pendulum_tracking(cfg, 0.0)?));
    }
    let mut out = Outcome::default();
    out.summary.insert("band_lo_hz".into(), cfg.scenario.band_lo_hz.into());
    out.summary.insert("band_hi_hz".into(), cfg.scenario.band_hi_hz.into());
    out.summary.insert(
        "natural_frequency_hz".into(),
        cfg.pendulum_setup().params.natural_frequency_hz().into(),
    );
    for (label, run) in &runs {
        let mut t = Table::new();
        t.insert("gamma".into(), run.gamma.into());
        t.insert("band_rms_error_m".into(), run.band_rms.into());
        t.insert("diverged".into(), run.diverged_at.is_some().into());
        if let Some(td) = run.diverged_at {
            t.insert("diverged_at_s".into(), td.into());
        }
        out.summary.insert((*label).into(), t.into());
        out.files.push((format!("log_{label}.csv"), log_bytes(&run.log)?));
        out.printout.push_str(&match run.diverged_at {
            Some(td) => format!("{label}: diverged at t = {td:.3} s\n"),
            None => format!("{label}: band RMS error {:.3} mm\n", 1e3 * run.band_rms),
        });
    }
    if let [(_, on), (_, off)] = runs.as_slice() {
        let ratio = on.band_rms / off.band_rms;
        out.summary.insert("rms_ratio_on_over_off".into(), ratio.into());
        out.printout.push_str(&format!("on/off RMS ratio {ratio:.3}\n"));
    }
    Ok(out)
}

// Fitting.

/// Reads an FRF CSV and fits the configured orders.
pub fn fit_frf_file(cfg: &ExperimentConfig, path: &Path) -> Result<(FrequencyResponse, RationalFit), ExperimentError> {
    let file = fs::File::open(path)
        .map_err(|e| ConfigError::new("sysid.frf_path", format!("cannot open {}: {e}", path.display())))?;
    let (resp, _) = read_frf_csv(file)?;
    let opts = FitOptions {
        sk_iterations: cfg.sysid.sk_iterations,
        ..FitOptions::default()
    };
    let fit = fit_rational_with(&resp, cfg.sysid.num_order, cfg.sysid.den_order, &opts)?;
    Ok((resp, fit))
}

fn fit(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let (resp, fit) = fit_frf_file(cfg, Path::new(&cfg.sysid.frf_path))?;
    let fitted = freq_response(&fit.tf, resp.freqs_hz())?;
    let mut buf = Vec::new();
    write_frf_csv(&mut buf, &fitted, None)?;

    let norm = fit.tf.normalized();
    let floats = |v: &[f64]| Value::try_from(v.to_vec()).expect("floats");
    let stable = fit.tf.poles().iter().all(|p| p.re < 0.0);
    let mut s = Table::new();
    s.insert("num".into(), floats(norm.num().coeffs()));
    s.insert("den".into(), floats(norm.den().coeffs()));
    s.insert("dc_gain".into(), fit.tf.dc_gain().into());
    s.insert("residual".into(), fit.residual.into());
    s.insert("condition".into(), fit.condition.into());
    s.insert("bins".into(), (fit.bins as i64).into());
    s.insert("stable".into(), stable.into());
    let printout = format!(
        "num = {:?}\nden = {:?}\nresidual {:.3e}",
        norm.num().coeffs(),
        norm.den().coeffs(),
        fit.residual
    );
    Ok(Outcome {
        summary: s,
        files: vec![("fit.csv".into(), buf)],
        printout,
    })
}
