use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use elastic_joint::control::nominal_plant;
use elastic_joint::lti::{bilinear_discretize, log_grid, ContinuousTransferFunction, FrequencyResponse};
use elastic_joint::sysid::{empirical_frf, fit_rational, ChirpSpec, TimeSeries};

fn sampled(tf: &ContinuousTransferFunction, grid: &[f64]) -> FrequencyResponse {
    FrequencyResponse::new(grid.to_vec(), grid.iter().map(|f| tf.eval_hz(*f)).collect()).unwrap()
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1e-12))
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn refitting_a_fit_returns_it(
        gain in 0.5f64..50.0,
        f_real in 1.0f64..30.0,
        f_pair in 1.0f64..30.0,
        zeta in 0.1f64..0.9,
    ) {
        let (p, wn) = (2.0 * PI * f_real, 2.0 * PI * f_pair);
        let den = [1.0, p + 2.0 * zeta * wn, wn * wn + 2.0 * zeta * wn * p, p * wn * wn];
        let tf = ContinuousTransferFunction::from_coeffs(&[gain * p * wn * wn], &den).unwrap();
        let grid = log_grid(0.1, 100.0, 20).unwrap();
        let first = fit_rational(&sampled(&tf, &grid), 0, 3).unwrap().tf.normalized();
        let second = fit_rational(&sampled(&first, &grid), 0, 3).unwrap().tf.normalized();
        prop_assert!(relative_gap(second.num().coeffs(), first.num().coeffs()) <= 1e-6);
        prop_assert!(relative_gap(second.den().coeffs(), first.den().coeffs()) <= 1e-6);
    }

    #[test]
    fn chirp_samples_move_no_faster_than_the_sweep(
        amplitude in 0.1f64..5.0,
        omega_o in 0.5f64..20.0,
        duration in 1.0f64..10.0,
    ) {
        let period = 1e-3;
        prop_assume!(omega_o * duration / PI < 0.4 / period);
        let spec = ChirpSpec::linear(amplitude, omega_o, duration, period).unwrap();
        let x = spec.samples();
        let bound = amplitude * 2.0 * omega_o * duration * period * (1.0 + 1e-9);
        for w in x.samples().windows(2) {
            prop_assert!((w[1] - w[0]).abs() <= bound);
        }
        prop_assert!(x.samples()[0].abs() < 1e-15);
    }

    #[test]
    fn chirp_phase_steps_stay_below_pi(
        f_start in 0.05f64..10.0,
        ratio in 1.5f64..1000.0,
        duration in 1.0f64..60.0,
        rate in prop::sample::select(vec![200.0, 1000.0, 5000.0]),
    ) {
        let period = 1.0 / rate;
        let f_end = f_start * ratio;
        prop_assume!(f_end < 0.5 * rate);
        let spec = ChirpSpec::exponential(1.0, f_start, f_end, duration, period).unwrap();
        for k in 0..spec.len() {
            let t = k as f64 * period;
            let step = spec.phase_at(t + period) - spec.phase_at(t);
            prop_assert!(step > 0.0 && step < PI, "step {step} at t = {t}");
        }
    }

    #[test]
    fn chirp_derivatives_match_central_differences(
        omega_o in 0.5f64..20.0,
        t in 0.1f64..5.0,
    ) {
        let spec = ChirpSpec::linear(1.5, omega_o, 6.0, 1e-3).unwrap();
        let h = 1e-6;
        let dv = (spec.value_at(t + h) - spec.value_at(t - h)) / (2.0 * h);
        let da = (spec.velocity_at(t + h) - spec.velocity_at(t - h)) / (2.0 * h);
        prop_assert!((dv - spec.velocity_at(t)).abs() <= 1e-5 * (1.0 + dv.abs()));
        prop_assert!((da - spec.acceleration_at(t)).abs() <= 1e-4 * (1.0 + da.abs()));
    }
}

/// Drives the discretized nominal plant with an exponential chirp and adds
/// white measurement noise to the output.
fn noisy_record(duration: f64, sigma: f64, seed: u64) -> (TimeSeries, TimeSeries) {
    let period = 1e-3;
    let spec = ChirpSpec::exponential(1.0, 0.5, 60.0, duration, period).unwrap();
    let u = spec.samples();
    let mut plant = bilinear_discretize(&nominal_plant(), period).unwrap();
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = u
        .samples()
        .iter()
        .map(|x| plant.step(*x) + noise.sample(&mut rng))
        .collect();
    (u, TimeSeries::new(period, y).unwrap())
}

fn mean_frf_error(duration: f64, sigma: f64) -> f64 {
    let grid = log_grid(1.0, 30.0, 20).unwrap();
    let truth = bilinear_discretize(&nominal_plant(), 1e-3).unwrap();
    let trials = 4;
    let mut total = 0.0;
    for seed in 0..trials {
        let (u, y) = noisy_record(duration, sigma, seed);
        let frf = empirical_frf(&u, &y, &grid).unwrap();
        for (f, h) in grid.iter().zip(frf.response.values()) {
            let want = truth.eval_z(Complex64::from_polar(1.0, 2.0 * PI * f * 1e-3));
            total += (h - want).norm() / want.norm();
        }
    }
    total / (trials as usize * grid.len()) as f64
}

#[test]
fn doubling_the_record_shrinks_frf_error() {
    let short = mean_frf_error(30.0, 0.0);
    let long = mean_frf_error(60.0, 0.0);
    assert!(long < 0.6 * short, "noise-free: {long} vs {short}");
    let short = mean_frf_error(30.0, 0.002);
    let long = mean_frf_error(60.0, 0.002);
    assert!(long < short, "noisy: {long} vs {short}");
}

#[test]
fn fit_survives_one_percent_multiplicative_noise() {
    let grid = log_grid(0.5, 30.0, 20).unwrap();
    let plant = nominal_plant();
    let noise = Normal::new(0.0, 0.01).unwrap();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = grid
            .iter()
            .map(|f| plant.eval_hz(*f) * Complex64::new(1.0 + noise.sample(&mut rng), noise.sample(&mut rng)))
            .collect();
        let fit = fit_rational(&FrequencyResponse::new(grid.clone(), values).unwrap(), 0, 3).unwrap();
        assert!(fit.residual < 0.05, "seed {seed}: residual {}", fit.residual);
        assert!(fit.tf.is_stable(), "seed {seed}: poles {:?}", fit.tf.poles());
    }
}
