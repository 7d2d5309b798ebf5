use num_complex::Complex;
use proptest::prelude::*;
use slowsfg::analysis::{compare, spectrum};
use slowsfg::dispersion::sinc;
use slowsfg::numerical::{plan_grid, propagate, SolverConfig};
use slowsfg::{synthesize_gaussian, Chirp, ComplexEnvelope, Envelope64, GaussianPulseSpec, MediumSpec, TimeGrid};

fn small_medium(gamma: f64) -> MediumSpec {
    MediumSpec::new(5.0, 7.5, 7.5, 10.0, gamma)
}

fn input(medium: &MediumSpec, pulse: &GaussianPulseSpec, config: &SolverConfig) -> Envelope64 {
    let grid = plan_grid(medium, pulse, config).unwrap();
    synthesize_gaussian(pulse, &grid, 0.0, 0.0, 0.0).unwrap()
}

fn max_abs_diff(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gaussian_energy_is_one_at_every_distance(
        duration in 0.5f64..3.0,
        z in 0.0f64..40.0,
        beta2 in -0.05f64..0.05,
    ) {
        let spec = GaussianPulseSpec::new(duration, 0.0);
        let dt = duration / 20.0;
        let grid = TimeGrid::new(-150.0, dt, (300.0 / dt) as usize).unwrap();
        let env = synthesize_gaussian(&spec, &grid, z, 0.0, beta2).unwrap();
        prop_assert!((env.energy() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn chirp_leaves_modulus_unchanged(rate in -2.0f64..2.0, center in -5.0f64..5.0) {
        let grid = TimeGrid::new(-20.0, 0.02, 2000).unwrap();
        let plain = GaussianPulseSpec::new(1.0, center);
        let chirped = plain.clone().with_chirp(Chirp::quadratic(rate));
        let a = synthesize_gaussian(&plain, &grid, 0.0, 0.0, 0.0).unwrap();
        let b = synthesize_gaussian(&chirped, &grid, 0.0, 0.0, 0.0).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn sinc_is_even_and_bounded(x in -1e3f64..1e3) {
        prop_assert_eq!(sinc(x), sinc(-x));
        prop_assert!(sinc(x).abs() <= 1.0);
    }

    #[test]
    fn spectrum_energy_matches_time_domain(duration in 0.5f64..2.0, scale in 0.1f64..3.0) {
        let grid = TimeGrid::new(0.0, 0.05, 2048).unwrap();
        let env = synthesize_gaussian(&GaussianPulseSpec::new(duration, 50.0), &grid, 0.0, 0.0, 0.0)
            .unwrap()
            .scaled(Complex::new(scale, 0.0));
        let s = spectrum(&env).unwrap();
        prop_assert!((s.raw_energy - env.energy()).abs() < 1e-6 * env.energy());
        prop_assert!((s.area() - 1.0).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn combined_energy_is_conserved(gamma in 0.0f64..3.0, beta_s in 6.5f64..8.5) {
        let m = MediumSpec { beta_s, ..small_medium(gamma) };
        let pulse = GaussianPulseSpec::new(1.0, 20.0);
        let cfg = SolverConfig::default();
        let s = input(&m, &pulse, &cfg);
        let out = propagate(&m, &pulse, &s, &cfg).unwrap();
        let d = out.diagnostics;
        prop_assert!(d.manley_rowe_drift < 1e-6);
        prop_assert!(((d.energy_out - d.energy_in) / d.energy_in).abs() < 1e-6);
        prop_assert!(out.sfg_out.energy() <= 1.0 + 1e-4);
    }

    #[test]
    fn outputs_are_linear_in_the_signal(gamma in 0.1f64..2.0, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let m = small_medium(gamma);
        let pulse = GaussianPulseSpec::new(1.0, 20.0);
        let cfg = SolverConfig::default();
        let s = input(&m, &pulse, &cfg);
        let c = Complex::new(re, im);
        let base = propagate(&m, &pulse, &s, &cfg).unwrap();
        let scaled = propagate(&m, &pulse, &s.scaled(c), &cfg).unwrap();
        let expected = base.sfg_out.scaled(c);
        prop_assert!(max_abs_diff(scaled.sfg_out.samples(), expected.samples()) < 1e-12 * (1.0 + c.norm()));
        let expected = base.signal_out.scaled(c);
        prop_assert!(max_abs_diff(scaled.signal_out.samples(), expected.samples()) < 1e-12 * (1.0 + c.norm()));
    }

    #[test]
    fn shifting_inputs_shifts_outputs(gamma in 0.1f64..2.0, shift in 1usize..200) {
        let m = small_medium(gamma);
        let cfg = SolverConfig::default();
        let early = GaussianPulseSpec::new(1.0, 20.0);
        let grid = plan_grid(&m, &early, &cfg).unwrap();
        let late = GaussianPulseSpec::new(1.0, 20.0 + shift as f64 * grid.dt());
        let a = propagate(&m, &early, &synthesize_gaussian(&early, &grid, 0.0, 0.0, 0.0).unwrap(), &cfg).unwrap();
        let b = propagate(&m, &late, &synthesize_gaussian(&late, &grid, 0.0, 0.0, 0.0).unwrap(), &cfg).unwrap();
        let (ra, rb) = (a.sfg_out.samples(), b.sfg_out.samples());
        let n = ra.len() - shift;
        prop_assert!(max_abs_diff(&ra[..n], &rb[shift..]) < 1e-10);
    }

    #[test]
    fn opposite_chirps_cancel_in_the_sfg_modulus(gamma in 0.2f64..2.0, rate in -1.0f64..1.0) {
        // Signal travelling with the pump.
        let m = small_medium(gamma);
        let cfg = SolverConfig::default();
        let plain = GaussianPulseSpec::new(1.0, 20.0);
        let chirp = Chirp::quadratic(rate);
        let pump = plain.clone().with_chirp(chirp.clone());
        let grid = plan_grid(&m, &plain, &cfg).unwrap();
        let s0 = synthesize_gaussian(&plain, &grid, 0.0, 0.0, 0.0).unwrap();
        let sc = synthesize_gaussian(&plain.clone().with_chirp(chirp.negated()), &grid, 0.0, 0.0, 0.0).unwrap();
        let a = propagate(&m, &plain, &s0, &cfg).unwrap();
        let b = propagate(&m, &pump, &sc, &cfg).unwrap();
        for (x, y) in a.sfg_out.samples().iter().zip(b.sfg_out.samples()) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-6);
        }
    }
}

#[test]
fn comparison_is_symmetric_in_overlap() {
    let g = TimeGrid::new(0.0, 0.05, 1024).unwrap();
    let a = synthesize_gaussian(&GaussianPulseSpec::new(1.0, 20.0), &g, 0.0, 0.0, 0.0).unwrap();
    let b: ComplexEnvelope = synthesize_gaussian(&GaussianPulseSpec::new(1.5, 21.0), &g, 0.0, 0.0, 0.0).unwrap();
    let ab = compare(&a, &b).unwrap().overlap;
    let ba = compare(&b, &a).unwrap().overlap;
    assert!((ab - ba).abs() < 1e-14 && ab < 1.0 && ab > 0.5);
}
