mod common;

use common::oracles::{displaced_coefficients, hermite_function};
use num_complex::Complex64;
use proptest::prelude::*;
use resonance_lab::basis::{decompose, eigenfunction, reconstruct, Grid};
use resonance_lab::constants::{natural_units, OscillatorUnits};
use resonance_lab::packets::{
    breathing_energy_stats, coherent_density, coherent_energy_stats, displaced_gaussian,
    squeezed_gaussian, stats_of_coeffs, BreathingPacketParams, CoherentPacketParams,
};

#[test]
fn eigenfunctions_match_hermite_polynomials() {
    for units in [
        natural_units(),
        OscillatorUnits::new(2.0, 0.5, 1.0).unwrap(),
    ] {
        let alpha = units.alpha();
        for n in 0..=40 {
            for i in 0..=200 {
                let x = -12.0 / alpha + i as f64 * 0.12 / alpha;
                let got = eigenfunction(n, &units, x).unwrap();
                let want = hermite_function(n, alpha, x);
                assert!(
                    (got - want).abs() < 1e-11 * (1.0 + want.abs()),
                    "n={n} x={x}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn displaced_ground_state_has_poisson_weights() {
    let u = natural_units();
    for a in [0.5, 1.0, 2.0] {
        let p = CoherentPacketParams::new(a, u).unwrap();
        let psi = displaced_gaussian(&p, p.default_grid()).unwrap();
        let state = decompose(&psi, &u, 60).unwrap();
        let want = displaced_coefficients(1.0, a, 60);
        for (n, (c, w)) in state.coeffs().iter().zip(&want).enumerate() {
            assert!(
                (c - Complex64::new(*w, 0.0)).norm() < 1e-10,
                "a={a} n={n}: {c} vs {w}"
            );
        }
    }
}

#[test]
fn spectral_reconstruction_reproduces_coherent_density() {
    let u = natural_units();
    let p = CoherentPacketParams::new(1.0, u).unwrap();
    let grid = p.default_grid();
    let state = decompose(&displaced_gaussian(&p, grid).unwrap(), &u, 60).unwrap();
    for k in 0..8 {
        let t = 0.37 * k as f64;
        let psi = reconstruct(&state, t, grid).unwrap();
        let worst = grid
            .points()
            .iter()
            .zip(psi.density())
            .map(|(&x, rho)| (rho - coherent_density(x, t, &p)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "t={t}: {worst}");
    }
}

#[test]
fn spectral_statistics_match_closed_forms() {
    let u = natural_units();
    for a in [0.0, 0.3, 1.0, 2.0] {
        let p = CoherentPacketParams::new(a, u).unwrap();
        let state = decompose(&displaced_gaussian(&p, p.default_grid()).unwrap(), &u, 80).unwrap();
        let got = stats_of_coeffs(&state);
        let want = coherent_energy_stats(&p);
        assert!((got.mean - want.mean).abs() < 1e-9);
        assert!((got.deviation - want.deviation).abs() < 1e-7, "a={a}");
    }
    for beta in [0.5, 0.8, 1.5] {
        let p = BreathingPacketParams::new(beta, u).unwrap();
        let state = decompose(&squeezed_gaussian(&p, p.default_grid()).unwrap(), &u, 120).unwrap();
        let got = stats_of_coeffs(&state);
        let want = breathing_energy_stats(&p);
        assert!((got.mean - want.mean).abs() < 1e-9, "beta={beta}");
        assert!((got.deviation - want.deviation).abs() < 1e-7, "beta={beta}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_conserves_weight(a in -2.0f64..2.0) {
        let u = natural_units();
        let p = CoherentPacketParams::new(a, u).unwrap();
        let state = decompose(&displaced_gaussian(&p, p.default_grid()).unwrap(), &u, 60).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eigenfunction_parity(n in 0usize..200, x in 0.0f64..8.0) {
        let u = natural_units();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let a = eigenfunction(n, &u, x).unwrap();
        let b = eigenfunction(n, &u, -x).unwrap();
        prop_assert!((a - sign * b).abs() <= 1e-14 * (1.0 + a.abs()));
    }
}

#[test]
fn grid_helpers() {
    let g = Grid::symmetric(5.0, 11).unwrap();
    assert_eq!(g.dx(), 1.0);
    assert!((g.trapezoid(&[1.0; 11]) - 10.0).abs() < 1e-15);
}
