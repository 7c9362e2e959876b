mod common;

use std::f64::consts::PI;

use common::oracles::{ladder_x, ladder_x2, second_order_by_integration, two_level_rk4, ToyLevels};
use num_complex::Complex64;
use resonance_lab::constants::natural_units;
use resonance_lab::perturbation::{
    check_raman_condition, default_probe_time, matrix_elements, measure_rabi_period, rabi_period,
    rabi_population, resonance_scan, second_order_amplitude, two_level_integrate, Coupling,
    MatrixElements, PerturbationSpec, TwoLevelDrive,
};
use resonance_lab::Error;

#[test]
fn quadrature_matrix_elements_match_ladder_algebra() {
    let u = natural_units();
    let x = PerturbationSpec::new(Coupling::Linear, 1.0, 1.0)
        .unwrap()
        .matrix_elements(&u, 30)
        .unwrap();
    let x2 = PerturbationSpec::new(Coupling::Quadratic, 1.0, 1.0)
        .unwrap()
        .matrix_elements(&u, 30)
        .unwrap();
    for n in 0..=30 {
        for m in 0..=30 {
            assert!((x.f(n, m).re - ladder_x(n, m)).abs() < 1e-10, "x {n}{m}");
            assert!((x2.f(n, m).re - ladder_x2(n, m)).abs() < 1e-9, "x2 {n}{m}");
        }
    }
}

#[test]
fn adaptive_integrator_agrees_with_fixed_step_oracle() {
    for (eta, w) in [(1e-2, 1.0), (5e-3, 1.03), (2e-2, 0.8)] {
        let t_end = 200.0;
        let traj = two_level_integrate(
            TwoLevelDrive {
                eta,
                omega_nm: 1.0,
                omega: w,
            },
            t_end,
            10,
        )
        .unwrap();
        let want = two_level_rk4(eta, 1.0, w, t_end, 200_000);
        assert!((traj.upper.last().unwrap() - want).abs() < 1e-9);
    }
}

#[test]
fn rabi_formula_in_the_weak_drive_band() {
    let eta = 1e-3;
    let t_end = 2.0 * rabi_period(eta);
    let traj = two_level_integrate(
        TwoLevelDrive {
            eta,
            omega_nm: 1.0,
            omega: 1.0,
        },
        t_end,
        20_000,
    )
    .unwrap();
    let worst = traj
        .times
        .iter()
        .zip(&traj.upper)
        .map(|(&t, p)| (p - rabi_population(eta, t)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn rabi_period_scales_inversely_with_coupling() {
    for eta in [1e-4, 1e-3, 1e-2] {
        let t_end = 1.2 * rabi_period(eta);
        let samples = (t_end / (2.0 * PI) * 32.0) as usize;
        let traj = two_level_integrate(
            TwoLevelDrive {
                eta,
                omega_nm: 1.0,
                omega: 1.0,
            },
            t_end,
            samples,
        )
        .unwrap();
        let measured = measure_rabi_period(&traj, 2.0 * PI).unwrap();
        assert!(
            (measured * eta / PI - 1.0).abs() < 1e-2,
            "eta={eta}: {measured}"
        );
    }
}

fn scan_peak(coupling: Coupling) -> f64 {
    let u = natural_units();
    let me = PerturbationSpec::new(coupling, 1e-3, 1.0)
        .unwrap()
        .matrix_elements(&u, 12)
        .unwrap();
    let omegas: Vec<f64> = (0..=200).map(|i| 0.5 + 0.01 * i as f64).collect();
    let t = default_probe_time(&me, 0).unwrap();
    resonance_scan(&me, 0, &omegas, t)
        .unwrap()
        .peak()
        .unwrap()
        .omega
}

#[test]
fn scan_selects_multiples_of_the_level_spacing() {
    assert!((scan_peak(Coupling::Linear) - 1.0).abs() <= 0.01);
    assert!((scan_peak(Coupling::Quadratic) - 2.0).abs() <= 0.01);
    assert!((scan_peak(Coupling::Cubic) - 1.0).abs() <= 0.01);
}

fn toy() -> ToyLevels {
    let energies = vec![0.0, 0.37, 1.1, 1.9, 2.6];
    let cell = |n: usize, m: usize, s: f64| {
        Complex64::new(
            0.01 * (1.0 + 0.3 * (n + 2 * m) as f64 * s),
            0.004 * (n as f64 - m as f64 + s),
        )
    };
    let f = (0..5)
        .map(|n| (0..5).map(|m| cell(n, m, 1.0)).collect())
        .collect();
    let f_prime = (0..5)
        .map(|n| (0..5).map(|m| cell(m, n, -0.5)).collect())
        .collect();
    ToyLevels {
        energies,
        f,
        f_prime,
        hbar: 1.0,
    }
}

fn tables(t: &ToyLevels) -> (MatrixElements, MatrixElements) {
    (
        MatrixElements::from_parts(t.energies.clone(), t.f.clone(), t.hbar).unwrap(),
        MatrixElements::from_parts(t.energies.clone(), t.f_prime.clone(), t.hbar).unwrap(),
    )
}

#[test]
fn second_order_closed_form_matches_direct_integration() {
    let toy = toy();
    let (me, me_prime) = tables(&toy);
    let (m, omega, omega_prime) = (0, 0.83, 0.41);
    let t = 17.0;
    let integrated = second_order_by_integration(&toy, m, omega, omega_prime, t);
    for (n, direct) in integrated.iter().enumerate().skip(1) {
        let closed = second_order_amplitude(&me, &me_prime, m, n, omega, omega_prime, t).unwrap()
            - second_order_amplitude(&me, &me_prime, m, n, omega, omega_prime, 0.0).unwrap();
        let rel = (closed - direct).norm() / closed.norm();
        assert!(rel < 1e-8, "n={n}: {closed} vs {direct} ({rel:e})");
    }
}

#[test]
fn raman_flag_fires_only_on_the_resonance() {
    let toy = toy();
    let (me, me_prime) = tables(&toy);
    let (m, n) = (0, 2);
    let omega = 1.7;
    let exact = omega - 1.1;
    for shift in [-1e-3, -1e-5, 0.0, 1e-5, 1e-3] {
        let wp = exact + shift;
        let condition = check_raman_condition(omega, wp, 0.0, 1.1, 1.0, 1e-6 * omega);
        let result = second_order_amplitude(&me, &me_prime, m, n, omega, wp, 0.0);
        assert_eq!(
            condition,
            matches!(result, Err(Error::SecondOrderResonance { .. })),
            "shift {shift}"
        );
        assert_eq!(condition, shift == 0.0);
    }
}

#[test]
fn matrix_elements_of_arbitrary_profiles() {
    let u = natural_units();
    let me = matrix_elements(&|x: f64| x + x * x, &u, 10).unwrap();
    for n in 0..=10 {
        for m in 0..=10 {
            assert!((me.f(n, m).re - ladder_x(n, m) - ladder_x2(n, m)).abs() < 1e-10);
        }
    }
    let steep = matrix_elements(&|x: f64| (-x * x).exp(), &u, 10);
    assert!(matches!(steep, Err(Error::TailTooLarge { .. })));
}
