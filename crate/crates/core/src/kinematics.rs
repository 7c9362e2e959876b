//! Energy and momentum bookkeeping for wave packets that carry ħω and
//! ħω/c: the photoelectric relation, Compton scattering off a resting
//! electron, and the pair-creation threshold.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::export::write_table;
use crate::roots::brent;

/// Velocity window searched by [`first_order_infeasibility`], as v/c.
pub const INFEASIBILITY_WINDOW: (f64, f64) = (1e-3, 1.0 - 1e-3);
/// Default grid size of the infeasibility search.
pub const INFEASIBILITY_POINTS: usize = 10_000;

/// A packet of energy ħω moving along a unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketQuantum {
    omega: f64,
    direction: [f64; 3],
}

impl WavePacketQuantum {
    pub fn new(omega: f64, direction: [f64; 3]) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(
                "omega",
                format!("must be positive, got {omega}"),
            ));
        }
        let len = norm3(direction);
        if (len - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "direction",
                format!("must be a unit vector, |d| = {len}"),
            ));
        }
        Ok(Self { omega, direction })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// p = ħω/c along the direction of travel.
pub fn wave_momentum(q: &WavePacketQuantum, c: &PhysicalConstants) -> [f64; 3] {
    let p = c.hbar * q.omega / c.light_speed;
    q.direction.map(|d| p * d)
}

/// Outcome of scattering a quantum ħω off an electron at rest.
///
/// The incident packet travels along +x; the scattered packet and the
/// recoil electron stay in the x–y plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComptonSolution {
    pub omega: f64,
    pub omega_prime: f64,
    /// (ω − ω′)/ω, kept separately so that small shifts keep full precision.
    pub fractional_loss: f64,
    pub electron_speed: f64,
    pub electron_direction: [f64; 3],
    pub theta: f64,
}

impl ComptonSolution {
    /// Kinetic energy ħ(ω − ω′) handed to the electron, erg.
    pub fn electron_kinetic_energy(&self, c: &PhysicalConstants) -> f64 {
        c.hbar * self.omega * self.fractional_loss
    }

    /// λ′ − λ = 2πc(1/ω′ − 1/ω), cm.
    pub fn wavelength_shift(&self, c: &PhysicalConstants) -> f64 {
        let d = self.fractional_loss;
        2.0 * PI * c.light_speed / self.omega * d / (1.0 - d)
    }

    fn lorentz_gamma(&self, c: &PhysicalConstants) -> f64 {
        let beta = self.electron_speed / c.light_speed;
        1.0 / (1.0 - beta * beta).sqrt()
    }

    /// |ħω + m₀c² − ħω′ − mc²| relative to the total energy.
    pub fn energy_residual(&self, c: &PhysicalConstants) -> f64 {
        let rest = c.electron_rest_energy();
        let before = c.hbar * self.omega + rest;
        let after = c.hbar * self.omega_prime + self.lorentz_gamma(c) * rest;
        (before - after).abs() / before
    }

    /// In-plane components of ħk − ħk′ − mv, relative to ħω/c.
    pub fn momentum_residual(&self, c: &PhysicalConstants) -> [f64; 2] {
        let scale = c.hbar * self.omega / c.light_speed;
        let k_out = c.hbar * self.omega_prime / c.light_speed;
        let p_e = self.lorentz_gamma(c) * c.electron_mass * self.electron_speed;
        let dir = self.electron_direction;
        [
            (scale - k_out * self.theta.cos() - p_e * dir[0]).abs() / scale,
            (-k_out * self.theta.sin() - p_e * dir[1]).abs() / scale,
        ]
    }

    pub fn max_residual(&self, c: &PhysicalConstants) -> f64 {
        let [px, py] = self.momentum_residual(c);
        self.energy_residual(c).max(px).max(py)
    }
}

/// Solves joint energy and momentum conservation for the scattered
/// frequency at angle θ.
///
/// With ε = ħω/(m₀c²) and d = 1 − ω′/ω, the electron momentum fixed by
/// energy conservation, m₀c·sqrt(εd(εd + 2)), must equal the momentum
/// transfer |ħk − ħk′| = m₀c·ε·sqrt(d² + 4(1 − d)sin²(θ/2)). The
/// difference is bracketed on d ∈ [0, 1] and solved numerically.
pub fn compton_solve(omega: f64, theta: f64, c: &PhysicalConstants) -> Result<ComptonSolution> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid(
            "omega",
            format!("must be positive, got {omega}"),
        ));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::invalid(
            "theta",
            format!("must lie in [0, π], got {theta}"),
        ));
    }
    let rest = c.electron_rest_energy();
    let eps = c.hbar * omega / rest;
    let s2 = (0.5 * theta).sin().powi(2);
    let d = if s2 == 0.0 {
        0.0
    } else {
        let mismatch = |d: f64| {
            let electron = (eps * d * (eps * d + 2.0)).sqrt();
            let transfer = eps * (d * d + 4.0 * (1.0 - d) * s2).sqrt();
            (electron - transfer) / eps
        };
        brent(mismatch, 0.0, 1.0, 0.0, 200)?
    };
    if !(0.0..1.0).contains(&d) {
        return Err(Error::NoRoot(format!("fractional loss {d} outside [0, 1)")));
    }
    let kinetic = c.hbar * omega * d;
    let energy = rest + kinetic;
    let electron_speed = c.light_speed * (kinetic * (kinetic + 2.0 * rest)).sqrt() / energy;
    let omega_prime = omega * (1.0 - d);
    let px = omega - omega_prime * theta.cos();
    let py = -omega_prime * theta.sin();
    let len = px.hypot(py);
    let electron_direction = if len > 0.0 && d > 0.0 {
        [px / len, py / len, 0.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    Ok(ComptonSolution {
        omega,
        omega_prime,
        fractional_loss: d,
        electron_speed,
        electron_direction,
        theta,
    })
}

/// Solutions for each angle in degrees.
pub fn compton_sweep(
    omega: f64,
    thetas_deg: &[f64],
    c: &PhysicalConstants,
) -> Result<Vec<ComptonSolution>> {
    thetas_deg
        .iter()
        .map(|deg| compton_solve(omega, deg.to_radians(), c))
        .collect()
}

/// Columns `theta_deg, omega_prime, delta_lambda_m, electron_keV`.
pub fn write_compton_csv<W: Write>(
    out: W,
    header: &serde_json::Value,
    solutions: &[ComptonSolution],
    c: &PhysicalConstants,
) -> Result<()> {
    let rows = solutions.iter().map(|s| {
        vec![
            s.theta.to_degrees(),
            s.omega_prime,
            s.wavelength_shift(c) * 1e-2,
            c.erg_to_ev(s.electron_kinetic_energy(c)) * 1e-3,
        ]
    });
    write_table(
        out,
        header,
        &["theta_deg", "omega_prime", "delta_lambda_m", "electron_keV"],
        rows,
    )
}

/// Mismatch |ħω/c − mv| when the whole packet, ħω = (m − m₀)c², is handed
/// to an electron moving at v = βc. Units g·cm/s.
pub fn infeasibility_residual(beta: f64, c: &PhysicalConstants) -> f64 {
    let s = (1.0 - beta * beta).sqrt();
    let gamma = 1.0 / s;
    let gamma_minus_one = beta * beta / (s * (1.0 + s));
    c.electron_mass * c.light_speed * (gamma_minus_one - gamma * beta).abs()
}

/// Smallest momentum mismatch found for complete absorption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport {
    /// g·cm/s.
    pub min_residual: f64,
    /// min_residual / (m₀c).
    pub relative_residual: f64,
    pub beta_at_min: f64,
    pub grid_points: usize,
}

/// Minimum of [`infeasibility_residual`] over the window
/// [`INFEASIBILITY_WINDOW`], on the default grid.
pub fn first_order_infeasibility(c: &PhysicalConstants) -> InfeasibilityReport {
    first_order_infeasibility_with(c, INFEASIBILITY_POINTS)
}

/// Grid search over `points` speeds followed by a golden-section
/// refinement in the cells around the best grid point.
pub fn first_order_infeasibility_with(c: &PhysicalConstants, points: usize) -> InfeasibilityReport {
    let points = points.max(3);
    let (lo, hi) = INFEASIBILITY_WINDOW;
    let step = (hi - lo) / (points - 1) as f64;
    let f = |b: f64| infeasibility_residual(b, c);
    let best = (0..points)
        .map(|i| lo + step * i as f64)
        .map(|b| (b, f(b)))
        .fold(
            (lo, f64::INFINITY),
            |acc, p| if p.1 < acc.1 { p } else { acc },
        );
    let mut a = (best.0 - step).max(lo);
    let mut b = (best.0 + step).min(hi);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-14 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
    }
    let (beta_at_min, min_residual) =
        [(a, f(a)), (b, f(b)), best]
            .into_iter()
            .fold(
                (lo, f64::INFINITY),
                |acc, p| if p.1 < acc.1 { p } else { acc },
            );
    InfeasibilityReport {
        min_residual,
        relative_residual: min_residual / (c.electron_mass * c.light_speed),
        beta_at_min,
        grid_points: points,
    }
}

/// Photon energies this close below W (relative) count as exactly at threshold.
pub const THRESHOLD_ROUNDOFF: f64 = 1e-14;

/// v = sqrt(2(ħω − W)/m), cm/s. `work_function` in erg.
pub fn photoelectric_velocity(
    omega: f64,
    work_function: f64,
    c: &PhysicalConstants,
) -> Result<f64> {
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::invalid(
            "omega",
            format!("must be non-negative, got {omega}"),
        ));
    }
    if !(work_function.is_finite() && work_function >= 0.0) {
        return Err(Error::invalid("work_function", "must be non-negative"));
    }
    let photon_energy = c.hbar * omega;
    let excess = photon_energy - work_function;
    if excess < 0.0 {
        // ħ·(W/ħ) may land a few ulps below W
        if -excess <= THRESHOLD_ROUNDOFF * work_function {
            return Ok(0.0);
        }
        return Err(Error::BelowThreshold {
            photon_energy,
            work_function,
        });
    }
    Ok((2.0 * excess / c.electron_mass).sqrt())
}

/// ω = 2m₀c²/ħ.
pub fn pair_threshold(c: &PhysicalConstants) -> f64 {
    2.0 * c.electron_rest_energy() / c.hbar
}
