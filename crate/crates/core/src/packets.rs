//! Closed-form nonstationary oscillator states and their energy statistics.
//!
//! Two families are covered: the coherent packet (a ground-state Gaussian
//! displaced by `a`, which oscillates rigidly at ω_c) and the breathing
//! packet (a centred Gaussian of inverse width β ≠ α, whose width
//! oscillates at 2ω_c).

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{
    eigenenergy, Grid, GridWaveFunction, SpectralState, DEFAULT_POINTS, DEFAULT_WIDTH_MARGIN,
};
use crate::constants::OscillatorUnits;
use crate::error::{Error, Result};
use crate::export::write_table;

/// Mean energy and its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyStats {
    pub mean: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentPacketParams {
    pub a: f64,
    pub units: OscillatorUnits,
}

impl CoherentPacketParams {
    pub fn new(a: f64, units: OscillatorUnits) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::invalid("a", "displacement must be finite"));
        }
        Ok(Self { a, units })
    }

    /// ±(|a| + 10/α), 2048 points.
    pub fn default_grid(&self) -> Grid {
        Grid::for_displacement(&self.units, self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreathingPacketParams {
    pub beta: f64,
    pub units: OscillatorUnits,
}

impl BreathingPacketParams {
    pub fn new(beta: f64, units: OscillatorUnits) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid(
                "beta",
                format!("must be positive, got {beta}"),
            ));
        }
        Ok(Self { beta, units })
    }

    /// A = α² + β².
    pub fn a_sum(&self) -> f64 {
        self.units.alpha().powi(2) + self.beta * self.beta
    }

    /// B = α² − β².
    pub fn b_diff(&self) -> f64 {
        self.units.alpha().powi(2) - self.beta * self.beta
    }

    /// Half-width that keeps |Ψ| negligible at the widest phase of the
    /// breathing cycle; reduces to 10/α when β = α.
    pub fn half_width(&self) -> f64 {
        let alpha = self.units.alpha();
        DEFAULT_WIDTH_MARGIN * alpha.max(self.beta).powi(2) / (alpha * alpha * self.beta)
    }

    pub fn default_grid(&self) -> Grid {
        let half = self.half_width();
        Grid {
            x_min: -half,
            x_max: half,
            n_points: DEFAULT_POINTS,
        }
    }
}

/// Displaced ground-state Gaussian (α^{1/2}/π^{1/4}) e^{−α²(x−a)²/2}.
pub fn displaced_gaussian(p: &CoherentPacketParams, grid: Grid) -> Result<GridWaveFunction> {
    let alpha = p.units.alpha();
    let half = p.a.abs() + DEFAULT_WIDTH_MARGIN / alpha;
    if !grid.covers(-half, half) {
        return Err(Error::DomainTooSmall {
            x_min: grid.x_min,
            x_max: grid.x_max,
            need_min: -half,
            need_max: half,
        });
    }
    let norm = alpha.sqrt() / PI.powf(0.25);
    Ok(GridWaveFunction::from_fn(grid, |x| {
        let d = alpha * (x - p.a);
        Complex64::new(norm * (-0.5 * d * d).exp(), 0.0)
    }))
}

/// Centred Gaussian (β^{1/2}/π^{1/4}) e^{−β²x²/2}.
pub fn squeezed_gaussian(p: &BreathingPacketParams, grid: Grid) -> Result<GridWaveFunction> {
    let half = p.half_width();
    if !grid.covers(-half, half) {
        return Err(Error::DomainTooSmall {
            x_min: grid.x_min,
            x_max: grid.x_max,
            need_min: -half,
            need_max: half,
        });
    }
    let norm = p.beta.sqrt() / PI.powf(0.25);
    Ok(GridWaveFunction::from_fn(grid, |x| {
        let d = p.beta * x;
        Complex64::new(norm * (-0.5 * d * d).exp(), 0.0)
    }))
}

/// (α/√π) e^{−α²(x − a cos ω_c t)²}.
pub fn coherent_density(x: f64, t: f64, p: &CoherentPacketParams) -> f64 {
    let alpha = p.units.alpha();
    let centre = p.a * (p.units.omega_c() * t).cos();
    let d = alpha * (x - centre);
    alpha / PI.sqrt() * (-d * d).exp()
}

/// Ē = ħω_c/2 + ka²/2, ΔE = sqrt(ħω_c) sqrt(ka²/2).
pub fn coherent_energy_stats(p: &CoherentPacketParams) -> EnergyStats {
    let hw = p.units.quantum();
    let elastic = 0.5 * p.units.k() * p.a * p.a;
    EnergyStats {
        mean: 0.5 * hw + elastic,
        deviation: hw.sqrt() * elastic.sqrt(),
    }
}

/// The second printed form of the coherent deviation, ħω_c sqrt(ka²/(2ħω_c)).
pub fn coherent_deviation_scaled_form(p: &CoherentPacketParams) -> f64 {
    let hw = p.units.quantum();
    hw * (p.units.k() * p.a * p.a / (2.0 * hw)).sqrt()
}

/// Exact breathing solution
///
/// ```text
/// Ψ(x,t) = (α/π^{1/4}) sqrt(2β/(A+Bζ)) exp(−iω_c t/2 − (α²x²/2)(A−Bζ)/(A+Bζ)),  ζ = e^{−2iω_c t}
/// ```
///
/// Re(A + Bζ) ≥ A − |B| = 2 min(α², β²) > 0, so A + Bζ never leaves the
/// right half-plane and the principal square root is the branch that is
/// continuous in t.
pub fn breathing_wavefunction(x: f64, t: f64, p: &BreathingPacketParams) -> Complex64 {
    let alpha = p.units.alpha();
    let w = p.units.omega_c();
    let zeta = Complex64::from_polar(1.0, -2.0 * w * t);
    let a = p.a_sum();
    let b = p.b_diff();
    let denom = a + b * zeta;
    let amplitude = (Complex64::new(2.0 * p.beta, 0.0) / denom).sqrt() * (alpha / PI.powf(0.25));
    let exponent =
        Complex64::new(0.0, -0.5 * w * t) - 0.5 * alpha * alpha * x * x * (a - b * zeta) / denom;
    amplitude * exponent.exp()
}

fn breathing_denominator(t: f64, p: &BreathingPacketParams) -> f64 {
    let a4 = p.units.alpha().powi(4);
    let b4 = p.beta.powi(4);
    a4 + b4 + (a4 - b4) * (2.0 * p.units.omega_c() * t).cos()
}

/// ρ(x,t) = (α²β/√π) sqrt(2/D) exp(−2α⁴β²x²/D),  D = α⁴ + β⁴ + (α⁴ − β⁴) cos 2ω_c t.
pub fn breathing_density(x: f64, t: f64, p: &BreathingPacketParams) -> f64 {
    let alpha = p.units.alpha();
    let d = breathing_denominator(t, p);
    let a2 = alpha * alpha;
    a2 * p.beta / PI.sqrt()
        * (2.0 / d).sqrt()
        * (-2.0 * a2 * a2 * p.beta * p.beta * x * x / d).exp()
}

/// Position standard deviation of the breathing packet at time t.
pub fn breathing_width(t: f64, p: &BreathingPacketParams) -> f64 {
    let a2 = p.units.alpha().powi(2);
    (breathing_denominator(t, p) / (4.0 * a2 * a2 * p.beta * p.beta)).sqrt()
}

/// Ē = (ħω_c/2)[1 + (α²−β²)²/(2α²β²)],  ΔE = ħω_c|α⁴−β⁴|/(2√2 α²β²).
pub fn breathing_energy_stats(p: &BreathingPacketParams) -> EnergyStats {
    let hw = p.units.quantum();
    let a2 = p.units.alpha().powi(2);
    let b2 = p.beta * p.beta;
    EnergyStats {
        mean: 0.5 * hw * (1.0 + (a2 - b2).powi(2) / (2.0 * a2 * b2)),
        deviation: hw * (a2 * a2 - b2 * b2).abs() / (2.0 * 2f64.sqrt() * a2 * b2),
    }
}

/// Σ|a_n|² E_n.
pub fn mean_energy_of_coeffs(s: &SpectralState) -> f64 {
    s.coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| c.norm_sqr() * eigenenergy(n, s.units()))
        .sum()
}

/// Σ|a_n|² E_n² − Ē², clamped at zero.
pub fn variance_of_coeffs(s: &SpectralState) -> f64 {
    let mean = mean_energy_of_coeffs(s);
    let second: f64 = s
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| c.norm_sqr() * eigenenergy(n, s.units()).powi(2))
        .sum();
    (second - mean * mean).max(0.0)
}

/// Energy statistics of arbitrary coefficients, with `mean`/`deviation`
/// drawn from explicit level energies (used for degenerate spectra).
pub fn stats_for_levels(probabilities: &[f64], energies: &[f64]) -> EnergyStats {
    let mean: f64 = probabilities.iter().zip(energies).map(|(p, e)| p * e).sum();
    let second: f64 = probabilities
        .iter()
        .zip(energies)
        .map(|(p, e)| p * e * e)
        .sum();
    EnergyStats {
        mean,
        deviation: (second - mean * mean).max(0.0).sqrt(),
    }
}

pub fn stats_of_coeffs(s: &SpectralState) -> EnergyStats {
    EnergyStats {
        mean: mean_energy_of_coeffs(s),
        deviation: variance_of_coeffs(s).sqrt(),
    }
}

/// Density time series, CSV columns `t, x, rho`.
pub fn write_density_series<W: Write>(
    out: W,
    header: &serde_json::Value,
    grid: &Grid,
    times: &[f64],
    density: impl Fn(f64, f64) -> f64,
) -> Result<()> {
    let xs = grid.points();
    let rows = times
        .iter()
        .flat_map(|&t| xs.iter().map(move |&x| (t, x)))
        .map(|(t, x)| vec![t, x, density(x, t)]);
    write_table(out, header, &["t", "x", "rho"], rows)
}
