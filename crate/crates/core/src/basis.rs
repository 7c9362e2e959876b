//! Harmonic-oscillator eigenbasis on a uniform grid.
//!
//! Eigenfunctions are generated by the normalized three-term recurrence
//!
//! ```text
//! ψ_{n+1}(x) = sqrt(2/(n+1)) ξ ψ_n(x) − sqrt(n/(n+1)) ψ_{n−1}(x),   ξ = αx
//! ```
//!
//! carried with a separate logarithmic scale so that neither the Gaussian
//! factor (underflow far from the origin) nor the polynomial factor
//! (overflow at large n) leaves the representable range.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::OscillatorUnits;
use crate::error::{Error, Result};
use crate::export::{read_table, write_table};

/// Largest eigenfunction index accepted by the recurrence.
pub const MAX_INDEX: usize = 2000;
/// Default basis size for decompositions.
pub const DEFAULT_N_MAX: usize = 128;
/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 2048;
/// Grid half-width in units of the ground-state width 1/α.
pub const DEFAULT_WIDTH_MARGIN: f64 = 10.0;
/// Above this missing spectral weight a decomposition logs a warning.
pub const TAIL_WARNING: f64 = 1e-10;
/// Above this missing spectral weight a decomposition fails.
pub const TAIL_ERROR: f64 = 1e-6;

/// Uniform grid `x_i = x_min + i·dx`, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::invalid(
                "grid",
                format!("need x_min < x_max, got [{x_min}, {x_max}]"),
            ));
        }
        if n_points < 3 {
            return Err(Error::invalid(
                "n_points",
                format!("need at least 3, got {n_points}"),
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    /// Default grid for a packet displaced by `a`: ±(|a| + 10/α), 2048 points.
    pub fn for_displacement(units: &OscillatorUnits, a: f64) -> Self {
        let half = a.abs() + DEFAULT_WIDTH_MARGIN / units.alpha();
        Self {
            x_min: -half,
            x_max: half,
            n_points: DEFAULT_POINTS,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Trapezoid rule over the grid.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let n = values.len();
        let inner: f64 = values.iter().sum();
        self.dx() * (inner - 0.5 * (values[0] + values[n - 1]))
    }

    pub fn trapezoid_complex(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.n_points);
        let n = values.len();
        let inner: Complex64 = values.iter().sum();
        (inner - 0.5 * (values[0] + values[n - 1])) * self.dx()
    }

    /// True when `[lo, hi]` lies inside the grid, up to round-off.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let slack = 1e-9 * (self.x_max - self.x_min);
        self.x_min <= lo + slack && self.x_max >= hi - slack
    }
}

/// Complex amplitudes Ψ(x_i) on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWaveFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridWaveFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples, got {}", grid.n_points, values.len()),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n_points).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// ∫|ψ|² dx by the trapezoid rule.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.trapezoid(&self.density())
    }

    pub fn normalize(&mut self) {
        let scale = self.norm_sqr().sqrt();
        if scale > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= scale);
        }
    }

    /// ⟨self|other⟩ on the shared grid.
    pub fn inner(&self, other: &GridWaveFunction) -> Complex64 {
        let prod: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .collect();
        self.grid.trapezoid_complex(&prod)
    }

    /// Largest of |ψ| at the two grid ends.
    pub fn edge_amplitude(&self) -> f64 {
        let n = self.values.len();
        self.values[0].norm().max(self.values[n - 1].norm())
    }

    /// Checks the normalization (1e-8) and edge (1e-10) invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(
                "wavefunction",
                format!("norm {norm} differs from 1"),
            ));
        }
        let edge = self.edge_amplitude();
        if edge >= 1e-10 {
            return Err(Error::invalid(
                "wavefunction",
                format!("edge amplitude {edge:e} too large"),
            ));
        }
        Ok(())
    }

    /// L∞ distance between the densities of two states on the same grid.
    pub fn density_distance(&self, other: &GridWaveFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `x, re, im` and the grid as JSON header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let header = serde_json::json!({
            "kind": "wavefunction",
            "x_min": self.grid.x_min,
            "x_max": self.grid.x_max,
            "n_points": self.grid.n_points,
        });
        let rows = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| vec![self.grid.x(i), v.re, v.im]);
        write_table(out, &header, &["x", "re", "im"], rows)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let table = read_table(input)?;
        let field = |k: &str| {
            table.header[k]
                .as_f64()
                .ok_or_else(|| Error::Io(format!("header lacks `{k}`")))
        };
        let grid = Grid::new(
            field("x_min")?,
            field("x_max")?,
            field("n_points")? as usize,
        )?;
        if table.columns != ["x", "re", "im"] {
            return Err(Error::Io(format!("unexpected columns {:?}", table.columns)));
        }
        let values = table
            .rows
            .iter()
            .map(|r| Complex64::new(r[1], r[2]))
            .collect();
        Self::new(grid, values)
    }
}

/// Expansion coefficients a_n over the oscillator eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    units: OscillatorUnits,
    coeffs: Vec<Complex64>,
}

impl SpectralState {
    /// Requires Σ|a_n|² = 1 within 1e-10.
    pub fn new(units: OscillatorUnits, coeffs: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if coeffs.is_empty() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(
                "coeffs",
                format!("Σ|a_n|² = {norm}, expected 1"),
            ));
        }
        Ok(Self { units, coeffs })
    }

    /// Rescales arbitrary nonzero coefficients to unit norm.
    pub fn normalized(units: OscillatorUnits, mut coeffs: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("coeffs", "zero or non-finite norm"));
        }
        coeffs.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { units, coeffs })
    }

    /// Single eigenstate a_m = 1.
    pub fn eigenstate(units: OscillatorUnits, m: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m + 1];
        coeffs[m] = Complex64::new(1.0, 0.0);
        Self { units, coeffs }
    }

    pub fn units(&self) -> &OscillatorUnits {
        &self.units
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// 1 − Σ|a_n|².
    pub fn truncation_tail(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.coeffs.len())
            .map(|n| eigenenergy(n, &self.units))
            .collect()
    }

    /// Ψ(x_i, t) from a precomputed eigenfunction table.
    pub fn reconstruct_with(&self, table: &EigenTable, t: f64) -> GridWaveFunction {
        let grid = *table.grid();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.n_points];
        let n_terms = self.coeffs.len().min(table.len());
        for n in 0..n_terms {
            let phase = -eigenenergy(n, &self.units) * t / self.units.hbar();
            let weight = self.coeffs[n] * Complex64::from_polar(1.0, phase);
            if weight == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (v, psi) in values.iter_mut().zip(table.row(n)) {
                *v += weight * psi;
            }
        }
        GridWaveFunction { grid, values }
    }
}

/// E_n = ħω_c (n + 1/2).
pub fn eigenenergy(n: usize, units: &OscillatorUnits) -> f64 {
    units.quantum() * (n as f64 + 0.5)
}

/// Carries ψ_n(x) as `value · exp(log_scale)` through the recurrence.
struct ScaledRecurrence {
    xi: f64,
    prev: f64,
    cur: f64,
    log_scale: f64,
    n: usize,
}

const RESCALE_AT: f64 = 1e150;

impl ScaledRecurrence {
    fn new(alpha: f64, x: f64) -> Self {
        let xi = alpha * x;
        let log_norm = 0.5 * alpha.ln() - 0.25 * std::f64::consts::PI.ln();
        Self {
            xi,
            prev: 0.0,
            cur: 1.0,
            log_scale: log_norm - 0.5 * xi * xi,
            n: 0,
        }
    }

    fn value(&self) -> f64 {
        if self.cur == 0.0 {
            0.0
        } else {
            self.cur * self.log_scale.exp()
        }
    }

    fn advance(&mut self) {
        let n = self.n as f64;
        let next =
            (2.0 / (n + 1.0)).sqrt() * self.xi * self.cur - (n / (n + 1.0)).sqrt() * self.prev;
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        if self.cur.abs() > RESCALE_AT {
            self.cur /= RESCALE_AT;
            self.prev /= RESCALE_AT;
            self.log_scale += RESCALE_AT.ln();
        }
    }
}

/// Normalized eigenfunction ψ_n(x).
pub fn eigenfunction(n: usize, units: &OscillatorUnits, x: f64) -> Result<f64> {
    if n > MAX_INDEX {
        return Err(Error::IndexTooLarge { n, max: MAX_INDEX });
    }
    let mut rec = ScaledRecurrence::new(units.alpha(), x);
    for _ in 0..n {
        rec.advance();
    }
    Ok(rec.value())
}

/// ψ_0..ψ_{n_max} sampled on a grid, stored row-per-index.
#[derive(Debug, Clone)]
pub struct EigenTable {
    grid: Grid,
    rows: Vec<Vec<f64>>,
}

impl EigenTable {
    pub fn new(units: &OscillatorUnits, grid: Grid, n_max: usize) -> Result<Self> {
        if n_max > MAX_INDEX {
            return Err(Error::IndexTooLarge {
                n: n_max,
                max: MAX_INDEX,
            });
        }
        let mut rows = vec![vec![0.0; grid.n_points]; n_max + 1];
        let alpha = units.alpha();
        for i in 0..grid.n_points {
            let mut rec = ScaledRecurrence::new(alpha, grid.x(i));
            rows[0][i] = rec.value();
            for row in rows.iter_mut().skip(1) {
                rec.advance();
                row[i] = rec.value();
            }
        }
        Ok(Self { grid, rows })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    /// ⟨ψ_n|ψ⟩ by the trapezoid rule.
    pub fn project(&self, n: usize, psi: &[Complex64]) -> Complex64 {
        let prod: Vec<Complex64> = self.rows[n].iter().zip(psi).map(|(p, v)| v * p).collect();
        self.grid.trapezoid_complex(&prod)
    }

    /// ⟨ψ_n| f |ψ_m⟩ for a real function sampled on the grid.
    pub fn matrix_element(&self, n: usize, m: usize, f: &[f64]) -> f64 {
        let prod: Vec<f64> = self.rows[n]
            .iter()
            .zip(&self.rows[m])
            .zip(f)
            .map(|((a, b), w)| a * b * w)
            .collect();
        self.grid.trapezoid(&prod)
    }
}

/// Projects a normalized grid state onto ψ_0..ψ_{n_max}.
pub fn decompose(
    psi0: &GridWaveFunction,
    units: &OscillatorUnits,
    n_max: usize,
) -> Result<SpectralState> {
    let table = EigenTable::new(units, *psi0.grid(), n_max)?;
    decompose_with(psi0, units, &table)
}

pub fn decompose_with(
    psi0: &GridWaveFunction,
    units: &OscillatorUnits,
    table: &EigenTable,
) -> Result<SpectralState> {
    let norm = psi0.norm_sqr();
    if (norm - 1.0).abs() > TAIL_ERROR {
        return Err(Error::invalid(
            "psi0",
            format!("not normalized: ∫|ψ|² = {norm}"),
        ));
    }
    let coeffs: Vec<Complex64> = (0..table.len())
        .map(|n| table.project(n, psi0.values()))
        .collect();
    let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let n_max = table.len() - 1;
    if captured < 1.0 - TAIL_ERROR {
        return Err(Error::TailTooLarge { captured, n_max });
    }
    if 1.0 - captured > TAIL_WARNING {
        log::warn!("spectral tail {:.3e} above n_max = {n_max}", 1.0 - captured);
    }
    Ok(SpectralState {
        units: *units,
        coeffs,
    })
}

/// Ψ(x, t) = Σ a_n e^{−iE_n t/ħ} ψ_n(x) on `grid`.
pub fn reconstruct(state: &SpectralState, t: f64, grid: Grid) -> Result<GridWaveFunction> {
    let table = EigenTable::new(&state.units, grid, state.n_max())?;
    Ok(state.reconstruct_with(&table, t))
}
