//! Grid integration of the one-dimensional time-dependent Schrödinger
//! equation with unitary implicit time stepping.
//!
//! Each step applies rational approximants of e^{−iHΔt/ħ} in factored
//! Cayley form `(I + sH)⁻¹(I − sH)`. One factor is Crank–Nicolson
//! (second order); two conjugate factors give the diagonal (2,2) Padé
//! approximant (fourth order). Both preserve the discrete norm exactly
//! up to round-off because H is real symmetric.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::BandedLu;
use crate::basis::{Grid, GridWaveFunction};
use crate::constants::OscillatorUnits;
use crate::error::{Error, Result};
use crate::export::write_table;

/// Edge amplitude that aborts an evolution.
pub const LEAK_THRESHOLD: f64 = 1e-6;
/// Upper bound on stored trajectory frames.
pub const MAX_FRAMES: usize = 500;

/// Finite-difference approximation of ∂²/∂x².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticStencil {
    /// Three-point second difference, O(dx²).
    SecondOrder,
    /// Five-point, O(dx⁴).
    FourthOrder,
    /// Seven-point, O(dx⁶).
    #[default]
    SixthOrder,
}

impl KineticStencil {
    /// Central coefficient followed by the coefficients at offsets 1, 2, ...
    fn coefficients(self) -> &'static [f64] {
        const SECOND: [f64; 2] = [-2.0, 1.0];
        const FOURTH: [f64; 3] = [-30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        const SIXTH: [f64; 4] = [-490.0 / 180.0, 270.0 / 180.0, -27.0 / 180.0, 2.0 / 180.0];
        match self {
            KineticStencil::SecondOrder => &SECOND,
            KineticStencil::FourthOrder => &FOURTH,
            KineticStencil::SixthOrder => &SIXTH,
        }
    }

    pub fn half_width(self) -> usize {
        self.coefficients().len() - 1
    }
}

/// Rational approximation of the step propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// Trapezoidal (Cayley) rule, second order in Δt.
    CrankNicolson,
    /// Diagonal (2,2) Padé in two Cayley factors, fourth order in Δt.
    #[default]
    Pade4,
}

impl Stepper {
    /// Shifts s_k with step = Π_k (I + s_k H)⁻¹ (I − s_k H), in units of Δt/ħ.
    fn shifts(self) -> Vec<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        match self {
            Stepper::CrankNicolson => vec![i * 0.5],
            Stepper::Pade4 => {
                // roots of 1 + z/2 + z²/12
                let roots = [
                    Complex64::new(-3.0, 3f64.sqrt()),
                    Complex64::new(-3.0, -(3f64.sqrt())),
                ];
                roots.iter().map(|r| -i / r).collect()
            }
        }
    }
}

/// H = −(ħ²/2m) ∂²/∂x² + V(x) on a grid with Ψ = 0 outside.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Grid,
    potential: Vec<f64>,
    mass: f64,
    hbar: f64,
    stencil: KineticStencil,
}

impl Hamiltonian {
    pub fn new(
        grid: Grid,
        potential: Vec<f64>,
        mass: f64,
        hbar: f64,
        stencil: KineticStencil,
    ) -> Result<Self> {
        if potential.len() != grid.n_points {
            return Err(Error::invalid(
                "potential",
                format!(
                    "expected {} samples, got {}",
                    grid.n_points,
                    potential.len()
                ),
            ));
        }
        if grid.n_points <= 2 * stencil.half_width() {
            return Err(Error::invalid(
                "grid",
                "too few points for the kinetic stencil",
            ));
        }
        Ok(Self {
            grid,
            potential,
            mass,
            hbar,
            stencil,
        })
    }

    /// ½kx² on `grid`.
    pub fn harmonic(units: &OscillatorUnits, grid: Grid, stencil: KineticStencil) -> Result<Self> {
        let k = units.k();
        let potential = grid.points().iter().map(|x| 0.5 * k * x * x).collect();
        Self::new(grid, potential, units.mass(), units.hbar(), stencil)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn stencil(&self) -> KineticStencil {
        self.stencil
    }

    fn kinetic_scale(&self) -> f64 {
        let dx = self.grid.dx();
        -self.hbar * self.hbar / (2.0 * self.mass * dx * dx)
    }

    /// Matrix entry H_ij with an extra diagonal term `extra[i]`.
    fn entry(&self, i: usize, j: usize, extra: Option<&[f64]>) -> f64 {
        let coeffs = self.stencil.coefficients();
        let off = i.abs_diff(j);
        let mut v = if off < coeffs.len() {
            self.kinetic_scale() * coeffs[off]
        } else {
            0.0
        };
        if i == j {
            v += self.potential[i] + extra.map_or(0.0, |e| e[i]);
        }
        v
    }

    /// out = (H + diag(extra)) ψ.
    pub fn apply_with(&self, psi: &[Complex64], extra: Option<&[f64]>, out: &mut [Complex64]) {
        let coeffs = self.stencil.coefficients();
        let scale = self.kinetic_scale();
        let n = psi.len();
        for i in 0..n {
            let mut diag = self.potential[i] + scale * coeffs[0];
            if let Some(e) = extra {
                diag += e[i];
            }
            let mut acc = psi[i] * diag;
            for (k, c) in coeffs.iter().enumerate().skip(1) {
                let w = scale * c;
                if i >= k {
                    acc += psi[i - k] * w;
                }
                if i + k < n {
                    acc += psi[i + k] * w;
                }
            }
            out[i] = acc;
        }
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply_with(psi, None, &mut out);
        out
    }
}

/// Ē = ∫Ψ* H Ψ dx.
pub fn mean_energy_numeric(psi: &GridWaveFunction, h: &Hamiltonian) -> f64 {
    let h_psi = h.apply(psi.values());
    let prod: Vec<Complex64> = psi
        .values()
        .iter()
        .zip(&h_psi)
        .map(|(a, b)| a.conj() * b)
        .collect();
    psi.grid().trapezoid_complex(&prod).re
}

/// ⟨(H − Ē)²⟩ = ∫|HΨ|² dx − Ē², clamped at zero.
pub fn variance_numeric(psi: &GridWaveFunction, h: &Hamiltonian) -> f64 {
    let mean = mean_energy_numeric(psi, h);
    let h_psi = h.apply(psi.values());
    let sq: Vec<f64> = h_psi.iter().map(|v| v.norm_sqr()).collect();
    (psi.grid().trapezoid(&sq) - mean * mean).max(0.0)
}

/// Ē = iħ∫Ψ* ∂Ψ/∂t dx with a centred difference over `prev`/`next`
/// taken `dt` before and after `center`.
pub fn time_derivative_energy(
    prev: &GridWaveFunction,
    center: &GridWaveFunction,
    next: &GridWaveFunction,
    dt: f64,
    hbar: f64,
) -> f64 {
    let i_hbar = Complex64::new(0.0, hbar);
    let prod: Vec<Complex64> = center
        .values()
        .iter()
        .zip(prev.values().iter().zip(next.values()))
        .map(|(c, (p, n))| c.conj() * (n - p) / (2.0 * dt))
        .collect();
    (i_hbar * center.grid().trapezoid_complex(&prod)).re
}

/// Time step for the derivative form of the mean energy.
pub fn derivative_step(units: &OscillatorUnits) -> f64 {
    1e-5 / units.omega_c()
}

/// Time-dependent term v(x)·g(t) added to the static potential.
#[derive(Clone)]
pub struct Drive {
    pub profile: Vec<f64>,
    pub envelope: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Drive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Drive")
            .field("profile_len", &self.profile.len())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub hamiltonian: Hamiltonian,
    pub drive: Option<Drive>,
    pub stepper: Stepper,
}

impl EvolutionConfig {
    /// Harmonic potential on `grid` with the default stencil and stepper.
    pub fn harmonic(units: &OscillatorUnits, grid: Grid, dt: f64, n_steps: usize) -> Result<Self> {
        Ok(Self {
            dt,
            n_steps,
            hamiltonian: Hamiltonian::harmonic(units, grid, KineticStencil::default())?,
            drive: None,
            stepper: Stepper::default(),
        })
    }

    /// Number of steps spanning `t_end` at step `dt` (rounded).
    pub fn steps_for(t_end: f64, dt: f64) -> usize {
        (t_end / dt).round() as usize
    }

    pub fn with_stepper(mut self, stepper: Stepper) -> Self {
        self.stepper = stepper;
        self
    }

    pub fn with_drive(mut self, drive: Drive) -> Self {
        self.drive = Some(drive);
        self
    }

    fn validate(&self, psi0: &GridWaveFunction) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if psi0.grid() != self.hamiltonian.grid() {
            return Err(Error::invalid(
                "psi0",
                "grid differs from the Hamiltonian grid",
            ));
        }
        if let Some(d) = &self.drive {
            if d.profile.len() != psi0.grid().n_points {
                return Err(Error::invalid(
                    "drive",
                    "profile length differs from the grid",
                ));
            }
        }
        Ok(())
    }

    /// Header summary for exports.
    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "dt": self.dt,
            "n_steps": self.n_steps,
            "stepper": self.stepper,
            "stencil": self.hamiltonian.stencil(),
            "grid": self.hamiltonian.grid(),
            "driven": self.drive.is_some(),
        })
    }
}

/// Prefactored step operator for a time-independent Hamiltonian.
pub struct Propagator<'h> {
    hamiltonian: &'h Hamiltonian,
    factors: Vec<(Complex64, BandedLu)>,
    scratch: Vec<Complex64>,
}

fn factor_shift(h: &Hamiltonian, s: Complex64, extra: Option<&[f64]>) -> Result<BandedLu> {
    let w = h.stencil.half_width();
    let n = h.grid.n_points;
    BandedLu::factor(n, w, w, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) + s * h.entry(i, j, extra)
    })
    .ok_or_else(|| Error::invalid("dt", "singular step matrix"))
}

fn apply_factor(
    h: &Hamiltonian,
    s: Complex64,
    lu: &BandedLu,
    extra: Option<&[f64]>,
    psi: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    h.apply_with(psi, extra, scratch);
    for (p, hp) in psi.iter_mut().zip(scratch.iter()) {
        *p -= s * hp;
    }
    lu.solve_in_place(psi);
}

impl<'h> Propagator<'h> {
    pub fn new(hamiltonian: &'h Hamiltonian, dt: f64, stepper: Stepper) -> Result<Self> {
        let scale = dt / hamiltonian.hbar;
        let factors = stepper
            .shifts()
            .into_iter()
            .map(|s| {
                let s = s * scale;
                factor_shift(hamiltonian, s, None).map(|lu| (s, lu))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            hamiltonian,
            factors,
            scratch: vec![Complex64::new(0.0, 0.0); hamiltonian.grid.n_points],
        })
    }

    pub fn step(&mut self, psi: &mut [Complex64]) {
        for (s, lu) in &self.factors {
            apply_factor(self.hamiltonian, *s, lu, None, psi, &mut self.scratch);
        }
    }
}

/// Stored frames of an evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<GridWaveFunction>,
    pub stride: usize,
}

impl Trajectory {
    /// CSV columns `t, x, re, im, rho`; every `x_stride`-th grid point.
    pub fn write_csv<W: Write>(
        &self,
        out: W,
        header: &serde_json::Value,
        x_stride: usize,
    ) -> Result<()> {
        let x_stride = x_stride.max(1);
        let rows = self.times.iter().zip(&self.frames).flat_map(|(&t, f)| {
            let grid = *f.grid();
            f.values()
                .iter()
                .enumerate()
                .step_by(x_stride)
                .map(move |(i, v)| vec![t, grid.x(i), v.re, v.im, v.norm_sqr()])
        });
        write_table(out, header, &["t", "x", "re", "im", "rho"], rows)
    }
}

/// Frames are kept every ⌈n_steps/500⌉ steps, plus the final step.
pub fn frame_stride(n_steps: usize) -> usize {
    n_steps.div_ceil(MAX_FRAMES).max(1)
}

/// Evolves `psi0`, calling `observe(step, t, ψ)` after every step
/// (and once with step 0 for the initial state).
pub fn evolve_with(
    psi0: &GridWaveFunction,
    cfg: &EvolutionConfig,
    mut observe: impl FnMut(usize, f64, &GridWaveFunction),
) -> Result<GridWaveFunction> {
    cfg.validate(psi0)?;
    let h = &cfg.hamiltonian;
    let mut psi = psi0.clone();
    observe(0, 0.0, &psi);

    match &cfg.drive {
        None => {
            let mut prop = Propagator::new(h, cfg.dt, cfg.stepper)?;
            for step in 1..=cfg.n_steps {
                prop.step(psi.values_mut());
                check_edges(&psi, step)?;
                observe(step, step as f64 * cfg.dt, &psi);
            }
        }
        Some(drive) => {
            // H is re-factored each step at the midpoint time, which keeps
            // second-order accuracy for any stepper.
            let shifts: Vec<Complex64> = cfg
                .stepper
                .shifts()
                .into_iter()
                .map(|s| s * (cfg.dt / h.hbar))
                .collect();
            let mut scratch = vec![Complex64::new(0.0, 0.0); h.grid.n_points];
            let mut extra = vec![0.0; h.grid.n_points];
            for step in 1..=cfg.n_steps {
                let t_mid = (step as f64 - 0.5) * cfg.dt;
                let g = (drive.envelope)(t_mid);
                for (e, v) in extra.iter_mut().zip(&drive.profile) {
                    *e = v * g;
                }
                for &s in &shifts {
                    let lu = factor_shift(h, s, Some(&extra))?;
                    apply_factor(h, s, &lu, Some(&extra), psi.values_mut(), &mut scratch);
                }
                check_edges(&psi, step)?;
                observe(step, step as f64 * cfg.dt, &psi);
            }
        }
    }
    Ok(psi)
}

fn check_edges(psi: &GridWaveFunction, step: usize) -> Result<()> {
    let amplitude = psi.edge_amplitude();
    if amplitude > LEAK_THRESHOLD || !amplitude.is_finite() {
        return Err(Error::BoundaryLeak { step, amplitude });
    }
    Ok(())
}

/// Evolves `psi0` and keeps a decimated trajectory.
pub fn evolve(psi0: &GridWaveFunction, cfg: &EvolutionConfig) -> Result<Trajectory> {
    let stride = frame_stride(cfg.n_steps);
    let mut times = Vec::new();
    let mut frames = Vec::new();
    let last = cfg.n_steps;
    evolve_with(psi0, cfg, |step, t, psi| {
        if step % stride == 0 || step == last {
            times.push(t);
            frames.push(psi.clone());
        }
    })?;
    Ok(Trajectory {
        times,
        frames,
        stride,
    })
}

/// Mean energy from the time-derivative form, propagating ±δt with the
/// fourth-order stepper (δt = 10⁻⁵/ω_c).
pub fn derivative_form_energy(
    psi: &GridWaveFunction,
    h: &Hamiltonian,
    units: &OscillatorUnits,
) -> Result<f64> {
    let dt = derivative_step(units);
    let mut forward = Propagator::new(h, dt, Stepper::Pade4)?;
    let mut backward = Propagator::new(h, -dt, Stepper::Pade4)?;
    let mut next = psi.clone();
    forward.step(next.values_mut());
    let mut prev = psi.clone();
    backward.step(prev.values_mut());
    Ok(time_derivative_energy(&prev, psi, &next, dt, h.hbar))
}

/// One classical period 2π/ω_c.
pub fn period(units: &OscillatorUnits) -> f64 {
    2.0 * PI / units.omega_c()
}
