//! Time-dependent perturbation theory for a periodically driven system.
//!
//! The drive is `V(t) = F e^{−iωt} + F† e^{iωt}` (plus an optional second
//! pair at ω′). Off resonance the first-order amplitudes are small and
//! linear in F; at resonance the population of the upper level cycles
//! between 0 and 1 independent of the drive strength, which only sets
//! the cycle time.

use std::f64::consts::PI;

use num_complex::Complex64;
use ode_solvers::{Dop853, OutputType, SVector, System};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{eigenenergy, EigenTable, Grid, DEFAULT_POINTS};
use crate::constants::OscillatorUnits;
use crate::error::{Error, Result};

/// Relative size |ω_nm ∓ ω|/ω below which a denominator counts as resonant.
pub const RESONANCE_THRESHOLD: f64 = 1e-6;
/// Default tolerance of [`check_raman_condition`] (natural units).
pub const DEFAULT_RAMAN_TOLERANCE: f64 = 1e-9;
/// First-order amplitude |F_nm|/(ħ|ω_nm ∓ ω|) above which a scan point is
/// handed to the two-level integrator.
pub const SCAN_FLAG_RATIO: f64 = 0.1;
/// Tolerance handed to the adaptive integrator.
pub const ODE_TOLERANCE: f64 = 1e-12;

/// Real coupling profiles f(x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Constant,
    Linear,
    Quadratic,
    Cubic,
}

impl Coupling {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Coupling::Constant => 1.0,
            Coupling::Linear => x,
            Coupling::Quadratic => x * x,
            Coupling::Cubic => x * x * x,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "1" | "const" | "constant" => Some(Coupling::Constant),
            "x" => Some(Coupling::Linear),
            "x2" | "x^2" => Some(Coupling::Quadratic),
            "x3" | "x^3" => Some(Coupling::Cubic),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Coupling::Constant => "1",
            Coupling::Linear => "x",
            Coupling::Quadratic => "x2",
            Coupling::Cubic => "x3",
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Coupling::Constant => 0,
            Coupling::Linear => 1,
            Coupling::Quadratic => 2,
            Coupling::Cubic => 3,
        }
    }
}

/// Coupling operator, drive strength and frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub coupling: Coupling,
    pub amplitude: f64,
    pub omega: f64,
    pub omega_prime: Option<f64>,
}

impl PerturbationSpec {
    pub fn new(coupling: Coupling, amplitude: f64, omega: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::invalid(
                "amplitude",
                format!("must be non-negative, got {amplitude}"),
            ));
        }
        check_frequency("omega", omega)?;
        Ok(Self {
            coupling,
            amplitude,
            omega,
            omega_prime: None,
        })
    }

    pub fn with_second_frequency(mut self, omega_prime: f64) -> Result<Self> {
        check_frequency("omega_prime", omega_prime)?;
        self.omega_prime = Some(omega_prime);
        Ok(self)
    }

    /// Matrix elements of `amplitude · f(x)` over the oscillator basis.
    pub fn matrix_elements(&self, units: &OscillatorUnits, n_max: usize) -> Result<MatrixElements> {
        Ok(matrix_elements(&|x| self.coupling.eval(x), units, n_max)?.scaled(self.amplitude))
    }
}

fn check_frequency(name: &'static str, w: f64) -> Result<()> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::invalid(name, format!("must be positive, got {w}")));
    }
    Ok(())
}

/// F_nm and the Bohr frequencies ω_nm = (E_n − E_m)/ħ.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElements {
    f: Vec<Vec<Complex64>>,
    energies: Vec<f64>,
    hbar: f64,
}

impl MatrixElements {
    /// Arbitrary level energies and drive matrix (F need not be Hermitian).
    pub fn from_parts(energies: Vec<f64>, f: Vec<Vec<Complex64>>, hbar: f64) -> Result<Self> {
        let n = energies.len();
        if n == 0 || f.len() != n || f.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(
                "f",
                "matrix must be square and match the level count",
            ));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::invalid("hbar", "must be positive"));
        }
        Ok(Self { f, energies, hbar })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn f(&self, n: usize, m: usize) -> Complex64 {
        self.f[n][m]
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.energies[n]
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn omega(&self, n: usize, m: usize) -> f64 {
        (self.energies[n] - self.energies[m]) / self.hbar
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for row in &mut self.f {
            for v in row {
                *v *= s;
            }
        }
        self
    }
}

/// ⟨ψ_n|f|ψ_m⟩ by trapezoid quadrature.
///
/// The grid spans ±(sqrt(2 n_max + 1) + 10)/α so that every basis function
/// has decayed at the edges. Columns m ≤ n_max/2 must keep their weight
/// inside the basis: Σ_n |F_nm|² ≥ (1 − 10⁻⁶)⟨ψ_m|f²|ψ_m⟩.
pub fn matrix_elements(
    f: &dyn Fn(f64) -> f64,
    units: &OscillatorUnits,
    n_max: usize,
) -> Result<MatrixElements> {
    #![allow(clippy::needless_range_loop)]
    let alpha = units.alpha();
    let half = ((2.0 * n_max as f64 + 1.0).sqrt() + 10.0) / alpha;
    let grid = Grid::symmetric(half, DEFAULT_POINTS.max(64 * (n_max + 1)))?;
    let table = EigenTable::new(units, grid, n_max)?;
    let samples: Vec<f64> = grid.points().iter().map(|&x| f(x)).collect();
    let dim = n_max + 1;
    let mut mat = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for n in 0..dim {
        for m in n..dim {
            let v = table.matrix_element(n, m, &samples);
            mat[n][m] = Complex64::new(v, 0.0);
            mat[m][n] = Complex64::new(v, 0.0);
        }
    }
    let squared: Vec<f64> = samples.iter().map(|v| v * v).collect();
    for m in 0..=n_max / 2 {
        let total = table.matrix_element(m, m, &squared);
        let captured: f64 = (0..dim).map(|n| mat[n][m].norm_sqr()).sum();
        if total > 0.0 && captured < (1.0 - 1e-6) * total {
            return Err(Error::TailTooLarge {
                captured: captured / total,
                n_max,
            });
        }
    }
    let energies = (0..dim).map(|n| eigenenergy(n, units)).collect();
    MatrixElements::from_parts(energies, mat, units.hbar())
}

fn first_order_term(me: &MatrixElements, m: usize, n: usize, omega: f64, t: f64) -> Complex64 {
    let hbar = me.hbar();
    let w_nm = me.omega(n, m);
    let i = Complex64::new(0.0, 1.0);
    let absorb = -me.f(n, m) / (hbar * (w_nm - omega)) * (i * (w_nm - omega) * t).exp();
    let emit = -me.f(m, n).conj() / (hbar * (w_nm + omega)) * (i * (w_nm + omega) * t).exp();
    absorb + emit
}

/// First-order amplitudes a_n^{(1)}(t) for a system starting in level m:
///
/// ```text
/// a_n = −F_nm e^{i(ω_nm−ω)t} / (ħ(ω_nm−ω)) − F*_mn e^{i(ω_nm+ω)t} / (ħ(ω_nm+ω)),   n ≠ m
/// ```
///
/// The entry for n = m is zero.
pub fn first_order_amplitudes(
    me: &MatrixElements,
    m: usize,
    omega: f64,
    t: f64,
) -> Result<Vec<Complex64>> {
    check_frequency("omega", omega)?;
    if m >= me.dim() {
        return Err(Error::invalid(
            "m",
            format!("level {m} outside basis of {}", me.dim()),
        ));
    }
    let threshold = RESONANCE_THRESHOLD * omega;
    (0..me.dim())
        .map(|n| {
            if n == m {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let w_nm = me.omega(n, m);
            for denominator in [w_nm - omega, w_nm + omega] {
                if denominator.abs() < threshold {
                    return Err(Error::ResonantDenominator { n, denominator });
                }
            }
            Ok(first_order_term(me, m, n, omega, t))
        })
        .collect()
}

/// Exact-resonance population ½[1 − cos(2|η|t)].
pub fn rabi_population(eta: f64, t: f64) -> f64 {
    0.5 * (1.0 - (2.0 * eta.abs() * t).cos())
}

/// Rabi cycle length π/|η|.
pub fn rabi_period(eta: f64) -> f64 {
    PI / eta.abs()
}

/// Sinusoidally driven two-level system, coupling η = |F_nm|/ħ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelDrive {
    pub eta: f64,
    pub omega_nm: f64,
    pub omega: f64,
}

/// Sampled level populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationTrajectory {
    pub times: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl PopulationTrajectory {
    pub fn max_norm_error(&self) -> f64 {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| (u + l - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Interaction-picture amplitudes (c_upper, c_lower) as real components,
/// with time carried as a fifth component.
///
/// ode_solvers 0.6.2 evaluates the twelfth Dop853 stage at c = 0 instead of
/// c = 1, which breaks explicit time dependence; an autonomous system only
/// sees the (correct) A-row sums.
struct TwoLevelSystem {
    drive: TwoLevelDrive,
}

type State5 = SVector<f64, 5>;

impl System<f64, State5> for TwoLevelSystem {
    fn system(&self, _t: f64, y: &State5, dy: &mut State5) {
        let d = &self.drive;
        let t = y[4];
        let g = 2.0 * d.eta * (d.omega * t).cos();
        let upper = Complex64::new(y[0], y[1]);
        let lower = Complex64::new(y[2], y[3]);
        let phase = Complex64::from_polar(1.0, d.omega_nm * t);
        let minus_i = Complex64::new(0.0, -1.0);
        let du = minus_i * g * phase * lower;
        let dl = minus_i * g * phase.conj() * upper;
        dy[0] = du.re;
        dy[1] = du.im;
        dy[2] = dl.re;
        dy[3] = dl.im;
        dy[4] = 1.0;
    }
}

/// Integrates the exact coupled amplitude equations
///
/// ```text
/// i ċ_n = 2η cos(ωt) e^{iω_nm t} c_m,   i ċ_m = 2η cos(ωt) e^{−iω_nm t} c_n
/// ```
///
/// from c_m(0) = 1, sampling `samples + 1` evenly spaced times on [0, t_max].
pub fn two_level_integrate(
    drive: TwoLevelDrive,
    t_max: f64,
    samples: usize,
) -> Result<PopulationTrajectory> {
    if !(drive.eta.is_finite() && drive.eta >= 0.0) {
        return Err(Error::invalid("eta", "must be non-negative"));
    }
    check_frequency("omega", drive.omega)?;
    if !(t_max.is_finite() && t_max > 0.0) || samples == 0 {
        return Err(Error::invalid(
            "t_max",
            "need t_max > 0 and at least one sample",
        ));
    }
    let dx = t_max / samples as f64;
    let y0 = State5::from([0.0, 0.0, 1.0, 0.0, 0.0]);
    let fastest = drive.omega.max(drive.omega_nm.abs());
    let h_max = (0.25 * 2.0 * PI / fastest).min(t_max);
    // the dense output at the final abscissa is unreliable, so run half a
    // sample past the end and keep only the requested points
    let mut solver = Dop853::from_param(
        TwoLevelSystem { drive },
        0.0,
        t_max + 0.5 * dx,
        dx,
        y0,
        ODE_TOLERANCE,
        ODE_TOLERANCE,
        0.9,
        0.0,
        0.333,
        6.0,
        h_max,
        0.0,
        u32::MAX,
        u32::MAX,
        OutputType::Dense,
    );
    solver
        .integrate()
        .map_err(|e| Error::StepFailure(e.to_string()))?;
    let mut out = PopulationTrajectory {
        times: Vec::with_capacity(samples + 1),
        upper: Vec::with_capacity(samples + 1),
        lower: Vec::with_capacity(samples + 1),
    };
    for (t, y) in solver.x_out().iter().zip(solver.y_out()).take(samples + 1) {
        out.times.push(*t);
        out.upper.push(y[0] * y[0] + y[1] * y[1]);
        out.lower.push(y[2] * y[2] + y[3] * y[3]);
    }
    Ok(out)
}

/// Rabi cycle length read off a trajectory: the upper population is
/// averaged over one drive period, then the first upward and downward
/// crossings of ½ are located; they lie half a cycle apart.
pub fn measure_rabi_period(traj: &PopulationTrajectory, drive_period: f64) -> Option<f64> {
    let n = traj.times.len();
    if n < 3 {
        return None;
    }
    let dt = traj.times[1] - traj.times[0];
    let window = ((drive_period / dt).round() as usize).max(1);
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + traj.upper[i];
    }
    let smooth: Vec<(f64, f64)> = (window..=n)
        .map(|end| {
            let start = end - window;
            let mean = (prefix[end] - prefix[start]) / window as f64;
            let t = 0.5 * (traj.times[start] + traj.times[end - 1]);
            (t, mean)
        })
        .collect();
    let crossing = |from: usize, rising: bool| -> Option<(usize, f64)> {
        (from..smooth.len().saturating_sub(1)).find_map(|i| {
            let (t0, p0) = smooth[i];
            let (t1, p1) = smooth[i + 1];
            let hit = if rising {
                p0 < 0.5 && p1 >= 0.5
            } else {
                p0 > 0.5 && p1 <= 0.5
            };
            hit.then(|| (i, t0 + (0.5 - p0) * (t1 - t0) / (p1 - p0)))
        })
    };
    let (i_up, t_up) = crossing(0, true)?;
    let (_, t_down) = crossing(i_up + 1, false)?;
    Some(2.0 * (t_down - t_up))
}

/// ω = (E_n − E_m)/ħ, signed.
pub fn resonance_frequency(e_n: f64, e_m: f64, hbar: f64) -> Result<f64> {
    if e_n == e_m {
        return Err(Error::DegeneratePair { energy: e_n });
    }
    Ok((e_n - e_m) / hbar)
}

/// w = (2π/ħ)|F|².
pub fn transition_rate(f: Complex64, hbar: f64) -> f64 {
    2.0 * PI / hbar * f.norm_sqr()
}

/// How a scan point's contribution from one level was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMethod {
    FirstOrder,
    TwoLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub omega: f64,
    pub transfer_probability: f64,
}

/// A (frequency, level) pair routed to the two-level integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFlag {
    pub omega: f64,
    pub level: usize,
    pub omega_nm: f64,
    pub method: ScanMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub flags: Vec<ResonanceFlag>,
}

impl ScanResult {
    /// Abscissa of the largest transfer probability.
    pub fn peak(&self) -> Option<ScanPoint> {
        self.points
            .iter()
            .copied()
            .fold(None, |best: Option<ScanPoint>, p| match best {
                Some(b) if b.transfer_probability >= p.transfer_probability => Some(b),
                _ => Some(p),
            })
    }
}

/// Drive-period average of a two-level population ending at `t_probe`.
fn averaged_two_level(drive: TwoLevelDrive, t_probe: f64) -> Result<f64> {
    const SAMPLES_PER_PERIOD: usize = 64;
    let period = 2.0 * PI / drive.omega;
    let samples = ((t_probe / period).ceil() as usize).max(1) * SAMPLES_PER_PERIOD;
    let traj = two_level_integrate(drive, t_probe, samples)?;
    let start = traj.times.partition_point(|&t| t < t_probe - period);
    let slice = &traj.upper[start..];
    let times = &traj.times[start..];
    if slice.len() < 2 {
        return Ok(*traj.upper.last().unwrap_or(&0.0));
    }
    let mut acc = 0.0;
    for i in 1..slice.len() {
        acc += 0.5 * (slice[i] + slice[i - 1]) * (times[i] - times[i - 1]);
    }
    Ok(acc / (times[times.len() - 1] - times[0]))
}

fn scan_point(
    me: &MatrixElements,
    m: usize,
    omega: f64,
    t_probe: f64,
) -> Result<(ScanPoint, Vec<ResonanceFlag>)> {
    let hbar = me.hbar();
    let mut total = 0.0;
    let mut flags = Vec::new();
    // quadrature leaves selection-rule zeros at round-off level
    let largest = (0..me.dim())
        .map(|n| me.f(n, m).norm().max(me.f(m, n).norm()))
        .fold(0.0, f64::max);
    let negligible = 1e-10 * largest;
    for n in (0..me.dim()).filter(|&n| n != m) {
        let w_nm = me.omega(n, m);
        let f_nm = me.f(n, m).norm();
        if f_nm <= negligible && me.f(m, n).norm() <= negligible {
            continue;
        }
        let detuning = (w_nm.abs() - omega).abs();
        if f_nm / (hbar * detuning) >= SCAN_FLAG_RATIO {
            let drive = TwoLevelDrive {
                eta: f_nm / hbar,
                omega_nm: w_nm.abs(),
                omega,
            };
            total += averaged_two_level(drive, t_probe)?;
            flags.push(ResonanceFlag {
                omega,
                level: n,
                omega_nm: w_nm,
                method: ScanMethod::TwoLevel,
            });
        } else {
            // the cross term averages out over a drive period
            let a = me.f(n, m).norm() / (hbar * (w_nm - omega));
            let b = me.f(m, n).norm() / (hbar * (w_nm + omega));
            total += a * a + b * b;
        }
    }
    Ok((
        ScanPoint {
            omega,
            transfer_probability: total,
        },
        flags,
    ))
}

/// Probability transferred out of level m, averaged over one drive period
/// ending at `t_probe`, for each drive frequency in `omegas`.
///
/// Levels whose first-order amplitude is not small (ratio ≥ 0.1) are
/// integrated exactly as two-level systems instead.
pub fn resonance_scan(
    me: &MatrixElements,
    m: usize,
    omegas: &[f64],
    t_probe: f64,
) -> Result<ScanResult> {
    if m >= me.dim() {
        return Err(Error::invalid(
            "m",
            format!("level {m} outside basis of {}", me.dim()),
        ));
    }
    if !(t_probe.is_finite() && t_probe > 0.0) {
        return Err(Error::invalid("t_probe", "must be positive"));
    }
    for &w in omegas {
        check_frequency("omega", w)?;
    }
    let results: Vec<(ScanPoint, Vec<ResonanceFlag>)> = omegas
        .par_iter()
        .map(|&w| scan_point(me, m, w, t_probe))
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(results.len());
    let mut flags = Vec::new();
    for (p, f) in results {
        points.push(p);
        flags.extend(f);
    }
    Ok(ScanResult { points, flags })
}

/// Half a Rabi cycle of the strongest coupling out of level m: the time at
/// which an exactly resonant level is fully populated.
pub fn default_probe_time(me: &MatrixElements, m: usize) -> Option<f64> {
    let eta = (0..me.dim())
        .filter(|&n| n != m)
        .map(|n| me.f(n, m).norm() / me.hbar())
        .fold(0.0, f64::max);
    (eta > 0.0).then(|| PI / (2.0 * eta))
}

/// ħω + E_m = ħω′ + E_n within `tolerance` (energy units).
pub fn check_raman_condition(
    omega: f64,
    omega_prime: f64,
    e_m: f64,
    e_n: f64,
    hbar: f64,
    tolerance: f64,
) -> bool {
    (hbar * omega + e_m - hbar * omega_prime - e_n).abs() < tolerance
}

/// Resonant part of the second-order amplitude:
///
/// ```text
/// a_n = e^{iΩt} / (ħ²Ω) · Σ_k [ F_km F′*_kn / (ω_km − ω) + F_nk F′*_mk / (ω_km + ω′) ],
/// Ω = ω_nm − ω + ω′
/// ```
///
/// `me` holds F (absorbed at ω) and `me_prime` holds F′ (emitted at ω′);
/// pass the same table twice for a single coupling operator. Fails with
/// `SecondOrderResonance` exactly when the Raman condition holds to within
/// 10⁻⁶ħω.
pub fn second_order_amplitude(
    me: &MatrixElements,
    me_prime: &MatrixElements,
    m: usize,
    n: usize,
    omega: f64,
    omega_prime: f64,
    t: f64,
) -> Result<Complex64> {
    check_frequency("omega", omega)?;
    check_frequency("omega_prime", omega_prime)?;
    let dim = me.dim();
    if me_prime.dim() != dim || me_prime.energies != me.energies {
        return Err(Error::invalid(
            "me_prime",
            "level structure differs from `me`",
        ));
    }
    if m >= dim || n >= dim {
        return Err(Error::invalid("n", "level outside basis"));
    }
    let hbar = me.hbar();
    if check_raman_condition(
        omega,
        omega_prime,
        me.energy(m),
        me.energy(n),
        hbar,
        RESONANCE_THRESHOLD * hbar * omega,
    ) {
        return Err(Error::SecondOrderResonance {
            detuning: me.omega(n, m) - omega + omega_prime,
        });
    }
    let big_omega = me.omega(n, m) - omega + omega_prime;
    let threshold = RESONANCE_THRESHOLD * omega;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..dim {
        let w_km = me.omega(k, m);
        for denominator in [w_km - omega, w_km + omega_prime] {
            if denominator.abs() < threshold {
                return Err(Error::IntermediatePole { k, denominator });
            }
        }
        sum += me.f(k, m) * me_prime.f(k, n).conj() / (w_km - omega);
        sum += me.f(n, k) * me_prime.f(m, k).conj() / (w_km + omega_prime);
    }
    let phase = Complex64::new(0.0, big_omega * t).exp();
    Ok(phase * sum / (hbar * hbar * big_omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::natural_units;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn two_levels(f: f64, w_nm: f64) -> MatrixElements {
        MatrixElements::from_parts(
            vec![0.0, w_nm],
            vec![vec![c(0.0), c(f)], vec![c(f), c(0.0)]],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn ladder_matrix_elements() {
        let u = natural_units();
        let me = matrix_elements(&|x| x, &u, 12).unwrap();
        for n in 0..=12 {
            for m in 0..=12 {
                let expected = if n == m + 1 {
                    ((m + 1) as f64 / 2.0).sqrt()
                } else if m == n + 1 {
                    (m as f64 / 2.0).sqrt()
                } else {
                    0.0
                };
                assert!((me.f(n, m).re - expected).abs() < 1e-9, "x_{n}{m}");
            }
        }
        assert!((me.f(1, 0).re - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn quadratic_selection_rule() {
        let me = matrix_elements(&|x| x * x, &natural_units(), 10).unwrap();
        for n in 0..=10usize {
            for m in 0..=10usize {
                let d = n.abs_diff(m);
                if d != 0 && d != 2 {
                    assert!(me.f(n, m).norm() < 1e-9);
                } else {
                    assert!(me.f(n, m).norm() > 0.1);
                }
            }
        }
    }

    #[test]
    fn constant_coupling_is_identity() {
        let me = matrix_elements(&|_| 1.0, &natural_units(), 15).unwrap();
        for n in 0..=15 {
            for m in 0..=15 {
                let expected = if n == m { 1.0 } else { 0.0 };
                assert!((me.f(n, m).re - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn frequency_matrix_is_antisymmetric() {
        let me = matrix_elements(&|x| x, &natural_units(), 6).unwrap();
        for n in 0..7 {
            for m in 0..7 {
                assert_eq!(me.omega(n, m), -me.omega(m, n));
                assert_eq!(me.f(m, n), me.f(n, m).conj());
            }
        }
    }

    #[test]
    fn steep_coupling_overflows_small_basis() {
        let err = matrix_elements(&|x| x.powi(6), &natural_units(), 4);
        assert!(matches!(err, Err(Error::TailTooLarge { .. })));
    }

    #[test]
    fn first_order_example() {
        let me = two_levels(0.01, 1.0);
        let a = first_order_amplitudes(&me, 0, 0.5, 0.0).unwrap();
        assert_relative_eq!(a[1].re, -0.01 / 0.5 - 0.01 / 1.5, max_relative = 1e-14);
        assert!((a[1].re + 0.026667).abs() < 1e-6);
        assert_eq!(a[0], c(0.0));
    }

    #[test]
    fn first_order_is_linear_in_amplitude() {
        let me = matrix_elements(&|x| x, &natural_units(), 8).unwrap();
        let a1 = first_order_amplitudes(&me.clone().scaled(1e-3), 2, 0.7, 3.3).unwrap();
        let a2 = first_order_amplitudes(&me.scaled(2e-3), 2, 0.7, 3.3).unwrap();
        for (x, y) in a1.iter().zip(&a2) {
            assert!((y - 2.0 * x).norm() <= 1e-15 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn first_order_grows_towards_the_pole() {
        let me = two_levels(0.01, 1.0);
        let mut last = 0.0;
        for k in 1..=5 {
            let w = 1.0 - 10f64.powi(-k);
            let a = first_order_amplitudes(&me, 0, w, 0.0).unwrap()[1].norm();
            assert!(a > last);
            last = a;
        }
        let err = first_order_amplitudes(&me, 0, 1.0 - 1e-8, 0.0);
        assert!(matches!(err, Err(Error::ResonantDenominator { n: 1, .. })));
    }

    #[test]
    fn rabi_values() {
        let eta = 0.37;
        assert_eq!(rabi_population(eta, 0.0), 0.0);
        assert_relative_eq!(
            rabi_population(eta, PI / (2.0 * eta)),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            rabi_population(eta, PI / (4.0 * eta)),
            0.5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn resonance_frequencies() {
        assert_eq!(resonance_frequency(1.5, 0.5, 1.0).unwrap(), 1.0);
        let u = natural_units();
        for n in 0..10 {
            for k in 1..4 {
                let w =
                    resonance_frequency(eigenenergy(n + k, &u), eigenenergy(n, &u), 1.0).unwrap();
                assert_relative_eq!(w, k as f64 * u.omega_c(), max_relative = 1e-14);
            }
        }
        assert!(matches!(
            resonance_frequency(2.0, 2.0, 1.0),
            Err(Error::DegeneratePair { .. })
        ));
        assert_eq!(resonance_frequency(0.5, 1.5, 1.0).unwrap(), -1.0);
    }

    #[test]
    fn rates() {
        assert_eq!(transition_rate(c(0.0), 1.0), 0.0);
        assert_relative_eq!(
            transition_rate(c(0.1), 1.0),
            2.0 * PI * 0.01,
            max_relative = 1e-15
        );
        assert!((transition_rate(c(0.1), 1.0) - 0.062832).abs() < 1e-6);
        let f = Complex64::new(0.03, -0.02);
        assert_relative_eq!(
            transition_rate(2.0 * f, 1.0),
            4.0 * transition_rate(f, 1.0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn second_order_example() {
        // one intermediate level k: F_km = F_kn* = 0.01
        let energies = vec![0.0, 0.3, 1.0];
        let (m, n, k) = (0, 1, 2);
        let mut f = vec![vec![c(0.0); 3]; 3];
        f[k][m] = c(0.01);
        f[k][n] = c(0.01);
        f[n][k] = c(0.01);
        f[m][k] = c(0.01);
        let me = MatrixElements::from_parts(energies, f, 1.0).unwrap();
        let a = second_order_amplitude(&me, &me, m, n, 0.5, 1.0, 0.0).unwrap();
        assert_relative_eq!(a.re, 3.125e-4, max_relative = 1e-12);
        assert!(a.im.abs() < 1e-18);
        let scaled = me.clone().scaled(3.0);
        let b = second_order_amplitude(&scaled, &scaled, m, n, 0.5, 1.0, 0.0).unwrap();
        assert_relative_eq!(b.re, 9.0 * a.re, max_relative = 1e-12);
        let zero = me.scaled(0.0);
        assert_eq!(
            second_order_amplitude(&zero, &zero, m, n, 0.5, 1.0, 0.0).unwrap(),
            c(0.0)
        );
    }

    #[test]
    fn raman_condition() {
        assert!(check_raman_condition(
            2.0,
            1.2,
            0.0,
            0.8,
            1.0,
            DEFAULT_RAMAN_TOLERANCE
        ));
        assert!(check_raman_condition(
            1.3,
            1.3,
            0.5,
            0.5,
            1.0,
            DEFAULT_RAMAN_TOLERANCE
        ));
        assert!(!check_raman_condition(
            2.0,
            1.0,
            0.0,
            0.8,
            1.0,
            DEFAULT_RAMAN_TOLERANCE
        ));
    }

    #[test]
    fn second_order_resonance_is_rejected() {
        let me = two_levels(0.01, 0.8);
        let err = second_order_amplitude(&me, &me, 0, 1, 2.0, 1.2, 0.0);
        assert!(matches!(err, Err(Error::SecondOrderResonance { .. })));
        // ω_km − ω = 0 for k = 1
        let err = second_order_amplitude(&me, &me, 0, 1, 0.8, 0.1, 0.0);
        assert!(matches!(err, Err(Error::IntermediatePole { k: 1, .. })));
    }

    #[test]
    fn undriven_two_level_stays_put() {
        let traj = two_level_integrate(
            TwoLevelDrive {
                eta: 1e-12,
                omega_nm: 1.0,
                omega: 1.0,
            },
            200.0,
            100,
        )
        .unwrap();
        assert!(traj.upper.iter().all(|&p| p < 1e-10));
    }

    #[test]
    fn detuned_drive_stays_low() {
        let eta = 1e-2;
        let drive = TwoLevelDrive {
            eta,
            omega_nm: 1.0,
            omega: 1.0 + 10.0 * eta,
        };
        let traj = two_level_integrate(drive, 3.0 * PI / eta, 3000).unwrap();
        let peak = traj.upper.iter().cloned().fold(0.0, f64::max);
        // generalized Rabi: η²/(η² + Δ²/4) = 1/26
        assert!(peak < 0.05, "{peak}");
        assert!(peak > 0.03, "{peak}");
        assert!(traj.max_norm_error() < 1e-9);
    }

    #[test]
    fn measured_period_matches_rabi() {
        let eta = 1e-2;
        let drive = TwoLevelDrive {
            eta,
            omega_nm: 1.0,
            omega: 1.0,
        };
        let traj = two_level_integrate(drive, 1.2 * rabi_period(eta), 20_000).unwrap();
        let period = measure_rabi_period(&traj, 2.0 * PI).unwrap();
        assert!((period / rabi_period(eta) - 1.0).abs() < 1e-2, "{period}");
    }

    #[test]
    fn scan_peaks_at_level_spacing() {
        let u = natural_units();
        let me = matrix_elements(&|x| x, &u, 8).unwrap().scaled(1e-3);
        let omegas: Vec<f64> = (0..=40).map(|i| 0.5 + 0.05 * i as f64).collect();
        let t_probe = default_probe_time(&me, 0).unwrap();
        let scan = resonance_scan(&me, 0, &omegas, t_probe).unwrap();
        let peak = scan.peak().unwrap();
        assert!((peak.omega - 1.0).abs() < 1e-12);
        assert!(!scan.flags.is_empty());
        assert!(scan.flags.iter().all(|f| f.level == 1));
    }
}
