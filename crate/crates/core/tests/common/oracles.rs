//! Reference computations that share no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use ode_solvers::{DVector, Dop853, OutputType, System};

/// Oscillator eigenfunction from the Hermite polynomial and the explicit
/// normalisation sqrt(α / (2ⁿ n! √π)). Fine up to n ≈ 60.
pub fn hermite_function(n: usize, alpha: f64, x: f64) -> f64 {
    let xi = alpha * x;
    let mut h_prev = 1.0;
    let mut h = 2.0 * xi;
    if n == 0 {
        h = 1.0;
    } else {
        for k in 1..n {
            let next = 2.0 * xi * h - 2.0 * k as f64 * h_prev;
            h_prev = h;
            h = next;
        }
    }
    let mut norm = alpha / PI.sqrt();
    for k in 1..=n {
        norm /= 2.0 * k as f64;
    }
    norm.sqrt() * h * (-0.5 * xi * xi).exp()
}

/// Expansion coefficients of the ground state displaced by `a`:
/// c_n = e^{−ξ²/4} (ξ/√2)ⁿ / √(n!), ξ = αa.
pub fn displaced_coefficients(alpha: f64, a: f64, n_max: usize) -> Vec<f64> {
    let xi = alpha * a;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = (-0.25 * xi * xi).exp();
    out.push(c);
    for n in 1..=n_max {
        c *= xi / (2.0 * n as f64).sqrt();
        out.push(c);
    }
    out
}

/// ⟨n|x|m⟩ in natural units from the ladder operators.
pub fn ladder_x(n: usize, m: usize) -> f64 {
    if n == m + 1 {
        (n as f64 / 2.0).sqrt()
    } else if m == n + 1 {
        (m as f64 / 2.0).sqrt()
    } else {
        0.0
    }
}

/// ⟨n|x²|m⟩ in natural units.
pub fn ladder_x2(n: usize, m: usize) -> f64 {
    if n == m {
        n as f64 + 0.5
    } else if n == m + 2 {
        ((n * (n - 1)) as f64).sqrt() / 2.0
    } else if m == n + 2 {
        ((m * (m - 1)) as f64).sqrt() / 2.0
    } else {
        0.0
    }
}

/// Scattered frequency from eliminating the electron velocity.
pub fn compton_closed_form(omega: f64, theta: f64, hbar: f64, rest_energy: f64) -> f64 {
    omega / (1.0 + hbar * omega / rest_energy * (1.0 - theta.cos()))
}

/// Squeezed Gaussian evolved under the oscillator Hamiltonian, written
/// independently from Gaussian-width propagation:
/// ψ(x,t) = (β²/π)^{1/4} / sqrt(cos t + i(β²/α²) sin t)
///          · exp(−x²/2 · (β² cos t + iα² sin t)/(α²cos t + iβ² sin t) · α²)
/// in units ħ = m = 1 with ω = α².
pub fn squeezed_wavefunction(alpha: f64, beta: f64, x: f64, t: f64) -> Complex64 {
    let w = alpha * alpha;
    let (s, c) = (w * t).sin_cos();
    let b2 = beta * beta;
    let i = Complex64::new(0.0, 1.0);
    let den = Complex64::new(c, 0.0) + i * (b2 / w) * s;
    let k = w * (b2 * c + i * w * s) / (w * c + i * b2 * s);
    (b2 / PI).powf(0.25) / den.sqrt() * (-0.5 * k * x * x).exp()
}

/// max |iψ_t + ½ψ_xx − ½ω²x²ψ| with seven-point (sixth-order) central
/// differences of step `h` in both x and t (ħ = m = 1).
pub fn schrodinger_residual(
    psi: impl Fn(f64, f64) -> Complex64,
    omega: f64,
    xs: &[f64],
    ts: &[f64],
    h: f64,
) -> f64 {
    const FIRST: [f64; 3] = [45.0, -9.0, 1.0];
    const SECOND: [f64; 4] = [-490.0, 270.0, -27.0, 2.0];
    let i = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for &t in ts {
        for &x in xs {
            let centre = psi(x, t);
            let mut dt = Complex64::new(0.0, 0.0);
            let mut dxx = SECOND[0] * centre;
            for k in 1..=3 {
                let s = k as f64 * h;
                dt += FIRST[k - 1] * (psi(x, t + s) - psi(x, t - s));
                dxx += SECOND[k] * (psi(x + s, t) + psi(x - s, t));
            }
            dt /= 60.0 * h;
            dxx /= 180.0 * h * h;
            let r = i * dt + 0.5 * dxx - 0.5 * omega * omega * x * x * centre;
            worst = worst.max(r.norm());
        }
    }
    worst
}

/// ⟨x⟩(t) of a harmonic oscillator (ω = 1) driven by the force
/// f₀ cos(Ωt), starting from rest at x = a.
pub fn forced_oscillator_position(a: f64, f0: f64, big_omega: f64, t: f64) -> f64 {
    let particular = f0 / (1.0 - big_omega * big_omega);
    (a - particular) * t.cos() + particular * (big_omega * t).cos()
}

/// Fixed-step RK4 of the exact two-level equations, returning the upper
/// population at the end.
pub fn two_level_rk4(eta: f64, omega_nm: f64, omega: f64, t_end: f64, steps: usize) -> f64 {
    let h = t_end / steps as f64;
    let i = Complex64::new(0.0, -1.0);
    let rhs = |t: f64, u: Complex64, l: Complex64| {
        let g = 2.0 * eta * (omega * t).cos();
        let ph = Complex64::from_polar(1.0, omega_nm * t);
        (i * g * ph * l, i * g * ph.conj() * u)
    };
    let (mut u, mut l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    for k in 0..steps {
        let t = k as f64 * h;
        let (a1, b1) = rhs(t, u, l);
        let (a2, b2) = rhs(t + 0.5 * h, u + 0.5 * h * a1, l + 0.5 * h * b1);
        let (a3, b3) = rhs(t + 0.5 * h, u + 0.5 * h * a2, l + 0.5 * h * b2);
        let (a4, b4) = rhs(t + h, u + h * a3, l + h * b3);
        u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        l += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    u.norm_sqr()
}

/// Few-level system driven by V = F e^{−iωt} + F† e^{iωt} + F′ e^{−iω′t} + F′† e^{iω′t}.
pub struct ToyLevels {
    pub energies: Vec<f64>,
    pub f: Vec<Vec<Complex64>>,
    pub f_prime: Vec<Vec<Complex64>>,
    pub hbar: f64,
}

struct SecondOrderRhs<'a> {
    toy: &'a ToyLevels,
    m: usize,
    omega: f64,
    omega_prime: f64,
}

// State layout (re, im interleaved): a_F[k], a_G'[k], a2[n], then time.
impl System<f64, DVector<f64>> for SecondOrderRhs<'_> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let toy = self.toy;
        let dim = toy.energies.len();
        let t = y[6 * dim];
        let w = |a: usize, b: usize| (toy.energies[a] - toy.energies[b]) / toy.hbar;
        let get = |block: usize, k: usize| {
            Complex64::new(y[2 * (block * dim + k)], y[2 * (block * dim + k) + 1])
        };
        let minus_i_over_hbar = Complex64::new(0.0, -1.0 / toy.hbar);
        let mut put = |block: usize, k: usize, v: Complex64| {
            dy[2 * (block * dim + k)] = v.re;
            dy[2 * (block * dim + k) + 1] = v.im;
        };
        let m = self.m;
        for k in 0..dim {
            // first order, one drive component each
            let af = minus_i_over_hbar
                * toy.f[k][m]
                * Complex64::from_polar(1.0, (w(k, m) - self.omega) * t);
            let ag = minus_i_over_hbar
                * toy.f_prime[m][k].conj()
                * Complex64::from_polar(1.0, (w(k, m) + self.omega_prime) * t);
            put(0, k, af);
            put(1, k, ag);
        }
        for n in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                // G′ acting on the F part, F acting on the G′ part
                acc += toy.f_prime[k][n].conj()
                    * Complex64::from_polar(1.0, (w(n, k) + self.omega_prime) * t)
                    * get(0, k);
                acc += toy.f[n][k]
                    * Complex64::from_polar(1.0, (w(n, k) - self.omega) * t)
                    * get(1, k);
            }
            put(2, n, minus_i_over_hbar * acc);
        }
        dy[6 * dim] = 1.0;
    }
}

/// a_n^{(2)}(t) − a_n^{(2)}(0) for every n by integrating the second-order
/// equation iħ ȧ_n = Σ_k V_nk a_k with the two resonant pairings of drive
/// terms. The first-order amplitudes start on their particular solutions
/// so that no free (non-resonant) oscillation is mixed in.
pub fn second_order_by_integration(
    toy: &ToyLevels,
    m: usize,
    omega: f64,
    omega_prime: f64,
    t: f64,
) -> Vec<Complex64> {
    let dim = toy.energies.len();
    let w = |a: usize, b: usize| (toy.energies[a] - toy.energies[b]) / toy.hbar;
    let mut y0 = DVector::<f64>::zeros(6 * dim + 1);
    for k in 0..dim {
        let af = -toy.f[k][m] / (toy.hbar * (w(k, m) - omega));
        let ag = -toy.f_prime[m][k].conj() / (toy.hbar * (w(k, m) + omega_prime));
        y0[2 * k] = af.re;
        y0[2 * k + 1] = af.im;
        y0[2 * (dim + k)] = ag.re;
        y0[2 * (dim + k) + 1] = ag.im;
    }
    let rhs = SecondOrderRhs {
        toy,
        m,
        omega,
        omega_prime,
    };
    let mut solver = Dop853::from_param(
        rhs,
        0.0,
        t,
        t,
        y0,
        1e-13,
        1e-15,
        0.9,
        0.0,
        0.333,
        6.0,
        0.05,
        0.0,
        u32::MAX,
        u32::MAX,
        OutputType::Sparse,
    );
    solver.integrate().expect("oracle integration");
    let y = solver.y_out().last().expect("final state").clone();
    (0..dim)
        .map(|n| Complex64::new(y[2 * (2 * dim + n)], y[2 * (2 * dim + n) + 1]))
        .collect()
}
