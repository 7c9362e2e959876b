//! Bracketed scalar root finding (Brent's method).

use crate::error::{Error, Result};

/// Finds x in [a, b] with f(x) = 0, given f(a) and f(b) of opposite sign.
///
/// Iterates until the bracket is narrower than `xtol + 4ε|x|`.
pub fn brent(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!(
            "f({a}) = {fa:e} and f({b}) = {fb:e} do not bracket a root"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, falling back to secant
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NoRoot(format!("non-finite value at x = {b}")));
        }
    }
    Err(Error::NoRoot(format!(
        "no convergence after {max_iter} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn finds_sqrt_two() {
        let x = brent(|x| x * x - 2.0, 0.0, 2.0, 0.0, 100).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 4e-16);
    }

    #[test]
    fn endpoint_roots() {
        assert_eq!(brent(|x| x, 0.0, 1.0, 0.0, 10).unwrap(), 0.0);
        assert_eq!(brent(|x| x - 1.0, 0.0, 1.0, 0.0, 10).unwrap(), 1.0);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 0.0, 50),
            Err(Error::NoRoot(_))
        ));
    }

    #[test]
    fn flat_function_converges() {
        let x = brent(|x: f64| (x - 0.3).powi(3), 0.0, 1.0, 1e-14, 200).unwrap();
        assert!((x - 0.3).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn cubic_roots(r in -10.0f64..10.0) {
            let f = |x: f64| (x - r) * (x * x + 1.0);
            let x = brent(f, -11.0, 11.0, 0.0, 200).unwrap();
            prop_assert!((x - r).abs() <= 1e-13 * (1.0 + r.abs()));
        }
    }
}
