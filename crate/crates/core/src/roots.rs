//! Bracketed scalar root finding (Brent's method).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Root<T> {
    pub x: T,
}

/// Finds a zero of `f` in `[a, b]` given `f(a)` and `f(b)` of opposite sign.
///
/// Stops when the bracket is narrower than `x_tol` (floored at a few ulps of the root) or when
/// `|f| <= f_tol`.
pub(crate) fn brent<T: Scalar, F>(mut f: F, a: T, b: T, fa: T, fb: T, x_tol: T, f_tol: T) -> Result<Root<T>>
where
    F: FnMut(T) -> Result<T>,
{
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    if fa == T::zero() {
        return Ok(Root { x: a });
    }
    if fb == T::zero() {
        return Ok(Root { x: b });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo: a.as_f64(), hi: b.as_f64() });
    }

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITERATIONS {
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
        let tol = x_tol.max(T::lit(4.0) * T::epsilon() * b.abs()) / two;
        let m = (c - b) / two;
        if m.abs() <= tol || fb == T::zero() || fb.abs() <= f_tol {
            return Ok(Root { x: b });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            let bound = (three * m * q - (tol * q).abs()).min((e * q).abs());
            if two * p < bound {
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
        b = if d.abs() > tol { b + d } else { b + tol.copysign(m) };
        fb = f(b)?;
    }
    let (lo, hi) = if b < c { (b, c) } else { (c, b) };
    Err(Error::RootNotConverged { lo: lo.as_f64(), hi: hi.as_f64(), iterations: MAX_ITERATIONS })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Root<f64> {
        brent(|x| Ok(f(x)), a, b, f(a), f(b), 1e-15, 0.0).unwrap()
    }

    #[test]
    fn finds_cube_root() {
        let r = solve(|x| x * x * x - 2.0, 0.0, 2.0);
        assert!((r.x - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn handles_pole_like_functions() {
        // x - tan(x) on (π, 3π/2) has a root at 4.4934...
        let r = solve(|x| x - x.tan(), 3.2, 4.71);
        assert!((r.x - 4.493_409_457_909_064).abs() < 1e-13, "{}", r.x);
    }

    #[test]
    fn rejects_missing_sign_change() {
        let err = brent(|x: f64| Ok(x * x + 1.0), -1.0, 1.0, 2.0, 2.0, 1e-12, 0.0).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn residual_stop() {
        let r = brent(|x: f64| Ok(x - 0.3), 0.0, 1.0, -0.3, 0.7, 0.0, 1e-3).unwrap();
        assert!((r.x - 0.3).abs() <= 1e-3);
    }
}
