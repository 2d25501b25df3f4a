//! Floating point abstraction used by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Real scalar the physics is evaluated in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + FftNum + Debug + Display + Default + Sum + 'static
{
    /// Converts an `f64` constant.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    /// A requested tolerance, floored at a few ulps of this type.
    #[inline]
    fn tol(requested: f64) -> Self {
        Self::lit(requested).max(Self::epsilon() * Self::lit(16.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn int(k: i64) -> Self {
        <Self as FromPrimitive>::from_i64(k).expect("integer representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `(sin πx, cos πx)`, exact when `2x` is an integer.
pub fn sin_cos_pi<T: Scalar>(x: T) -> (T, T) {
    let two = T::lit(2.0);
    let r = x - two * (x / two).round();
    let twice = r * two;
    if twice == twice.round() {
        return match twice.to_i64().unwrap_or(0).rem_euclid(4) {
            0 => (T::zero(), T::one()),
            1 => (T::one(), T::zero()),
            2 => (T::zero(), -T::one()),
            _ => (-T::one(), T::zero()),
        };
    }
    (T::PI() * r).sin_cos()
}

/// `(sin πx, cos πx)` for an exact rational `x`.
pub fn sin_cos_pi_ratio<T: Scalar>(x: Ratio<i64>) -> (T, T) {
    let (num, den) = (*x.numer(), *x.denom());
    // reduce into [0, 2)
    let reduced = num.rem_euclid(2 * den);
    if (2 * reduced) % den == 0 {
        return match (2 * reduced / den).rem_euclid(4) {
            0 => (T::zero(), T::one()),
            1 => (T::one(), T::zero()),
            2 => (T::zero(), -T::one()),
            _ => (-T::one(), T::zero()),
        };
    }
    let r = T::int(reduced) / T::int(den);
    (T::PI() * r).sin_cos()
}

/// Best rational approximation `p/q` of `x` with `q <= max_den`, by continued fractions.
pub fn best_rational(x: f64, max_den: i64) -> Ratio<i64> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        if !a.is_finite() || a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let k2 = a.saturating_mul(k1).saturating_add(k0);
        if k2 > max_den {
            break;
        }
        let h2 = a * h1 + h0;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rem - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        rem = 1.0 / frac;
    }
    if k1 == 0 {
        return Ratio::from_integer(x.round() as i64);
    }
    Ratio::new(h1, k1)
}

/// `z cot z` and its derivative, accurate through `z = 0`.
pub(crate) fn xcot<T: Scalar>(z: T) -> (T, T) {
    if z.abs() < T::lit(1e-3) {
        let z2 = z * z;
        let v = T::one() - z2 / T::lit(3.0) - z2 * z2 / T::lit(45.0);
        let d = -T::lit(2.0) * z / T::lit(3.0) - T::lit(4.0) * z2 * z / T::lit(45.0);
        return (v, d);
    }
    let (s, c) = z.sin_cos();
    let cot = c / s;
    (z * cot, cot - z / (s * s))
}

/// `z coth z` and its derivative, accurate through `z = 0`.
pub(crate) fn xcoth<T: Scalar>(z: T) -> (T, T) {
    if z.abs() < T::lit(1e-3) {
        let z2 = z * z;
        let v = T::one() + z2 / T::lit(3.0) - z2 * z2 / T::lit(45.0);
        let d = T::lit(2.0) * z / T::lit(3.0) - T::lit(4.0) * z2 * z / T::lit(45.0);
        return (v, d);
    }
    let coth = T::one() / z.tanh();
    let sh = z.sinh();
    (z * coth, coth - z / (sh * sh))
}

/// Derivative of `z cot z` divided by `z`.
pub(crate) fn xcot_prime_over_z<T: Scalar>(z: T) -> T {
    if z.abs() < T::lit(1e-3) {
        let z2 = z * z;
        return -T::lit(2.0) / T::lit(3.0) - T::lit(4.0) * z2 / T::lit(45.0);
    }
    xcot(z).1 / z
}

/// Derivative of `z coth z` divided by `z`.
pub(crate) fn xcoth_prime_over_z<T: Scalar>(z: T) -> T {
    if z.abs() < T::lit(1e-3) {
        let z2 = z * z;
        return T::lit(2.0) / T::lit(3.0) - T::lit(4.0) * z2 / T::lit(45.0);
    }
    xcoth(z).1 / z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_cos_pi_is_exact_on_half_integers() {
        assert_eq!(sin_cos_pi(0.5f64), (1.0, 0.0));
        assert_eq!(sin_cos_pi(7.0f64), (0.0, -1.0));
        assert_eq!(sin_cos_pi(-1.5f64), (1.0, 0.0));
        let (s, c) = sin_cos_pi(0.25f64);
        assert!((s - c).abs() < 1e-15);
    }

    #[test]
    fn rational_phase_matches_float() {
        for (p, q) in [(1, 3), (5, 7), (-4, 9), (3, 2), (6, 4)] {
            let (s, c) = sin_cos_pi_ratio::<f64>(Ratio::new(p, q));
            let (s2, c2) = (std::f64::consts::PI * p as f64 / q as f64).sin_cos();
            assert!((s - s2).abs() < 1e-14 && (c - c2).abs() < 1e-14, "{p}/{q}");
        }
        assert_eq!(sin_cos_pi_ratio::<f64>(Ratio::new(3, 2)), (-1.0, 0.0));
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(best_rational(1.0 / 3.0, 1000), Ratio::new(1, 3));
        assert_eq!(best_rational(0.25, 1000), Ratio::new(1, 4));
        assert_eq!(best_rational(std::f64::consts::PI, 1000), Ratio::new(355, 113));
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!(*best_rational(golden, 1000).denom() <= 1000);
    }

    #[test]
    fn small_argument_series_agree_with_closed_forms() {
        for z in [9e-4f64, 1.1e-3] {
            let (v, d) = xcot(z);
            assert!((v - z / z.tan()).abs() < 1e-14);
            assert!((d - (1.0 / z.tan() - z / z.sin().powi(2))).abs() < 1e-9);
            let (v, _) = xcoth(z);
            assert!((v - z / z.tanh()).abs() < 1e-14);
        }
    }
}
