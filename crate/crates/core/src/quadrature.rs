//! Adaptive Gauss-Kronrod (7/15) quadrature of vector-valued integrands.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for the odd-indexed Kronrod nodes, then the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Estimate<T, const N: usize> {
    pub value: [T; N],
    pub error: [T; N],
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Segment<T, const N: usize> {
    a: T,
    b: T,
    value: [T; N],
    error: [T; N],
}

fn kronrod15<T: Scalar, const N: usize, F>(f: &F, a: T, b: T) -> Segment<T, N>
where
    F: Fn(T) -> [T; N],
{
    let half = (b - a) / T::lit(2.0);
    let centre = a + half;
    let fc = f(centre);
    let mut kron = [T::zero(); N];
    let mut gauss = [T::zero(); N];
    for i in 0..N {
        kron[i] = fc[i] * T::lit(WGK[7]);
        gauss[i] = fc[i] * T::lit(WG[3]);
    }
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let lo = f(centre - dx);
        let hi = f(centre + dx);
        let wk = T::lit(WGK[j]);
        for i in 0..N {
            let s = lo[i] + hi[i];
            kron[i] = kron[i] + wk * s;
            if j % 2 == 1 {
                gauss[i] = gauss[i] + T::lit(WG[j / 2]) * s;
            }
        }
    }
    let mut value = [T::zero(); N];
    let mut error = [T::zero(); N];
    for i in 0..N {
        value[i] = kron[i] * half;
        error[i] = ((kron[i] - gauss[i]) * half).abs();
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, bisecting the worst segment until every component satisfies
/// `error <= max(abs_tol[i], rel_tol * |value|)`.
pub(crate) fn integrate<T: Scalar, const N: usize, F>(
    f: F,
    a: T,
    b: T,
    rel_tol: T,
    abs_tol: [T; N],
    max_intervals: usize,
) -> Result<Estimate<T, N>>
where
    F: Fn(T) -> [T; N],
{
    let mut segments = vec![kronrod15(&f, a, b)];
    loop {
        let mut total = [T::zero(); N];
        let mut err = [T::zero(); N];
        for s in &segments {
            for i in 0..N {
                total[i] = total[i] + s.value[i];
                err[i] = err[i] + s.error[i];
            }
        }
        let target: Vec<T> = (0..N).map(|i| abs_tol[i].max(rel_tol * total[i].abs())).collect();
        if (0..N).all(|i| err[i] <= target[i]) {
            return Ok(Estimate { value: total, error: err, intervals: segments.len() });
        }
        if segments.len() >= max_intervals {
            return Err(Error::Quadrature {
                partial: total[0].as_f64(),
                error: err[0].as_f64(),
                intervals: segments.len(),
            });
        }
        // bisect the segment contributing most relative to its component target
        let score = |s: &Segment<T, N>| {
            (0..N)
                .map(|i| s.error[i] / target[i].max(T::min_positive_value()))
                .fold(T::zero(), T::max)
        };
        let worst = (0..segments.len())
            .max_by(|&i, &j| score(&segments[i]).partial_cmp(&score(&segments[j])).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let s = segments.swap_remove(worst);
        let mid = s.a + (s.b - s.a) / T::lit(2.0);
        if !(mid > s.a && mid < s.b) {
            // interval collapsed to adjacent floats; accept what we have
            return Ok(Estimate { value: total, error: err, intervals: segments.len() + 1 });
        }
        segments.push(kronrod15(&f, s.a, mid));
        segments.push(kronrod15(&f, mid, s.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let est = integrate(|x: f64| [x.powi(12), 1.0], 0.0, 1.0, 1e-14, [0.0; 2], 10).unwrap();
        assert!((est.value[0] - 1.0 / 13.0).abs() < 1e-16);
        assert!((est.value[1] - 1.0).abs() < 1e-16);
        assert_eq!(est.intervals, 1);
    }

    #[test]
    fn sharp_peak_is_refined() {
        // Lorentzian of width 1e-4: integral over [-1, 1] is 2 atan(1e4)
        let w = 1e-4f64;
        let est = integrate(|x: f64| [w / (w * w + x * x)], -1.0, 1.0, 1e-12, [0.0], 500).unwrap();
        assert!((est.value[0] - 2.0 * (1.0 / w).atan()).abs() < 1e-10, "{}", est.value[0]);
        assert!(est.intervals > 1);
    }

    #[test]
    fn components_converge_independently() {
        let est = integrate(|x: f64| [x.exp(), 1e-20 * x.cos()], 0.0, 2.0, 1e-13, [0.0; 2], 100).unwrap();
        assert!((est.value[0] - (2f64.exp() - 1.0)).abs() < 1e-12);
        assert!((est.value[1] / (1e-20 * 2f64.sin()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_budget_is_reported() {
        let err = integrate(|x: f64| [1.0 / x.abs().sqrt().max(1e-300)], -1.0, 1.0, 1e-15, [0.0], 4).unwrap_err();
        assert!(matches!(err, Error::Quadrature { intervals: 4, .. }));
    }
}
