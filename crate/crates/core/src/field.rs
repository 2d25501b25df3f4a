//! Position-space photon wavefunction `ξ(x) = (2π/L) Σ_k ξ_k e^{2πikx/L}` and the diagnostics
//! built on it.
//!
//! Because `ξ_k ~ |k|^{-3/2}` at large `|k|`, the field near an emitter behaves like
//! `c₀ + c₁|x|^{1/2} + …`: the slope diverges there instead of jumping by a finite amount.
//! [`derivative_jump`] therefore reports a finite-resolution estimate whose size tracks the
//! strength of the singularity; it is comparable only between profiles on the same grid.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::{ModeIndex, SystemParams};
use crate::scalar::Scalar;
use crate::spectrum::DressedState;

/// Grid offsets (in units of the spacing) used by the derivative-jump estimator.
const JUMP_STEPS: [usize; 3] = [4, 8, 16];

/// Below this fraction of the raw finite-resolution jump, an extrapolated jump counts as zero.
const JUMP_SIGNIFICANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile<T> {
    /// `x_j = −L/2 + jΔx`, `j = 0..n`; `x = 0` is grid point `n/2`.
    pub grid: Vec<T>,
    pub values: Vec<Complex<T>>,
    pub emitter_positions: Vec<T>,
    pub length: T,
    pub spacing: T,
    /// Largest `|k|` in the synthesized series.
    pub k_trunc: i64,
    /// `Σ_{|k|≤k_trunc} |ξ_k|²` of the input amplitudes.
    pub mode_weight: T,
}

impl<T: Scalar> FieldProfile<T> {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `(L/4π²) Σ_j |ξ(x_j)|² Δx`, which equals `Σ|ξ_k|²` for a band-limited series.
    pub fn parseval_weight(&self) -> T {
        let sum: T = self.values.iter().map(|z| z.norm_sqr()).sum();
        self.density_scale() * sum
    }

    /// Grid index closest to `x` (periodically wrapped).
    pub fn index_of(&self, x: T) -> usize {
        let n = self.len() as i64;
        let j = ((x + self.length / T::lit(2.0)) / self.spacing).round().to_i64().unwrap_or(0);
        j.rem_euclid(n) as usize
    }

    /// Value at grid index `j`, periodically extended.
    pub fn at(&self, j: i64) -> Complex<T> {
        self.values[j.rem_euclid(self.len() as i64) as usize]
    }

    /// `max_j |ξ(x_{j+1}) − ξ(x_j)|` around the ring.
    pub fn max_adjacent_step(&self) -> T {
        (0..self.len() as i64).map(|j| (self.at(j + 1) - self.at(j)).norm()).fold(T::zero(), T::max)
    }

    /// Sign changes of `Re ξ` between positions `a < b` (walked along increasing `x`, wrapping if
    /// needed), ignoring samples within `margin` of either end. The margin keeps the short-range
    /// structure of the emitter cusp out of a standing-wave node count.
    pub fn sign_changes(&self, a: T, b: T, margin: T) -> usize {
        let n = self.len() as i64;
        let skip = (margin / self.spacing).ceil().to_i64().unwrap_or(0).max(1);
        let start = self.index_of(a) as i64 + skip;
        let mut stop = self.index_of(b) as i64;
        if stop <= start - skip {
            stop += n;
        }
        let mut last = T::zero();
        let mut count = 0;
        for j in start..=stop - skip {
            let v = self.at(j).re;
            if v == T::zero() {
                continue;
            }
            if last != T::zero() && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// Converts `|ξ(x)|² Δx` to a probability.
    fn density_scale(&self) -> T {
        self.length / (T::lit(4.0) * T::PI() * T::PI()) * self.spacing
    }
}

/// Synthesizes `ξ(x)` for a dressed state on `n_grid` points, using its amplitudes up to
/// `k_trunc`.
pub fn synthesize<T: Scalar>(state: &DressedState<T>, n_grid: usize) -> Result<FieldProfile<T>> {
    let p = state.params();
    synthesize_amplitudes(&state.photon_amplitudes(), p.length(), &p.positions(), n_grid)
}

/// Synthesizes `ξ(x)` from explicit mode amplitudes. Requires an even `n_grid ≥ 4·max|k|`.
pub fn synthesize_amplitudes<T: Scalar>(
    amplitudes: &[(ModeIndex, Complex<T>)],
    length: T,
    emitter_positions: &[T],
    n_grid: usize,
) -> Result<FieldProfile<T>> {
    let k_trunc = amplitudes.iter().map(|(k, _)| k.0.abs()).max().unwrap_or(0);
    let required = (4 * k_trunc.max(1)) as usize;
    if n_grid < required {
        return Err(Error::Undersampled { n_grid, required });
    }
    if n_grid % 2 == 1 {
        return Err(Error::InvalidParams(format!("grid size must be even, got {n_grid}")));
    }
    let n = n_grid as i64;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n_grid];
    let mut mode_weight = T::zero();
    // x_j = (j − n/2)Δx, so e^{2πik x_j/L} = (−1)^k e^{2πikj/n}
    for &(k, xi) in amplitudes {
        let sign = if k.0 % 2 == 0 { T::one() } else { -T::one() };
        buf[k.0.rem_euclid(n) as usize] = buf[k.0.rem_euclid(n) as usize] + xi * sign;
        mode_weight = mode_weight + xi.norm_sqr();
    }
    FftPlanner::new().plan_fft_inverse(n_grid).process(&mut buf);
    let scale = T::lit(2.0) * T::PI() / length;
    let spacing = length / T::int(n);
    Ok(FieldProfile {
        grid: (0..n).map(|j| T::int(j - n / 2) * spacing).collect(),
        values: buf.into_iter().map(|z| z * scale).collect(),
        emitter_positions: emitter_positions.to_vec(),
        length,
        spacing,
        k_trunc,
        mode_weight,
    })
}

/// Finite-resolution estimate of `ξ′(x₀⁺) − ξ′(x₀⁻)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeJump<T> {
    /// Richardson extrapolation of the raw estimates (first- and second-order terms removed).
    pub jump: Complex<T>,
    pub magnitude: T,
    /// `[ξ(x₀+h) − 2ξ(x₀) + ξ(x₀−h)]/h` for `h = 4Δx, 8Δx, 16Δx`.
    pub raw: [Complex<T>; 3],
    /// Whether the extrapolated jump stands out against the smooth-field background.
    pub significant: bool,
}

/// Estimates the slope discontinuity at grid point nearest `x0` by second differences at
/// `h ∈ {4Δx, 8Δx, 16Δx}` extrapolated to `h → 0`.
///
/// For a smooth field the raw estimates are `ξ″h + O(h³)` and the extrapolation cancels them; at
/// an emitter the cusp survives. The series truncation smooths the cusp over `~L/k_trunc`, which
/// is the scale of the smallest step, so the value depends on the grid and is meant for
/// comparisons at fixed resolution.
pub fn derivative_jump<T: Scalar>(profile: &FieldProfile<T>, x0: T) -> DerivativeJump<T> {
    let j0 = profile.index_of(x0) as i64;
    let centre = profile.at(j0);
    let raw = JUMP_STEPS.map(|s| {
        let s = s as i64;
        let h = profile.spacing * T::int(s);
        (profile.at(j0 + s) + profile.at(j0 - s) - centre * T::lit(2.0)) / h
    });
    let first = |a: Complex<T>, b: Complex<T>| a * T::lit(2.0) - b;
    let r_fine = first(raw[0], raw[1]);
    let r_coarse = first(raw[1], raw[2]);
    let jump = (r_fine * T::lit(4.0) - r_coarse) / T::lit(3.0);
    let magnitude = jump.norm();
    let background = raw.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    DerivativeJump {
        jump,
        magnitude,
        raw,
        significant: magnitude > T::lit(JUMP_SIGNIFICANCE) * background,
    }
}

/// Photon probability on each arc between the emitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionWeights<T> {
    /// Arc `0 < x < d`.
    pub inner: T,
    /// Arc `d < x < L`.
    pub outer: T,
}

impl<T: Scalar> RegionWeights<T> {
    pub fn total(&self) -> T {
        self.inner + self.outer
    }
}

/// Splits the photon probability of a two-emitter state between the two arcs.
///
/// Uses the periodic trapezoid rule, exact for the band-limited `|ξ(x)|²`, on a grid of at least
/// `8·k_trunc` points. Grid points on an emitter are shared half and half; when `d` falls between
/// grid points the straddling cell is split in proportion.
pub fn region_weights<T: Scalar>(state: &DressedState<T>, p: &SystemParams<T>) -> Result<RegionWeights<T>> {
    p.require_emitters(2)?;
    let d = p.separation().ok_or(Error::EmitterCount(2))?;
    let n_grid = region_grid(p, state.k_trunc);
    let profile = synthesize(state, n_grid)?;
    Ok(split_arcs(&profile, d))
}

/// Smallest even grid `≥ 8·k_trunc` that places `d` on a grid point when `d/L` is rational.
fn region_grid<T: Scalar>(p: &SystemParams<T>, k_trunc: i64) -> usize {
    let min = (8 * k_trunc.max(1)) as usize;
    let den = p
        .separation_info()
        .and_then(|s| s.ratio())
        .map(|r| *r.denom() as usize)
        .unwrap_or(2);
    let step = if den.is_multiple_of(2) { den } else { 2 * den };
    min.div_ceil(step) * step
}

fn split_arcs<T: Scalar>(profile: &FieldProfile<T>, d: T) -> RegionWeights<T> {
    let n = profile.len() as i64;
    let density = |j: i64| profile.at(j).norm_sqr() * profile.density_scale();
    let origin = n / 2;
    // position of the second emitter in grid steps from x = 0
    let t = d / profile.spacing;
    let jd = t.floor().to_i64().unwrap_or(0);
    let frac = t - T::int(jd);
    let half = T::lit(0.5);
    let mut inner = density(origin) * half;
    for j in 1..=jd {
        inner = inner + density(origin + j);
    }
    if frac == T::zero() {
        inner = inner - density(origin + jd) * half;
    } else {
        // trapezoid cell [jd, jd+1] cut at frac, with |ξ|² interpolated linearly
        let (lo, hi) = (density(origin + jd), density(origin + jd + 1));
        let at_cut = lo + (hi - lo) * frac;
        inner = inner - lo * half + (lo + at_cut) * half * frac;
    }
    let total: T = (0..n).map(density).sum();
    RegionWeights { inner, outer: total - inner }
}
