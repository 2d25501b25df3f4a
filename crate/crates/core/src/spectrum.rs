//! Dressed eigenstates: roots of `E − ε − Σ(E) = 0` and their normalized amplitudes.
//!
//! Between two photon frequencies that couple to the emitter(s), `E − ε − Σ(E)` rises
//! monotonically from `−∞` to `+∞`, so each such gap holds exactly one root. Roots are
//! bracketed by stepping in from both poles and polished with Brent's method. For two emitters
//! the eigenvalue equation factorizes into the symmetric and antisymmetric parity branches,
//! each solved separately.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{ModeIndex, SystemParams};
use crate::roots::brent;
use crate::scalar::Scalar;
use crate::selfenergy::{parity_self_energy, sigma_single, Parity};
use crate::tolerance::Tolerances;

/// Which two-emitter eigenvalue equation to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveMode {
    /// `det[(E − ε)𝟙 − Σ(E)] = 0` with the inter-emitter branch-cut term `β₁`.
    FullDeterminant,
    /// `E = ε + (γ/q)χ(q) + γβ₀(E)`, dropping `β₁`.
    Approximate,
}

impl SolveMode {
    fn includes_beta1(self) -> bool {
        matches!(self, SolveMode::FullDeterminant)
    }
}

/// Where a state sits in the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateLabel {
    /// Single emitter, `ω_k < E < ω_{k+1}`.
    Interval(i64),
    /// Single emitter, `E < m`.
    SubThreshold,
    /// Two emitters; `interval` is `None` below threshold.
    Parity { parity: Parity, interval: Option<i64> },
}

impl StateLabel {
    pub fn interval(&self) -> Option<i64> {
        match *self {
            StateLabel::Interval(k) => Some(k),
            StateLabel::SubThreshold => None,
            StateLabel::Parity { interval, .. } => interval,
        }
    }

    pub fn parity(&self) -> Option<Parity> {
        match *self {
            StateLabel::Parity { parity, .. } => Some(parity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Equation<T> {
    Single(SystemParams<T>),
    Branch { params: SystemParams<T>, parity: Parity, include_beta1: bool },
}

impl<T: Scalar> Equation<T> {
    fn params(&self) -> &SystemParams<T> {
        match self {
            Equation::Single(p) | Equation::Branch { params: p, .. } => p,
        }
    }

    /// Self-energy (or its parity eigenvalue) and derivative at `E`.
    fn sigma(&self, energy: T, tol: &Tolerances) -> Result<(T, T)> {
        match *self {
            Equation::Single(ref p) => {
                let s = sigma_single(energy, p, tol)?;
                Ok((s.value.diagonal(), s.derivative.diagonal()))
            }
            Equation::Branch { ref params, parity, include_beta1 } => {
                let v = parity_self_energy(energy, params, parity, include_beta1, tol)?;
                Ok((v.value, v.derivative))
            }
        }
    }

    fn residual(&self, energy: T, tol: &Tolerances) -> Result<T> {
        let (s, _) = self.sigma(energy, tol)?;
        Ok(energy - self.params().epsilon() - s)
    }

    fn couples(&self, k: i64, tol: &Tolerances) -> bool {
        match *self {
            Equation::Single(_) => true,
            Equation::Branch { ref params, parity, .. } => {
                params.parity_weight(k, parity.sign()) >= T::lit(tol.removable)
            }
        }
    }

    /// Photon weight multiplier `|Σ_α a_α e^{−iq_k x_α}|² / Σ_α |a_α|²` for mode `k`.
    fn mode_weight(&self, k: i64) -> T {
        match *self {
            Equation::Single(_) => T::one(),
            Equation::Branch { ref params, parity, .. } => params.parity_weight(k, parity.sign()),
        }
    }

    /// Largest pointwise value of [`Self::mode_weight`].
    fn max_mode_weight(&self) -> T {
        match self {
            Equation::Single(_) => T::one(),
            Equation::Branch { .. } => T::lit(2.0),
        }
    }

    fn label(&self, energy: T) -> StateLabel {
        let interval = self.params().interval_of(energy);
        match *self {
            Equation::Single(_) => interval.map_or(StateLabel::SubThreshold, StateLabel::Interval),
            Equation::Branch { parity, .. } => StateLabel::Parity { parity, interval },
        }
    }

    fn atomic(&self, weight: T) -> Vec<T> {
        match *self {
            Equation::Single(_) => vec![weight.sqrt()],
            Equation::Branch { parity, .. } => {
                let a1 = (weight / T::lit(2.0)).sqrt();
                vec![a1, parity.sign::<T>() * a1]
            }
        }
    }
}

/// A normalized one-excitation eigenstate.
///
/// Photon amplitudes `ξ_k` for `|k| ≤ k_trunc` are generated on demand; the norm beyond the
/// cut-off is carried by `tail_weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedState<T> {
    pub energy: T,
    /// `a` for one emitter, `(a₁, a₂)` for two; real with `a₁ ≥ 0`.
    pub atomic: Vec<T>,
    /// `Σ_α |a_α|² = 1/(1 − Σ′(E))`.
    pub atomic_weight: T,
    pub label: StateLabel,
    /// `|E − ε − Σ(E)| / (1 − Σ′(E))`, the distance to the exact root to first order.
    pub residual: T,
    /// `|E − ε − Σ(E)|`.
    pub raw_residual: T,
    pub k_trunc: i64,
    /// Analytic estimate of `Σ_{|k|>k_trunc} |ξ_k|²`.
    pub tail_weight: T,
    equation: Equation<T>,
    removable: T,
}

impl<T: Scalar> DressedState<T> {
    pub fn params(&self) -> &SystemParams<T> {
        self.equation.params()
    }

    /// `ξ_k = F_k/(E − ω_k) · Σ_α a_α e^{−2πik x_α/L}`; zero for modes that decouple from
    /// the state's parity.
    pub fn photon_amplitude(&self, k: ModeIndex) -> Complex<T> {
        let p = self.params();
        if self.equation.mode_weight(k.0) < self.removable {
            return Complex::new(T::zero(), T::zero());
        }
        let scale = p.form_factor(k) / (self.energy - p.mode_frequency(k));
        match self.atomic.as_slice() {
            [a] => Complex::new(scale * *a, T::zero()),
            [a1, a2] => {
                let (s, c) = p.mode_phase(k);
                Complex::new(scale * (*a1 + *a2 * c), -scale * *a2 * s)
            }
            _ => Complex::new(T::nan(), T::nan()),
        }
    }

    /// All amplitudes `ξ_k` for `−k_trunc ≤ k ≤ k_trunc`.
    pub fn photon_amplitudes(&self) -> Vec<(ModeIndex, Complex<T>)> {
        (-self.k_trunc..=self.k_trunc)
            .map(|k| (ModeIndex(k), self.photon_amplitude(ModeIndex(k))))
            .collect()
    }

    /// `Σ_{|k|≤k_trunc} |ξ_k|²`, summed from the cut-off inwards.
    pub fn photon_weight(&self) -> T {
        let p = self.params();
        let term = |k: i64| {
            let w = self.equation.mode_weight(k);
            if w < self.removable {
                return T::zero();
            }
            let f = p.form_factor(ModeIndex(k)) / (self.energy - p.mode_frequency(ModeIndex(k)));
            f * f * w
        };
        let mut sum = T::zero();
        for k in (1..=self.k_trunc).rev() {
            sum = sum + T::lit(2.0) * term(k);
        }
        (sum + term(0)) * self.atomic_weight
    }

    /// `Σ|a_α|² + Σ_{|k|≤K}|ξ_k|² + tail`, which should equal one.
    pub fn norm(&self) -> T {
        self.atomic_weight + self.photon_weight() + self.tail_weight
    }

    /// `a₂/a₁` for two emitters.
    pub fn amplitude_ratio(&self) -> Option<T> {
        match self.atomic.as_slice() {
            [a1, a2] => Some(*a2 / *a1),
            _ => None,
        }
    }

    pub fn parity(&self) -> Option<Parity> {
        self.label.parity()
    }
}

/// Root-count and ordering checks over a computed spectrum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaving {
    /// Number of roots found in each above-threshold interval.
    pub roots_per_interval: BTreeMap<i64, usize>,
    /// One emitter: exactly one root in every requested interval. Two emitters: exactly one
    /// root of each parity between consecutive photon frequencies that couple to that parity.
    pub one_root_per_interval: bool,
    /// Every root lies strictly inside its interval and the roots increase strictly.
    pub strictly_ordered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport<T> {
    pub params: SystemParams<T>,
    pub mode: Option<SolveMode>,
    pub k_range: RangeInclusive<i64>,
    /// Sorted by energy.
    pub states: Vec<DressedState<T>>,
    pub interleaving: Interleaving,
}

impl<T: Scalar> SpectrumReport<T> {
    fn new(params: SystemParams<T>, mode: Option<SolveMode>, k_range: RangeInclusive<i64>, mut states: Vec<DressedState<T>>) -> Self {
        states.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap_or(std::cmp::Ordering::Equal));
        let interleaving = check_interleaving(&params, &k_range, &states);
        Self { params, mode, k_range, states, interleaving }
    }

    /// Adds states (e.g. the sub-threshold root) and re-evaluates the ordering checks.
    pub fn extend(mut self, extra: impl IntoIterator<Item = DressedState<T>>) -> Self {
        self.states.extend(extra);
        Self::new(self.params, self.mode, self.k_range, self.states)
    }

    pub fn energies(&self) -> Vec<T> {
        self.states.iter().map(|s| s.energy).collect()
    }
}

fn check_interleaving<T: Scalar>(p: &SystemParams<T>, range: &RangeInclusive<i64>, states: &[DressedState<T>]) -> Interleaving {
    let mut counts: BTreeMap<i64, usize> = range.clone().map(|k| (k, 0)).collect();
    let mut inside = true;
    for s in states {
        if let Some(k) = s.label.interval() {
            *counts.entry(k).or_insert(0) += 1;
            let lo = p.mode_frequency(ModeIndex(k));
            let hi = p.mode_frequency(ModeIndex(k + 1));
            inside &= lo < s.energy && s.energy < hi;
        } else {
            inside &= s.energy < T::one();
        }
    }
    let increasing = states.windows(2).all(|w| w[0].energy < w[1].energy);
    let one_per = match p.emitter_count() {
        1 => range.clone().all(|k| counts.get(&k) == Some(&1)),
        _ => {
            let removable = states.first().map_or(T::lit(Tolerances::default().removable), |s| s.removable);
            [Parity::Symmetric, Parity::Antisymmetric]
                .into_iter()
                .all(|parity| one_per_coupled_gap(p, range, states, parity, removable))
        }
    };
    Interleaving { roots_per_interval: counts, one_root_per_interval: one_per, strictly_ordered: inside && increasing }
}

/// Exactly one root of `parity` between consecutive poles of that parity, for every such gap
/// that lies inside `range`. A mode that decouples from the parity is not a pole, so its two
/// neighbouring intervals share one root.
fn one_per_coupled_gap<T: Scalar>(
    p: &SystemParams<T>,
    range: &RangeInclusive<i64>,
    states: &[DressedState<T>],
    parity: Parity,
    removable: T,
) -> bool {
    let poles: Vec<i64> = (*range.start()..=*range.end() + 1)
        .filter(|&k| p.parity_weight(k, parity.sign()) >= removable)
        .collect();
    poles.windows(2).all(|w| {
        let (lo, hi) = (p.mode_frequency(ModeIndex(w[0])), p.mode_frequency(ModeIndex(w[1])));
        states
            .iter()
            .filter(|s| s.parity() == Some(parity) && s.energy > lo && s.energy < hi)
            .count()
            == 1
    })
}

/// Analytic estimate of the photon weight beyond `|k| = K` for an energy `E` and atomic
/// weight `|a|²`, from the integral of `2γ|a|²/(Lω(ω − E)²)` over `k > K + 1/2`.
///
/// Returns `+∞` when the cut-off is too close to `E` for the estimate to apply.
pub fn photon_tail_estimate<T: Scalar>(p: &SystemParams<T>, energy: T, atomic_weight: T, k_trunc: i64) -> T {
    let x = T::TAU() * (T::int(k_trunc) + T::lit(0.5)) / p.length();
    // cosh u ≥ e^u/2 = t with q = sinh u
    let t0 = (x + x.hypot(T::one())) / T::lit(2.0);
    if !(t0 > energy) {
        return T::infinity();
    }
    // ∫_{t₀}^∞ dt / (t (t − E)²)
    let r = energy / t0;
    let integral = if r < T::lit(1e-3) {
        (r * r / T::lit(2.0) + T::lit(2.0) * r * r * r / T::lit(3.0) + T::lit(0.75) * r.powi(4)) / (energy * energy)
    } else {
        (r / (T::one() - r) + (-r).ln_1p()) / (energy * energy)
    };
    p.gamma() * atomic_weight / T::PI() * integral
}

fn choose_k_trunc<T: Scalar>(eq: &Equation<T>, energy: T, atomic_weight: T, tol: &Tolerances) -> i64 {
    let p = eq.params();
    let k_e = p.interval_of(energy).unwrap_or(0);
    let mut k = (2 * k_e + 16).max(32);
    let target = T::lit(tol.tail);
    while k < tol.k_trunc_cap {
        if photon_tail_estimate(p, energy, atomic_weight, k) * eq.max_mode_weight() <= target {
            return k;
        }
        k = (k * 2).min(tol.k_trunc_cap);
    }
    tol.k_trunc_cap
}

fn build_state<T: Scalar>(eq: Equation<T>, energy: T, k_trunc: Option<i64>, tol: &Tolerances) -> Result<DressedState<T>> {
    let near = near_pole_tolerances(tol);
    let (sigma, sigma_prime) = eq.sigma(energy, &near)?;
    let raw = (energy - eq.params().epsilon() - sigma).abs();
    let slope = T::one() - sigma_prime;
    let residual = raw / slope;
    if !(residual <= T::lit(tol.root_acceptance)) {
        return Err(Error::NotARoot { energy: energy.as_f64(), residual: residual.as_f64() });
    }
    let atomic_weight = T::one() / slope;
    let k_trunc = match k_trunc {
        Some(k) if k >= 0 => k,
        Some(k) => return Err(Error::InvalidParams(format!("k_trunc must be non-negative, got {k}"))),
        None => choose_k_trunc(&eq, energy, atomic_weight, tol),
    };
    let tail_weight = photon_tail_estimate(eq.params(), energy, atomic_weight, k_trunc);
    Ok(DressedState {
        energy,
        atomic: eq.atomic(atomic_weight),
        atomic_weight,
        label: eq.label(energy),
        residual,
        raw_residual: raw,
        k_trunc,
        tail_weight: if tail_weight.is_finite() { tail_weight } else { T::zero() },
        equation: eq,
        removable: T::lit(tol.removable),
    })
}

/// Tolerances used inside a bracket: evaluation is allowed arbitrarily close to a pole, which
/// weakly coupled roots require.
fn near_pole_tolerances(tol: &Tolerances) -> Tolerances {
    Tolerances { pole_exclusion: 0.0, ..*tol }
}

/// Lower end of a root search: a coupled pole or the sub-threshold floor.
#[derive(Debug, Clone, Copy)]
enum Lower<T> {
    Pole(T),
    Floor(T),
}

/// Solves the equation in the open gap between `lower` and the pole `upper`.
fn solve_gap<T: Scalar>(eq: &Equation<T>, lower: Lower<T>, upper: T, tol: &Tolerances) -> Result<T> {
    let near = near_pole_tolerances(tol);
    let f = |e: T| eq.residual(e, &near);
    let lo_edge = match lower {
        Lower::Pole(x) | Lower::Floor(x) => x,
    };
    let spacing = upper - lo_edge;
    let ulp_floor = |x: T| T::lit(64.0) * T::epsilon() * x.abs().max(T::one());

    let (a, fa) = match lower {
        Lower::Floor(x) => {
            let fx = f(x)?;
            if fx >= T::zero() {
                return Err(Error::BelowSearchFloor { floor: x.as_f64() });
            }
            (x, fx)
        }
        Lower::Pole(x) => step_in(&f, x, spacing, T::one(), ulp_floor(x), |v| v < T::zero())?,
    };
    let (b, fb) = step_in(&f, upper, spacing, -T::one(), ulp_floor(upper), |v| v > T::zero())?;
    let root = brent(f, a, b, fa, fb, T::tol(tol.bracket), T::tol(tol.residual))?;
    Ok(root.x)
}

/// Moves from a pole into the gap until `accept(f)` holds, shrinking the offset by 100 each step.
fn step_in<T: Scalar, F>(f: &F, pole: T, spacing: T, dir: T, min_offset: T, accept: impl Fn(T) -> bool) -> Result<(T, T)>
where
    F: Fn(T) -> Result<T>,
{
    let mut delta = spacing * T::lit(1e-3);
    loop {
        let x = pole + dir * delta;
        let fx = f(x)?;
        if accept(fx) {
            return Ok((x, fx));
        }
        if delta <= min_offset {
            let (lo, hi) = if dir > T::zero() { (pole, pole + spacing) } else { (pole - spacing, pole) };
            return Err(Error::NoSignChange { lo: lo.as_f64(), hi: hi.as_f64() });
        }
        delta = (delta * T::lit(1e-2)).max(min_offset);
    }
}

/// Single-emitter roots, one per interval `(ω_k, ω_{k+1})` for `k` in `k_range`.
pub fn solve_single<T: Scalar>(p: &SystemParams<T>, k_range: RangeInclusive<i64>, tol: &Tolerances) -> Result<SpectrumReport<T>> {
    p.require_emitters(1)?;
    check_range(&k_range)?;
    let eq = Equation::Single(*p);
    let mut states = Vec::new();
    for k in k_range.clone() {
        let lo = p.mode_frequency(ModeIndex(k));
        let hi = p.mode_frequency(ModeIndex(k + 1));
        let e = solve_gap(&eq, Lower::Pole(lo), hi, tol)?;
        states.push(build_state(eq, e, None, tol)?);
    }
    Ok(SpectrumReport::new(*p, None, k_range, states))
}

/// The unique single-emitter root below threshold, searched on `(floor, m)`.
pub fn solve_subthreshold<T: Scalar>(p: &SystemParams<T>, tol: &Tolerances) -> Result<DressedState<T>> {
    p.require_emitters(1)?;
    let eq = Equation::Single(*p);
    let e = solve_gap(&eq, Lower::Floor(T::lit(tol.search_floor)), T::one(), tol)?;
    build_state(eq, e, None, tol)
}

/// Normalized single-emitter state at a verified root `E`.
///
/// `k_trunc = None` picks the cut-off from the tail estimate, capped at `tol.k_trunc_cap`.
pub fn amplitudes_single<T: Scalar>(energy: T, p: &SystemParams<T>, k_trunc: Option<i64>, tol: &Tolerances) -> Result<DressedState<T>> {
    p.require_emitters(1)?;
    build_state(Equation::Single(*p), energy, k_trunc, tol)
}

fn check_range(range: &RangeInclusive<i64>) -> Result<()> {
    if *range.start() < 0 || range.start() > range.end() {
        return Err(Error::InvalidParams(format!("invalid interval range {range:?}")));
    }
    Ok(())
}

/// Roots of one parity branch whose gap between coupled poles overlaps `k_range`, including
/// the lowest gap (which starts at the search floor).
fn branch_roots<T: Scalar>(eq: &Equation<T>, k_range: &RangeInclusive<i64>, tol: &Tolerances) -> Result<Vec<T>> {
    let p = eq.params();
    let mut lower: Option<i64> = None;
    let mut roots = Vec::new();
    let mut k = 0i64;
    let limit = k_range.end() + 1 + 100_000;
    while k <= limit {
        if !eq.couples(k, tol) {
            k += 1;
            continue;
        }
        let lo_idx = lower.unwrap_or(-1);
        if k > *k_range.start() && lo_idx <= *k_range.end() {
            let lo = match lower {
                Some(j) => Lower::Pole(p.mode_frequency(ModeIndex(j))),
                None => Lower::Floor(T::lit(tol.search_floor)),
            };
            match solve_gap(eq, lo, p.mode_frequency(ModeIndex(k)), tol) {
                Ok(e) => roots.push(e),
                Err(Error::BelowSearchFloor { .. }) if lower.is_none() => {}
                Err(e) => return Err(e),
            }
        }
        if lo_idx > *k_range.end() {
            break;
        }
        lower = Some(k);
        k += 1;
    }
    Ok(roots)
}

/// Two-emitter roots in the intervals `k_range`, both parity branches.
pub fn solve_two<T: Scalar>(p: &SystemParams<T>, k_range: RangeInclusive<i64>, mode: SolveMode, tol: &Tolerances) -> Result<SpectrumReport<T>> {
    p.require_emitters(2)?;
    check_range(&k_range)?;
    let mut states = Vec::new();
    for parity in [Parity::Symmetric, Parity::Antisymmetric] {
        let eq = Equation::Branch { params: *p, parity, include_beta1: mode.includes_beta1() };
        for e in branch_roots(&eq, &k_range, tol)? {
            match p.interval_of(e) {
                Some(k) if k_range.contains(&k) => states.push(build_state(eq, e, None, tol)?),
                _ => {}
            }
        }
    }
    Ok(SpectrumReport::new(*p, Some(mode), k_range, states))
}

/// Two-emitter states below threshold (at most one per parity).
pub fn solve_two_subthreshold<T: Scalar>(p: &SystemParams<T>, mode: SolveMode, tol: &Tolerances) -> Result<Vec<DressedState<T>>> {
    p.require_emitters(2)?;
    let mut out = Vec::new();
    for parity in [Parity::Symmetric, Parity::Antisymmetric] {
        let eq = Equation::Branch { params: *p, parity, include_beta1: mode.includes_beta1() };
        let first = (0..=100_000).find(|&k| eq.couples(k, tol)).ok_or(Error::EmitterCount(2))?;
        match solve_gap(&eq, Lower::Floor(T::lit(tol.search_floor)), p.mode_frequency(ModeIndex(first)), tol) {
            Ok(e) if e < T::one() => out.push(build_state(eq, e, None, tol)?),
            Ok(_) | Err(Error::BelowSearchFloor { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Normalized two-emitter state of the given parity at a verified root `E`.
///
/// The atomic amplitudes are `(1, ±1)·|a|/√2`, the eigenvectors of the symmetric
/// self-energy matrix; when both parities solve the equation at `E` the requested one is used.
pub fn amplitudes_two<T: Scalar>(
    energy: T,
    parity: Parity,
    p: &SystemParams<T>,
    mode: SolveMode,
    k_trunc: Option<i64>,
    tol: &Tolerances,
) -> Result<DressedState<T>> {
    p.require_emitters(2)?;
    let eq = Equation::Branch { params: *p, parity, include_beta1: mode.includes_beta1() };
    build_state(eq, energy, k_trunc, tol)
}

/// `E − ε − Σ(E)` and `1 − Σ′(E)` for one emitter.
pub fn single_equation<T: Scalar>(energy: T, p: &SystemParams<T>, tol: &Tolerances) -> Result<(T, T)> {
    let (s, sp) = Equation::Single(*p).sigma(energy, tol)?;
    Ok((energy - p.epsilon() - s, T::one() - sp))
}

/// `E − ε − λ_s(E)` and `1 − λ_s′(E)` for a parity branch.
pub fn branch_equation<T: Scalar>(energy: T, p: &SystemParams<T>, parity: Parity, mode: SolveMode, tol: &Tolerances) -> Result<(T, T)> {
    let eq = Equation::Branch { params: *p, parity, include_beta1: mode.includes_beta1() };
    let (s, sp) = eq.sigma(energy, tol)?;
    Ok((energy - p.epsilon() - s, T::one() - sp))
}
