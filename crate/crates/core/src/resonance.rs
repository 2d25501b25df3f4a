//! Resonant two-emitter states: energies at which a whole number of half-wavelengths fits
//! between the emitters, the emitter energy that makes them eigenstates, and quasi-degenerate
//! inner/outer pairs usable as a qubit.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::model::{ModeIndex, SystemParams};
use crate::scalar::{best_rational, sin_cos_pi, sin_cos_pi_ratio, Scalar};
use crate::selfenergy::{beta, beta1_bound, Parity};
use crate::spectrum::{solve_two, SolveMode};
use crate::tolerance::Tolerances;

/// Fraction of the mode gap reported as the ceiling for an external drive.
pub const DEFAULT_HEADROOM: f64 = 0.1;

/// Default energy window for calling two resonances degenerate.
pub const DEFAULT_DETUNING_TOL: f64 = 1e-4;

/// Largest denominator used when reporting `d/(L − d)` as a fraction.
const COMMENSURABILITY_DENOMINATOR: i64 = 1000;

/// Which arc between the emitters holds the half-wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// The arc of length `d`.
    Inner,
    /// The arc of length `L − d`.
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantCandidate<T> {
    pub nu: u32,
    pub region: Region,
    /// `sqrt((νπ/ℓ)² + m²)` with `ℓ` the arc length.
    pub energy: T,
    pub parity: Parity,
    /// 1: `χ = 0`; 2: `χ = 2cot(πνL/2ℓ)`.
    pub chi_branch: u8,
    /// Eigenvalue of `A(νπ/ℓ)`; `None` when it diverges.
    pub chi: Option<T>,
    /// Emitter energy for which this state is an eigenstate; `None` when not tunable.
    pub epsilon_tuning: Option<T>,
    /// Closest integer to `νL/2ℓ`.
    pub nearest_mode: i64,
    /// `|E − ω_k̄|`.
    pub nearest_mode_gap: T,
}

impl<T: Scalar> ResonantCandidate<T> {
    pub fn is_tunable(&self) -> bool {
        self.epsilon_tuning.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitCandidate<T> {
    pub inner: ResonantCandidate<T>,
    pub outer: ResonantCandidate<T>,
    /// `|E_ν − Ẽ_ν′|`.
    pub detuning: T,
    /// Closest integer to `νL/2d`.
    pub k_bar: i64,
    /// `|E_ν − ω_k̄|`.
    pub gap: T,
    /// `gap · DEFAULT_HEADROOM`.
    pub g_max: T,
    /// `ν/ν′`, the ratio `d/(L − d)` the pair realizes.
    pub commensurability: Ratio<i64>,
    /// Best rational approximation of the actual `d/(L − d)`.
    pub separation_ratio: Ratio<i64>,
    /// `|ε_inner − ε_outer|`; `None` if either state is not tunable.
    pub eps_mismatch: Option<T>,
    /// Both states are eigenstates for one common emitter energy (within the detuning window).
    pub shared_tuning: bool,
}

impl<T: Scalar> QubitCandidate<T> {
    /// Drive ceiling for a different headroom factor.
    pub fn g_max_with(&self, headroom: T) -> T {
        self.gap * headroom
    }
}

fn arc<T: Scalar>(p: &SystemParams<T>, region: Region) -> Result<T> {
    let d = p.separation().ok_or(Error::EmitterCount(2))?;
    Ok(match region {
        Region::Inner => d,
        Region::Outer => p.length() - d,
    })
}

/// `ℓ/L` as an exact fraction when the separation is commensurate.
fn arc_ratio<T: Scalar>(p: &SystemParams<T>, region: Region) -> Option<Ratio<i64>> {
    let r = p.separation_info()?.ratio()?;
    Some(match region {
        Region::Inner => r,
        Region::Outer => Ratio::from_integer(1) - r,
    })
}

/// `νL/2ℓ` as an exact fraction if available, else as a float.
enum HalfTurns<T> {
    Exact(Ratio<i64>),
    Approx(T),
}

fn half_turns<T: Scalar>(p: &SystemParams<T>, region: Region, nu: u32) -> Result<HalfTurns<T>> {
    if let Some(r) = arc_ratio(p, region) {
        return Ok(HalfTurns::Exact(Ratio::from_integer(nu as i64) / (r * 2)));
    }
    let len = arc(p, region)?;
    Ok(HalfTurns::Approx(T::int(nu as i64) * p.length() / (T::lit(2.0) * len)))
}

/// `cot(πνL/2ℓ)`, or `None` where `νL/2ℓ` is an integer.
fn resonance_cot<T: Scalar>(p: &SystemParams<T>, region: Region, nu: u32) -> Result<Option<T>> {
    let (s, c) = match half_turns(p, region, nu)? {
        HalfTurns::Exact(x) => {
            if x.is_integer() {
                return Ok(None);
            }
            sin_cos_pi_ratio::<T>(x)
        }
        HalfTurns::Approx(x) => {
            let near = x.round();
            if (x - near).abs() <= T::lit(64.0) * T::epsilon() * x.abs().max(T::one()) {
                return Ok(None);
            }
            sin_cos_pi(x)
        }
    };
    Ok(Some(c / s))
}

fn nearest_mode<T: Scalar>(p: &SystemParams<T>, region: Region, nu: u32) -> Result<i64> {
    Ok(match half_turns::<T>(p, region, nu)? {
        HalfTurns::Exact(x) => x.round().to_integer(),
        HalfTurns::Approx(x) => x.round().to_i64().unwrap_or(i64::MAX),
    })
}

/// `E_ν = sqrt((νπ/ℓ)² + m²)` for the given arc.
pub fn resonance_energy<T: Scalar>(p: &SystemParams<T>, region: Region, nu: u32) -> Result<T> {
    if nu == 0 {
        return Err(Error::InvalidParams("resonance index nu must be positive".into()));
    }
    let len = arc(p, region)?;
    Ok((T::int(nu as i64) * T::PI() / len).hypot(T::one()))
}

fn candidate<T: Scalar>(p: &SystemParams<T>, region: Region, nu: u32, chi_branch: u8, tol: &Tolerances) -> Result<ResonantCandidate<T>> {
    let energy = resonance_energy(p, region, nu)?;
    let odd = nu % 2 == 1;
    // branch 1: a₂/a₁ = (−1)^{ν+1}; branch 2: (−1)^ν
    let parity = match (chi_branch, odd) {
        (1, true) | (2, false) => Parity::Symmetric,
        _ => Parity::Antisymmetric,
    };
    let len = arc(p, region)?;
    let g = p.gamma();
    let b0 = beta(0, energy, p, tol)?;
    let (chi, eps) = if chi_branch == 1 {
        (Some(T::zero()), Some(energy - g * b0))
    } else {
        match resonance_cot(p, region, nu)? {
            Some(cot) => {
                let chi = T::lit(2.0) * cot;
                // (γ/q)χ with q = νπ/ℓ
                let shift = g * len / (T::int(nu as i64) * T::PI()) * chi;
                (Some(chi), Some(energy - g * b0 - shift))
            }
            None => (None, None),
        }
    };
    let k_bar = nearest_mode(p, region, nu)?;
    Ok(ResonantCandidate {
        nu,
        region,
        energy,
        parity,
        chi_branch,
        chi,
        epsilon_tuning: eps,
        nearest_mode: k_bar,
        nearest_mode_gap: (energy - p.mode_frequency(ModeIndex(k_bar))).abs(),
    })
}

/// Inner and outer resonances for `ν = 1..=nu_max`, each with both `χ` branches.
pub fn resonant_energies<T: Scalar>(p: &SystemParams<T>, nu_max: u32, tol: &Tolerances) -> Result<Vec<ResonantCandidate<T>>> {
    p.require_emitters(2)?;
    let mut out = Vec::with_capacity(4 * nu_max as usize);
    for region in [Region::Inner, Region::Outer] {
        for nu in 1..=nu_max {
            for branch in [1, 2] {
                out.push(candidate(p, region, nu, branch, tol)?);
            }
        }
    }
    Ok(out)
}

/// Emitter energy that makes `c` an eigenstate, verified by solving the full two-emitter
/// equation at that energy and finding a root of the same parity at `c.energy`.
pub fn epsilon_tuning<T: Scalar>(c: &ResonantCandidate<T>, p: &SystemParams<T>, tol: &Tolerances) -> Result<T> {
    let eps = c.epsilon_tuning.ok_or(Error::NotTunable { nu: c.nu })?;
    let found = verified_root(c, p, eps, tol)?;
    let allowed = T::lit(1e-8) + T::lit(10.0) * p.gamma() * beta1_bound(p)?;
    match found {
        Some(e) if (e - c.energy).abs() <= allowed => Ok(eps),
        other => Err(Error::RoundTrip { expected: c.energy.as_f64(), found: other.map(|e| e.as_f64()) }),
    }
}

/// Root of the candidate's parity closest to its energy when the emitter energy is `eps`.
pub fn verified_root<T: Scalar>(c: &ResonantCandidate<T>, p: &SystemParams<T>, eps: T, tol: &Tolerances) -> Result<Option<T>> {
    let tuned = p.with_epsilon(eps)?;
    let k = tuned.interval_of(c.energy).unwrap_or(0);
    let report = solve_two(&tuned, (k - 1).max(0)..=k, SolveMode::FullDeterminant, tol)?;
    Ok(report
        .states
        .iter()
        .filter(|s| s.parity() == Some(c.parity))
        .map(|s| s.energy)
        .min_by(|a, b| {
            (*a - c.energy).abs().partial_cmp(&(*b - c.energy).abs()).unwrap_or(std::cmp::Ordering::Equal)
        }))
}

/// Opposite-parity inner/outer resonance pairs within `detuning_tol`, sorted by mode gap
/// (largest first).
///
/// Every combination of χ branches is listed. Only branch-1 members (`χ = 0`) are confined to
/// their arc; a pair with zero gap sits on a cavity frequency and is not isolated from it.
pub fn find_qubit_pairs<T: Scalar>(p: &SystemParams<T>, nu_max: u32, detuning_tol: T, tol: &Tolerances) -> Result<Vec<QubitCandidate<T>>> {
    let all = resonant_energies(p, nu_max, tol)?;
    let d = p.separation().ok_or(Error::EmitterCount(2))?;
    let separation_ratio = best_rational((d / (p.length() - d)).as_f64(), COMMENSURABILITY_DENOMINATOR);
    let (inner, outer): (Vec<_>, Vec<_>) = all.into_iter().partition(|c| c.region == Region::Inner);
    let mut pairs = Vec::new();
    for i in &inner {
        for o in &outer {
            if i.parity == o.parity {
                continue;
            }
            let detuning = (i.energy - o.energy).abs();
            if detuning > detuning_tol {
                continue;
            }
            let eps_mismatch = match (i.epsilon_tuning, o.epsilon_tuning) {
                (Some(a), Some(b)) => Some((a - b).abs()),
                _ => None,
            };
            pairs.push(QubitCandidate {
                inner: *i,
                outer: *o,
                detuning,
                k_bar: i.nearest_mode,
                gap: i.nearest_mode_gap,
                g_max: i.nearest_mode_gap * T::lit(DEFAULT_HEADROOM),
                commensurability: Ratio::new(i.nu as i64, o.nu as i64),
                separation_ratio,
                eps_mismatch,
                shared_tuning: eps_mismatch.is_some_and(|m| m <= detuning_tol),
            });
        }
    }
    pairs.sort_by(|a, b| b.gap.partial_cmp(&a.gap).unwrap_or(std::cmp::Ordering::Equal));
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn first_inner_resonance() {
        let p = SystemParams::<f64>::pair(10.0, 1e-2, 2.0, 4.0).unwrap();
        let e = resonance_energy(&p, Region::Inner, 1).unwrap();
        assert!((e - 1.271_6).abs() < 1e-4, "{e}");
        assert!(resonance_energy(&p, Region::Inner, 0).is_err());
    }

    #[test]
    fn parity_and_chi_structure() {
        let p = SystemParams::<f64>::pair(23.0, 1e-2, 2.0, 7.0).unwrap();
        for c in resonant_energies(&p, 6, &tol()).unwrap() {
            let sign = if c.nu % 2 == 0 { 1 } else { -1 };
            match c.chi_branch {
                1 => {
                    assert_eq!(c.parity.as_i32(), -sign);
                    assert_eq!(c.chi, Some(0.0));
                }
                _ => {
                    assert_eq!(c.parity.as_i32(), sign);
                    let len = if c.region == Region::Inner { 7.0 } else { 16.0 };
                    let expect = 2.0 / (std::f64::consts::PI * c.nu as f64 * 23.0 / (2.0 * len)).tan();
                    assert!((c.chi.unwrap() - expect).abs() < 1e-9 * expect.abs().max(1.0));
                }
            }
            let len = if c.region == Region::Inner { 7.0 } else { 16.0 };
            let q = (c.energy * c.energy - 1.0).sqrt();
            assert!((std::f64::consts::PI / q * c.nu as f64 / len - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn collisions_with_modes_are_not_tunable() {
        // L = 4d: νL/2d = 2ν is always an integer
        let p = SystemParams::<f64>::pair(80.0, 1e-2, 2.0, 20.0).unwrap();
        for c in resonant_energies(&p, 3, &tol()).unwrap().iter().filter(|c| c.region == Region::Inner) {
            assert_eq!(c.is_tunable(), c.chi_branch == 1);
            assert_eq!(c.nearest_mode, 2 * c.nu as i64);
            assert!(c.nearest_mode_gap < 1e-15);
        }
        let c = resonant_energies(&p, 1, &tol()).unwrap()[1];
        assert!(matches!(epsilon_tuning(&c, &p, &tol()), Err(Error::NotTunable { nu: 1 })));
    }

    #[test]
    fn tuning_round_trip() {
        let p = SystemParams::<f64>::pair(37.0, 1e-2, 2.0, 11.0).unwrap();
        for c in resonant_energies(&p, 3, &tol()).unwrap() {
            let eps = epsilon_tuning(&c, &p, &tol()).unwrap();
            assert_eq!(Some(eps), c.epsilon_tuning);
        }
    }

    #[test]
    fn round_trip_failure_is_reported() {
        let p = SystemParams::<f64>::pair(37.0, 1e-2, 2.0, 11.0).unwrap();
        let mut c = resonant_energies(&p, 1, &tol()).unwrap()[0];
        c.epsilon_tuning = Some(c.epsilon_tuning.unwrap() + 1e-3);
        assert!(matches!(epsilon_tuning(&c, &p, &tol()), Err(Error::RoundTrip { found: Some(_), .. })));
    }

    #[test]
    fn thirds_give_degenerate_pairs() {
        let p = SystemParams::<f64>::pair(60.0, 1e-2, 2.0, 20.0).unwrap();
        let pairs = find_qubit_pairs(&p, 6, 1e-12, &tol()).unwrap();
        assert!(!pairs.is_empty());
        for q in &pairs {
            assert_eq!(q.outer.nu, 2 * q.inner.nu);
            assert!(q.detuning <= 1e-12);
            assert_eq!(q.inner.parity, q.outer.parity.flip());
            assert_eq!(q.commensurability, Ratio::new(1, 2));
            assert_eq!(q.separation_ratio, Ratio::new(1, 2));
        }
        assert!(pairs.windows(2).all(|w| w[0].gap >= w[1].gap));
        // branch-1 inner and outer states share one tuning
        assert!(pairs.iter().any(|q| q.inner.chi_branch == 1 && q.outer.chi_branch == 1 && q.shared_tuning));
    }

    #[test]
    fn incommensurate_separation_has_no_pairs() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let p = SystemParams::<f64>::pair(60.0, 1e-2, 2.0, 60.0 * golden).unwrap();
        assert!(find_qubit_pairs(&p, 50, 1e-6, &tol()).unwrap().is_empty());
    }
}
