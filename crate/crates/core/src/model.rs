//! Physical configuration of the ring, photon dispersion and emitter-photon form factor.
//!
//! Everything is stored in units of the photon effective mass `m` (so `m = 1` internally):
//! energies in `m`, lengths in `1/m`, the coupling constant in `m²`. The dimensionful mass is
//! kept only to convert values back at the I/O boundary.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::scalar::{best_rational, sin_cos_pi, sin_cos_pi_ratio, Scalar};

/// Largest denominator for which an emitter separation is treated as an exact fraction of `L`.
const MAX_RATIO_DENOMINATOR: i64 = 1000;

/// Signed longitudinal mode label `k`, with wavenumber `2πk/L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex(pub i64);

/// Whether the photon momentum at a given energy is real or imaginary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Propagating,
    Evanescent,
}

/// Momentum associated with an energy: `q = sqrt(E² − 1)` above threshold,
/// `κ = sqrt(1 − E²)` below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Momentum<T> {
    Propagating(T),
    Evanescent(T),
}

impl<T: Scalar> Momentum<T> {
    pub fn value(&self) -> T {
        match *self {
            Momentum::Propagating(q) | Momentum::Evanescent(q) => q,
        }
    }

    pub fn branch(&self) -> Branch {
        match self {
            Momentum::Propagating(_) => Branch::Propagating,
            Momentum::Evanescent(_) => Branch::Evanescent,
        }
    }
}

/// Distance between the two emitters, measured from emitter 1 (at `x = 0`) along the ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation<T> {
    distance: T,
    /// `d/L` when it is a fraction with a small denominator (to working precision).
    ratio: Option<Ratio<i64>>,
}

impl<T: Scalar> Separation<T> {
    pub fn distance(&self) -> T {
        self.distance
    }

    pub fn ratio(&self) -> Option<Ratio<i64>> {
        self.ratio
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    mass: T,
    length: T,
    gamma: T,
    epsilon: T,
    separation: Option<Separation<T>>,
}

impl<T: Scalar> SystemParams<T> {
    /// One emitter, all quantities in units of `m`.
    pub fn single(length: T, gamma: T, epsilon: T) -> Result<Self> {
        let p = Self { mass: T::one(), length, gamma, epsilon, separation: None };
        p.validate()?;
        Ok(p)
    }

    /// Two emitters at distance `separation` (measured from emitter 1), units of `m`.
    pub fn pair(length: T, gamma: T, epsilon: T, separation: T) -> Result<Self> {
        let mut p = Self { mass: T::one(), length, gamma, epsilon, separation: None };
        p.validate()?;
        p.separation = Some(Self::make_separation(length, separation)?);
        Ok(p)
    }

    /// Builds the parameters from dimensionful inputs (`ħ = c = 1`), rescaling by `m`.
    ///
    /// `positions` holds one or two emitter coordinates in `[−L/2, L/2)`.
    pub fn from_dimensionful(mass: T, length: T, gamma: T, epsilon: T, positions: &[T]) -> Result<Self> {
        if !(mass > T::zero()) {
            return Err(Error::InvalidParams(format!("mass must be positive, got {mass}")));
        }
        let half = length / T::lit(2.0);
        for &x in positions {
            if !(x >= -half && x < half) {
                return Err(Error::InvalidParams(format!("emitter position {x} outside [-L/2, L/2)")));
            }
        }
        let scaled_len = length * mass;
        let scaled_gamma = gamma / (mass * mass);
        let scaled_eps = epsilon / mass;
        match positions {
            [_] => {
                let mut p = Self::single(scaled_len, scaled_gamma, scaled_eps)?;
                p.mass = mass;
                Ok(p)
            }
            [x1, x2] => {
                let gap = (*x2 - *x1) * mass;
                let d = gap - scaled_len * (gap / scaled_len).floor();
                let mut p = Self::pair(scaled_len, scaled_gamma, scaled_eps, d)?;
                p.mass = mass;
                Ok(p)
            }
            _ => Err(Error::InvalidParams(format!(
                "expected 1 or 2 emitter positions, got {}",
                positions.len()
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        let checks = [
            ("length", self.length),
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
            ("mass", self.mass),
        ];
        for (name, v) in checks {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    fn make_separation(length: T, d: T) -> Result<Separation<T>> {
        if !(d > T::zero() && d < length) {
            return Err(Error::InvalidParams(format!(
                "emitter separation must satisfy 0 < d < L (d = {d}, L = {length}); coincident emitters are rejected"
            )));
        }
        let frac = (d / length).as_f64();
        let candidate = best_rational(frac, MAX_RATIO_DENOMINATOR);
        let approx = *candidate.numer() as f64 / *candidate.denom() as f64;
        let snap = 64.0 * T::epsilon().as_f64();
        let ratio = ((approx - frac).abs() <= snap).then_some(candidate);
        Ok(Separation { distance: d, ratio })
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: T) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    /// Changes the ring length, keeping the emitter separation fixed.
    pub fn with_length(mut self, length: T) -> Result<Self> {
        self.length = length;
        self.validate()?;
        if let Some(sep) = self.separation {
            self.separation = Some(Self::make_separation(length, sep.distance)?);
        }
        Ok(self)
    }

    pub fn with_separation(mut self, d: T) -> Result<Self> {
        self.separation = Some(Self::make_separation(self.length, d)?);
        Ok(self)
    }

    /// Dimensionful photon mass used for unit conversion at the boundary.
    pub fn mass(&self) -> T {
        self.mass
    }

    /// `mL`
    pub fn length(&self) -> T {
        self.length
    }

    /// `γ/m²`
    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `ε/m`
    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// `md`, for two emitters.
    pub fn separation(&self) -> Option<T> {
        self.separation.map(|s| s.distance)
    }

    pub fn separation_info(&self) -> Option<Separation<T>> {
        self.separation
    }

    pub fn emitter_count(&self) -> usize {
        if self.separation.is_some() {
            2
        } else {
            1
        }
    }

    /// Internal emitter coordinates: emitter 1 at the origin.
    pub fn positions(&self) -> Vec<T> {
        match self.separation {
            None => vec![T::zero()],
            Some(s) => vec![T::zero(), s.distance],
        }
    }

    pub(crate) fn require_emitters(&self, n: usize) -> Result<()> {
        if self.emitter_count() == n {
            Ok(())
        } else {
            Err(Error::EmitterCount(n))
        }
    }

    /// `q_k = 2πk/L`
    pub fn wavenumber(&self, k: ModeIndex) -> T {
        T::TAU() * T::int(k.0) / self.length
    }

    /// `ω_k = sqrt(q_k² + m²)`
    pub fn mode_frequency(&self, k: ModeIndex) -> T {
        self.wavenumber(ModeIndex(k.0.abs())).hypot(T::one())
    }

    /// `F_k = sqrt(γ / (L ω_k))`
    pub fn form_factor(&self, k: ModeIndex) -> T {
        (self.gamma / (self.length * self.mode_frequency(k))).sqrt()
    }

    /// Real momentum above threshold, evanescent decay constant below.
    pub fn momentum_of_energy(&self, energy: T) -> Result<Momentum<T>> {
        if !(energy > T::zero()) {
            return Err(Error::NonPositiveEnergy(energy.as_f64()));
        }
        let one = T::one();
        if energy >= one {
            Ok(Momentum::Propagating(((energy - one) * (energy + one)).sqrt()))
        } else {
            Ok(Momentum::Evanescent(((one - energy) * (one + energy)).sqrt()))
        }
    }

    /// Non-negative mode index whose wavenumber is closest to `q`.
    pub(crate) fn nearest_mode_to_wavenumber(&self, q: T) -> i64 {
        (q * self.length / T::TAU()).round().to_i64().unwrap_or(i64::MAX).max(0)
    }

    /// Index `k ≥ 0` with `ω_k ≤ E < ω_{k+1}`, or `None` below threshold.
    pub fn interval_of(&self, energy: T) -> Option<i64> {
        if energy < T::one() {
            return None;
        }
        let q = ((energy - T::one()) * (energy + T::one())).sqrt();
        let mut k = (q * self.length / T::TAU()).floor().to_i64().unwrap_or(0).max(0);
        while k > 0 && self.mode_frequency(ModeIndex(k)) > energy {
            k -= 1;
        }
        while self.mode_frequency(ModeIndex(k + 1)) <= energy {
            k += 1;
        }
        Some(k)
    }

    /// `(sin, cos)` of `π·k·d/L`, exact when `d/L` is commensurate. Zero phase for one emitter.
    pub(crate) fn half_phase(&self, k: i64) -> (T, T) {
        match self.separation {
            None => (T::zero(), T::one()),
            Some(Separation { ratio: Some(r), .. }) => sin_cos_pi_ratio(r * k),
            Some(Separation { distance, .. }) => {
                let frac = distance / self.length;
                let turns = T::int(k) * frac;
                sin_cos_pi(turns)
            }
        }
    }

    /// `(sin, cos)` of `q_k d = 2πk d/L`.
    pub fn mode_phase(&self, k: ModeIndex) -> (T, T) {
        self.half_phase(2 * k.0)
    }

    /// Coupling weight `1 + s·cos(q_k d)` of mode `k` to the parity combination with sign `s`.
    pub(crate) fn parity_weight(&self, k: i64, sign: T) -> T {
        let (_, c) = self.mode_phase(ModeIndex(k));
        T::one() + sign * c
    }

    /// Converts an internal energy back to dimensionful units.
    pub fn to_energy(&self, e: T) -> T {
        e * self.mass
    }
}
