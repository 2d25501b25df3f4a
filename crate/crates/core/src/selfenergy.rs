//! Self-energy of one or two emitters on the ring.
//!
//! The closed forms split `Σ(E)` into a pole part, which carries the photon frequencies, and
//! smooth branch-cut integrals `β₀`, `β₁`. For two emitters the matrix is symmetric with equal
//! diagonals, so it is diagonal in the parity basis `(1, ±1)/√2`; [`parity_self_energy`]
//! evaluates those eigenvalues in a factorised form that stays finite at photon modes which
//! decouple from one parity.

use crate::error::{Error, Result};
use crate::model::{Branch, ModeIndex, SystemParams};
use crate::quadrature::integrate;
use crate::scalar::{xcot, xcot_prime_over_z, xcoth, xcoth_prime_over_z, Scalar};
use crate::tolerance::Tolerances;

/// Parity of a two-emitter state, `a₂/a₁ = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl Parity {
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Parity::Symmetric => T::one(),
            Parity::Antisymmetric => -T::one(),
        }
    }

    pub fn from_sign(sign: i32) -> Self {
        if sign >= 0 {
            Parity::Symmetric
        } else {
            Parity::Antisymmetric
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Parity::Symmetric => 1,
            Parity::Antisymmetric => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Symmetric => Parity::Antisymmetric,
            Parity::Antisymmetric => Parity::Symmetric,
        }
    }
}

/// Scalar self-energy or the independent entries of the symmetric 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelfEnergyShape<T> {
    Scalar(T),
    SymmetricPair { diagonal: T, off_diagonal: T },
}

impl<T: Scalar> SelfEnergyShape<T> {
    pub fn diagonal(&self) -> T {
        match *self {
            SelfEnergyShape::Scalar(v) => v,
            SelfEnergyShape::SymmetricPair { diagonal, .. } => diagonal,
        }
    }

    /// Off-diagonal entry; zero for a single emitter.
    pub fn off_diagonal(&self) -> T {
        match *self {
            SelfEnergyShape::Scalar(_) => T::zero(),
            SelfEnergyShape::SymmetricPair { off_diagonal, .. } => off_diagonal,
        }
    }

    /// Eigenvalue belonging to the parity eigenvector `(1, ±1)/√2`.
    pub fn parity_eigenvalue(&self, parity: Parity) -> T {
        self.diagonal() + parity.sign::<T>() * self.off_diagonal()
    }

    /// Full matrix `[[Σ₁₁, Σ₁₂], [Σ₂₁, Σ₂₂]]` (1×1 block padded with zeros for one emitter).
    pub fn matrix(&self) -> [[T; 2]; 2] {
        let (d, o) = (self.diagonal(), self.off_diagonal());
        [[d, o], [o, d]]
    }
}

/// `Σ(E)` together with its energy derivative and the branch-cut integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfEnergyValue<T> {
    pub energy: T,
    pub value: SelfEnergyShape<T>,
    pub derivative: SelfEnergyShape<T>,
    pub beta0: T,
    pub beta0_prime: T,
    pub beta1: Option<T>,
    pub beta1_prime: Option<T>,
    pub branch: Branch,
}

/// Eigenvalue `λ_s(E) = Σ₁₁ + sΣ₁₂` of the two-emitter self-energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityValue<T> {
    pub energy: T,
    pub parity: Parity,
    pub value: T,
    pub derivative: T,
    /// Eigenvalue of the geometric matrix `A(q)` (propagating branch only).
    pub chi: Option<T>,
    pub beta0: T,
    pub beta1: T,
    pub includes_beta1: bool,
}

/// `(e^{−x y} + e^{−(L−x) y}) / (1 − e^{−L y})` and its `y`-derivative.
fn image_sum<T: Scalar>(x: T, len: T, y: T) -> (T, T) {
    let e1 = (-x * y).exp();
    let e2 = (-(len - x) * y).exp();
    let num = e1 + e2;
    let dnum = -x * e1 - (len - x) * e2;
    let den = -(-len * y).exp_m1();
    let dden = len * (-len * y).exp();
    (num / den, dnum / den - num * dden / (den * den))
}

/// `[β₀, β₀′, β_x, β_x′]` at energy `E` for an emitter distance `x`.
fn beta_components<T: Scalar>(energy: T, len: T, x: T, tol: &Tolerances) -> Result<[T; 4]> {
    if !(energy > T::zero()) {
        return Err(Error::NonPositiveEnergy(energy.as_f64()));
    }
    let rel = T::tol(tol.quad_rel);
    let value_floor = T::min_positive_value() / T::epsilon();
    // the derivative integrands change sign and reach 1/E² near u = 0; their absolute
    // accuracy is set against the integral of their magnitude, of order 1/min(E, 1)
    let deriv_floor = rel * T::lit(1e-2) / energy.min(T::one());
    let abs_tol = [value_floor, deriv_floor, value_floor, deriv_floor];
    let e2 = energy * energy;
    let integrand = |u: T| -> [T; 4] {
        let s = u.sinh();
        let s2 = s * s;
        let den = e2 + s2;
        let w = energy / den;
        let wd = (s2 - e2) / (den * den);
        let (g0, _) = image_sum(T::zero(), len, u.cosh());
        let (gx, _) = image_sum(x, len, u.cosh());
        [g0 * w, g0 * wd, gx * w, gx * wd]
    };

    let stop_eps = T::lit(1e-16).max(T::epsilon());
    let u_past_peak = energy.asinh() + T::one();
    let u_limit = u_past_peak + T::lit(80.0);
    let mut total = [T::zero(); 4];
    let mut u = T::zero();
    let mut intervals = 0usize;
    loop {
        let est = integrate(integrand, u, u + T::one(), rel, abs_tol, tol.max_quad_intervals)?;
        intervals += est.intervals;
        for (t, v) in total.iter_mut().zip(est.value) {
            *t = *t + v;
        }
        u = u + T::one();
        let negligible = (0..4).all(|i| {
            let floor = if i % 2 == 0 { value_floor } else { deriv_floor * T::lit(1e-3) };
            est.value[i].abs() <= stop_eps * total[i].abs() || est.value[i].abs() <= floor
        });
        if u > u_past_peak && negligible {
            break;
        }
        if u > u_limit {
            return Err(Error::Quadrature {
                partial: total[0].as_f64() / std::f64::consts::PI,
                error: est.error[0].as_f64(),
                intervals,
            });
        }
    }
    let pi = T::PI();
    Ok([total[0] / pi, total[1] / pi, total[2] / pi, total[3] / pi])
}

/// `β_n(E)` for `n = 0` (local) or `n = 1` (between the two emitters).
pub fn beta<T: Scalar>(n: u8, energy: T, p: &SystemParams<T>, tol: &Tolerances) -> Result<T> {
    beta_with_derivative(n, energy, p, tol).map(|(b, _)| b)
}

/// `β_n(E)` and `dβ_n/dE`.
pub fn beta_with_derivative<T: Scalar>(n: u8, energy: T, p: &SystemParams<T>, tol: &Tolerances) -> Result<(T, T)> {
    match n {
        0 => {
            let c = beta_components(energy, p.length(), T::zero(), tol)?;
            Ok((c[0], c[1]))
        }
        1 => {
            let d = p.separation().ok_or(Error::EmitterCount(2))?;
            let c = beta_components(energy, p.length(), d, tol)?;
            Ok((c[2], c[3]))
        }
        _ => Err(Error::InvalidParams(format!("beta index must be 0 or 1, got {n}"))),
    }
}

/// Bound `coth(mL/2)/(πm)` on `β₀`; valid for `E ≥ m`.
pub fn beta0_bound<T: Scalar>(p: &SystemParams<T>) -> T {
    T::one() / (p.length() / T::lit(2.0)).tanh() / T::PI()
}

/// Tighter bound on `β₀(E)`: `coth(mL/2)·asinh(q)/(πq)` above threshold and its continuation
/// `coth(mL/2)·arccos(E)/(πκ)` below, which exceeds [`beta0_bound`] there.
pub fn beta0_energy_bound<T: Scalar>(energy: T, p: &SystemParams<T>) -> T {
    beta0_bound(p) * weight_integral(energy)
}

/// `∫₀^∞ E du/(E² + sinh²u)`: `asinh(q)/q` above threshold, `arccos(E)/κ` below.
fn weight_integral<T: Scalar>(energy: T) -> T {
    let one = T::one();
    if energy >= one {
        let q = ((energy - one) * (energy + one)).sqrt();
        if q < T::lit(1e-6) {
            one - q * q / T::lit(6.0)
        } else {
            q.asinh() / q
        }
    } else {
        let k = ((one - energy) * (one + energy)).sqrt();
        if k < T::lit(1e-6) {
            one + k * k / T::lit(6.0)
        } else {
            energy.acos() / k
        }
    }
}

/// Bound `(e^{−m(L−d)} + e^{−md})/(πm)` on `|β₁|`, the large-`mL` form valid for `E ≥ m`.
pub fn beta1_bound<T: Scalar>(p: &SystemParams<T>) -> Result<T> {
    let d = p.separation().ok_or(Error::EmitterCount(2))?;
    Ok(((-(p.length() - d)).exp() + (-d).exp()) / T::PI())
}

/// Bound on `|β₁(E)|` valid at every energy and length: [`beta1_bound`] times the image factor
/// `1/(1 − e^{−mL})` and the weight integral of [`beta0_energy_bound`].
pub fn beta1_energy_bound<T: Scalar>(energy: T, p: &SystemParams<T>) -> Result<T> {
    Ok(beta1_bound(p)? / -(-p.length()).exp_m1() * weight_integral(energy))
}

/// Momentum split as `q = q_{k₀} + δq` around the nearest mode, so that `cot(qL/2)` and the
/// emitter phases can be taken from `δq` without cancellation near photon frequencies.
#[derive(Debug, Clone, Copy)]
struct Reduced<T> {
    q: T,
    k0: i64,
    dq: T,
}

fn reduce<T: Scalar>(p: &SystemParams<T>, energy: T) -> Reduced<T> {
    let one = T::one();
    let q = ((energy - one) * (energy + one)).sqrt();
    let k0 = p.nearest_mode_to_wavenumber(q);
    let qk = p.wavenumber(ModeIndex(k0));
    let wk = p.mode_frequency(ModeIndex(k0));
    let sum = q + qk;
    let dq = if sum > T::zero() { (energy - wk) * (energy + wk) / sum } else { T::zero() };
    Reduced { q, k0, dq }
}

/// Rejects energies within the exclusion distance of a photon mode for which `coupled(k)`.
fn check_pole<T: Scalar>(
    p: &SystemParams<T>,
    energy: T,
    tol: &Tolerances,
    coupled: impl Fn(i64) -> bool,
) -> Result<()> {
    let delta = T::lit(tol.pole_exclusion);
    let one = T::one();
    let q = if energy > one { ((energy - one) * (energy + one)).sqrt() } else { T::zero() };
    let k0 = p.nearest_mode_to_wavenumber(q);
    for k in (k0 - 1).max(0)..=k0 + 1 {
        let w = p.mode_frequency(ModeIndex(k));
        let dist = (energy - w).abs();
        if dist < delta && coupled(k) {
            return Err(Error::PoleProximity { energy: energy.as_f64(), mode: k, distance: dist.as_f64() });
        }
    }
    Ok(())
}

/// `(sin, cos)` of `α + β` given `(sin α, cos α)`.
fn rotate<T: Scalar>((s, c): (T, T), beta: T) -> (T, T) {
    let (sb, cb) = beta.sin_cos();
    (s * cb + c * sb, c * cb - s * sb)
}

/// Pole part of `Σ₁₁/γ` and its energy derivative.
fn local_pole_part<T: Scalar>(p: &SystemParams<T>, energy: T) -> (T, T) {
    let len = p.length();
    let half = len / T::lit(2.0);
    if energy >= T::one() {
        let r = reduce(p, energy);
        let (s, c) = (half * r.dq).sin_cos();
        let cot = c / s;
        let q = r.q;
        let d_dq = -half / (s * s) / q - cot / (q * q);
        (cot / q, d_dq * energy / q)
    } else {
        let k = ((T::one() - energy) * (T::one() + energy)).sqrt();
        let z = k * half;
        let coth = T::one() / z.tanh();
        let sh = z.sinh();
        let d_dk = half / (sh * sh) / k + coth / (k * k);
        (-coth / k, -d_dk * energy / k)
    }
}

/// Pole part of `Σ₁₂/γ` and its energy derivative.
fn transfer_pole_part<T: Scalar>(p: &SystemParams<T>, d: T, energy: T) -> (T, T) {
    let len = p.length();
    let half = len / T::lit(2.0);
    if energy >= T::one() {
        let r = reduce(p, energy);
        let (s, c) = (half * r.dq).sin_cos();
        let cot = c / s;
        let (sd, cd) = rotate(p.half_phase(2 * r.k0), d * r.dq);
        let q = r.q;
        let a12 = cot * cd + sd;
        let a12_prime = -half / (s * s) * cd - cot * d * sd + d * cd;
        (a12 / q, (a12_prime / q - a12 / (q * q)) * energy / q)
    } else {
        let k = ((T::one() - energy) * (T::one() + energy)).sqrt();
        let (g, dg) = image_sum(d, len, k);
        let d_dk = -dg / k + g / (k * k);
        (-g / k, -d_dk * energy / k)
    }
}

fn branch_of<T: Scalar>(energy: T) -> Branch {
    if energy >= T::one() {
        Branch::Propagating
    } else {
        Branch::Evanescent
    }
}

/// Single-emitter self-energy `Σ(E)` from the closed form.
///
/// Also gives the diagonal entry for two emitters.
pub fn sigma_single<T: Scalar>(energy: T, p: &SystemParams<T>, tol: &Tolerances) -> Result<SelfEnergyValue<T>> {
    if !(energy > T::zero()) {
        return Err(Error::NonPositiveEnergy(energy.as_f64()));
    }
    check_pole(p, energy, tol, |_| true)?;
    let betas = beta_components(energy, p.length(), T::zero(), tol)?;
    let (pole, pole_prime) = local_pole_part(p, energy);
    let g = p.gamma();
    Ok(SelfEnergyValue {
        energy,
        value: SelfEnergyShape::Scalar(g * (pole + betas[0])),
        derivative: SelfEnergyShape::Scalar(g * (pole_prime + betas[1])),
        beta0: betas[0],
        beta0_prime: betas[1],
        beta1: None,
        beta1_prime: None,
        branch: branch_of(energy),
    })
}

/// Two-emitter self-energy matrix `Σ_{jℓ}(E) = (γ/q)A_{jℓ}(q) + γβ_{j−ℓ}(E)`.
pub fn sigma_matrix<T: Scalar>(energy: T, p: &SystemParams<T>, tol: &Tolerances) -> Result<SelfEnergyValue<T>> {
    p.require_emitters(2)?;
    if !(energy > T::zero()) {
        return Err(Error::NonPositiveEnergy(energy.as_f64()));
    }
    check_pole(p, energy, tol, |_| true)?;
    let d = p.separation().ok_or(Error::EmitterCount(2))?;
    let b = beta_components(energy, p.length(), d, tol)?;
    let (p11, p11_prime) = local_pole_part(p, energy);
    let (p12, p12_prime) = transfer_pole_part(p, d, energy);
    let g = p.gamma();
    Ok(SelfEnergyValue {
        energy,
        value: SelfEnergyShape::SymmetricPair { diagonal: g * (p11 + b[0]), off_diagonal: g * (p12 + b[2]) },
        derivative: SelfEnergyShape::SymmetricPair {
            diagonal: g * (p11_prime + b[1]),
            off_diagonal: g * (p12_prime + b[3]),
        },
        beta0: b[0],
        beta0_prime: b[1],
        beta1: Some(b[2]),
        beta1_prime: Some(b[3]),
        branch: branch_of(energy),
    })
}

/// `χ_s(q)/q` for the parity branch, its energy derivative and `χ_s` itself above threshold.
fn parity_pole_part<T: Scalar>(p: &SystemParams<T>, d: T, parity: Parity, energy: T, tol: &Tolerances) -> (T, T, Option<T>) {
    let len = p.length();
    let two = T::lit(2.0);
    let far = len - d;
    if energy < T::one() {
        let k = ((T::one() - energy) * (T::one() + energy)).sqrt();
        let (al, be) = (k * d / two, k * far / two);
        return match parity {
            Parity::Symmetric => {
                let t = al.tanh() + be.tanh();
                let sa = T::one() / al.cosh();
                let sb = T::one() / be.cosh();
                let dt = sa * sa * d / two + sb * sb * far / two;
                let h = -two / (k * t);
                let dh_dk = two * (t + k * dt) / (k * t * k * t);
                (h, -dh_dk * energy / k, None)
            }
            Parity::Antisymmetric => {
                let den = two / d * xcoth(al).0 + two / far * xcoth(be).0;
                let h = -two / den;
                // d(den)/dκ = κ[(d/2)·xcoth′(α)/α + ((L−d)/2)·xcoth′(β)/β], dκ/dE = −E/κ
                let dden_over_k = xcoth_prime_over_z(al) * d / two + xcoth_prime_over_z(be) * far / two;
                (h, -two * energy * dden_over_k / (den * den), None)
            }
        };
    }

    let r = reduce(p, energy);
    let q = r.q;
    if r.k0 == 0 && parity == Parity::Antisymmetric {
        let (a, b) = (q * d / two, q * far / two);
        let den = two / d * xcot(a).0 + two / far * xcot(b).0;
        let h = -two / den;
        let dden_over_q = xcot_prime_over_z(a) * d / two + xcot_prime_over_z(b) * far / two;
        let dh_de = two * dden_over_q / (den * den) * energy;
        return (h, dh_de, Some(h * q));
    }

    let theta = p.half_phase(r.k0);
    let (ea, eb) = (d * r.dq / two, far * r.dq / two);
    let (sa, ca) = rotate(theta, ea);
    let (sb, cb) = rotate((-theta.0, theta.1), eb);
    let s = (ea + eb).sin();
    let (num, num_prime) = match parity {
        Parity::Symmetric => (two * ca * cb, -(d * cb * cb + far * ca * ca)),
        Parity::Antisymmetric => (-two * sa * sb, -(d * sb * sb + far * sa * sa)),
    };
    let (chi, chi_prime) = if s == T::zero() {
        let removable = p.parity_weight(r.k0, parity.sign()) < T::lit(tol.removable);
        if removable {
            (T::zero(), -d * far / len)
        } else {
            (T::infinity(), -T::infinity())
        }
    } else {
        (num / s, num_prime / (s * s))
    };
    (chi / q, (chi_prime / q - chi / (q * q)) * energy / q, Some(chi))
}

/// Eigenvalue `λ_s(E)` of the two-emitter self-energy for parity `s`, with its derivative.
///
/// With `include_beta1 = false` the inter-emitter branch-cut term is dropped, giving the
/// large-separation form of the eigenvalue equation. Photon modes that decouple from the
/// requested parity (`1 + s·cos(q_k d) ≈ 0`) are not poles and evaluate finitely.
pub fn parity_self_energy<T: Scalar>(
    energy: T,
    p: &SystemParams<T>,
    parity: Parity,
    include_beta1: bool,
    tol: &Tolerances,
) -> Result<ParityValue<T>> {
    p.require_emitters(2)?;
    if !(energy > T::zero()) {
        return Err(Error::NonPositiveEnergy(energy.as_f64()));
    }
    let removable = T::lit(tol.removable);
    check_pole(p, energy, tol, |k| p.parity_weight(k, parity.sign()) >= removable)?;
    let d = p.separation().ok_or(Error::EmitterCount(2))?;
    let b = beta_components(energy, p.length(), d, tol)?;
    let (h, h_prime, chi) = parity_pole_part(p, d, parity, energy, tol);
    let s: T = parity.sign();
    let (b1, b1_prime) = if include_beta1 { (b[2], b[3]) } else { (T::zero(), T::zero()) };
    let g = p.gamma();
    Ok(ParityValue {
        energy,
        parity,
        value: g * (h + b[0] + s * b1),
        derivative: g * (h_prime + b[1] + s * b1_prime),
        chi,
        beta0: b[0],
        beta1: b[2],
        includes_beta1: include_beta1,
    })
}

fn pair_distance<T: Scalar>(p: &SystemParams<T>, pair: (usize, usize)) -> Result<Option<T>> {
    let (j, l) = pair;
    let n = p.emitter_count();
    if j == 0 || l == 0 || j > n || l > n {
        return Err(Error::EmitterCount(j.max(l)));
    }
    Ok(if j == l { None } else { p.separation() })
}

/// Partial mode sum `Σ_{|k|≤K} F_k² cos(2πk d_{jℓ}/L)/(E − ω_k)`.
///
/// Summed from the highest mode down, pairing `±k`.
pub fn sigma_series_partial<T: Scalar>(energy: T, p: &SystemParams<T>, k_max: i64, pair: (usize, usize)) -> Result<T> {
    let dist = pair_distance(p, pair)?;
    let two = T::lit(2.0);
    let mut sum = T::zero();
    for k in (1..=k_max.max(0)).rev() {
        let f2 = p.form_factor(ModeIndex(k)).powi(2);
        let phase = if dist.is_some() { p.mode_phase(ModeIndex(k)).1 } else { T::one() };
        sum = sum + two * f2 * phase / (energy - p.mode_frequency(ModeIndex(k)));
    }
    let f0 = p.form_factor(ModeIndex(0)).powi(2);
    Ok(sum + f0 / (energy - T::one()))
}

/// Partial mode sum for the derivative, `−Σ_{|k|≤K} F_k² cos(2πk d_{jℓ}/L)/(E − ω_k)²`.
pub fn sigma_series_derivative_partial<T: Scalar>(
    energy: T,
    p: &SystemParams<T>,
    k_max: i64,
    pair: (usize, usize),
) -> Result<T> {
    let dist = pair_distance(p, pair)?;
    let two = T::lit(2.0);
    let mut sum = T::zero();
    for k in (1..=k_max.max(0)).rev() {
        let f2 = p.form_factor(ModeIndex(k)).powi(2);
        let phase = if dist.is_some() { p.mode_phase(ModeIndex(k)).1 } else { T::one() };
        let x = energy - p.mode_frequency(ModeIndex(k));
        sum = sum - two * f2 * phase / (x * x);
    }
    let f0 = p.form_factor(ModeIndex(0)).powi(2);
    Ok(sum - f0 / ((energy - T::one()) * (energy - T::one())))
}

/// Tail estimate `γL/(2π²K)` for the truncation error of the local partial sum.
pub fn series_tail_estimate<T: Scalar>(p: &SystemParams<T>, k_max: i64) -> T {
    p.gamma() * p.length() / (T::lit(2.0) * T::PI() * T::PI() * T::int(k_max.max(1)))
}
