//! Dressed one-excitation states of one or two two-level emitters on a ring waveguide.
//!
//! All internal quantities are in units of the photon effective mass `m`: energies in `m`,
//! lengths in `1/m`, the coupling `γ` in `m²`. The numerical core is generic over [`Scalar`]
//! (`f32` or `f64`); the `*F64` aliases name the double-precision instantiations used by the CLI.

// `!(x > 0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod model;
pub mod resonance;
pub mod oracle;
mod quadrature;
mod roots;
pub mod scalar;
pub mod selfenergy;
pub mod spectrum;
pub mod tolerance;

pub use error::{Error, Result};
pub use model::{Branch, ModeIndex, Momentum, Separation, SystemParams};
pub use resonance::{QubitCandidate, Region, ResonantCandidate};
pub use scalar::Scalar;
pub use selfenergy::{Parity, ParityValue, SelfEnergyShape, SelfEnergyValue};
pub use spectrum::{DressedState, Interleaving, SolveMode, SpectrumReport, StateLabel};
pub use tolerance::Tolerances;

pub type SystemParamsF64 = SystemParams<f64>;
pub type SystemParamsF32 = SystemParams<f32>;
pub type SelfEnergyValueF64 = SelfEnergyValue<f64>;
pub type DressedStateF64 = DressedState<f64>;
pub type SpectrumReportF64 = SpectrumReport<f64>;
