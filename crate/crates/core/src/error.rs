use thiserror::Error;

/// Errors raised by the spectral routines. Energies are reported in units of the photon mass.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("energy {0} is outside the physical search range (E > 0)")]
    NonPositiveEnergy(f64),

    #[error("energy {energy} lies within {distance:e} of the photon frequency of mode {mode}")]
    PoleProximity { energy: f64, mode: i64, distance: f64 },

    #[error("quadrature did not converge: partial value {partial}, error estimate {error:e} after {intervals} intervals")]
    Quadrature { partial: f64, error: f64, intervals: usize },

    #[error("no sign change in [{lo}, {hi}] even at the pole exclusion distance")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("root iteration stalled in [{lo}, {hi}] after {iterations} iterations")]
    RootNotConverged { lo: f64, hi: f64, iterations: usize },

    #[error("energy {energy} is not an eigenvalue (scaled residual {residual:e})")]
    NotARoot { energy: f64, residual: f64 },

    #[error("sub-threshold root lies below the search floor {floor}")]
    BelowSearchFloor { floor: f64 },

    #[error("operation requires {0} emitter(s)")]
    EmitterCount(usize),

    #[error("grid of {n_grid} points undersamples {required} required points")]
    Undersampled { n_grid: usize, required: usize },

    #[error("resonance nu={nu} collides with a cavity mode; branch 2 is not tunable")]
    NotTunable { nu: u32 },

    #[error("tuned excitation energy does not reproduce E={expected}: nearest root {found:?}")]
    RoundTrip { expected: f64, found: Option<f64> },

    #[error("analytic roots {first} and {second} both map to matrix eigenvalue {eigenvalue}")]
    AmbiguousMatch { first: usize, second: usize, eigenvalue: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;
