//! Numerical tolerances shared by the solvers. All values are in units of the photon mass.

/// Tolerances and cut-offs for quadrature, root finding and amplitude truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative accuracy of the β integrals.
    pub quad_rel: f64,
    /// Minimum distance from a photon frequency at which `Σ` is evaluated.
    pub pole_exclusion: f64,
    /// Bracket width at which the root iteration stops.
    pub bracket: f64,
    /// Residual at which the root iteration stops.
    pub residual: f64,
    /// Largest scaled residual accepted for an energy handed to the amplitude builders.
    pub root_acceptance: f64,
    /// Target photon norm left outside the explicit mode sum.
    pub tail: f64,
    /// Upper limit for the explicit mode sum `|k| <= K_trunc`.
    pub k_trunc_cap: i64,
    /// Lower end of the sub-threshold search window.
    pub search_floor: f64,
    /// Parity weights `1 ± cos(q_k d)` below this are treated as exact decoupling.
    pub removable: f64,
    /// Segment budget for one quadrature panel.
    pub max_quad_intervals: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_rel: 1e-12,
            pole_exclusion: 1e-9,
            bracket: 1e-14,
            residual: 1e-12,
            root_acceptance: 1e-9,
            tail: 1e-12,
            k_trunc_cap: 100_000,
            search_floor: 1e-6,
            removable: 1e-12,
            max_quad_intervals: 2000,
        }
    }
}

impl Tolerances {
    /// Checks that every tolerance is positive and finite.
    pub fn validate(&self) -> crate::Result<()> {
        let fields = [
            ("quad_rel", self.quad_rel),
            ("pole_exclusion", self.pole_exclusion),
            ("bracket", self.bracket),
            ("residual", self.residual),
            ("root_acceptance", self.root_acceptance),
            ("tail", self.tail),
            ("search_floor", self.search_floor),
            ("removable", self.removable),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(crate::Error::InvalidParams(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if self.k_trunc_cap < 1 || self.max_quad_intervals < 1 {
            return Err(crate::Error::InvalidParams("k_trunc_cap and max_quad_intervals must be >= 1".into()));
        }
        Ok(())
    }
}
