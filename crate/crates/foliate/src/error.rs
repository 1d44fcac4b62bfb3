//! Error types shared across the crate.

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A state fell outside the domain guard of a potential or field.
    #[error("domain guard violated at (q={q}, p={p}, t={t})")]
    GuardViolation { q: f64, p: f64, t: f64 },

    /// Derivative order outside the supported range of the catalog type.
    #[error("unsupported derivative order {order} for {what} (max {max})")]
    UnsupportedOrder {
        what: &'static str,
        order: u32,
        max: u32,
    },

    /// Reduction of a general field where B = A·p.
    #[error("singular reduction (B = A·p) at (q={q}, p={p}, t={t})")]
    SingularReduction { q: f64, p: f64, t: f64 },

    /// A family constructor rejected its parameters.
    #[error("family construction: {0}")]
    Construction(String),

    /// Root bracketing found no sign change.
    #[error("no sign change bracketed in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    /// Iterative solve exceeded its iteration budget.
    #[error("root solve did not converge within {max_iter} iterations")]
    NoConvergence { max_iter: usize },

    /// Adaptive quadrature hit its subdivision limit.
    #[error("quadrature did not converge within {limit} subdivisions")]
    QuadratureLimit { limit: usize },

    /// Multiple roots of an implicit potential relation: crossing characteristics.
    #[error("characteristic crossing (shock): multiple roots near (q={q}, t={t})")]
    Shock { q: f64, t: f64 },

    /// Adaptive step size shrank below the representable floor.
    #[error("step size underflow at t={t} (stiffness)")]
    StepUnderflow { t: f64 },

    /// Integration exceeded its step budget.
    #[error("step budget exceeded ({max_steps} steps)")]
    StepBudget { max_steps: usize },

    /// A check that requires a closed-form invariant was asked of a family without one.
    #[error("unsupported check: {0}")]
    UnsupportedCheck(String),

    /// Every grid point was excluded by guards.
    #[error("degenerate scan: all {total} grid points excluded by guards")]
    DegenerateScan { total: usize },

    /// Rejection sampling could not find a guard-interior point.
    #[error("sampling exhausted after {retries} rejected draws")]
    SamplingExhausted { retries: usize },

    /// Invalid caller-supplied configuration (tolerances, ranges, counts).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors that mark a point as outside a formula's domain
    /// (scans count such points as excluded rather than aborting).
    pub fn is_domain_exclusion(&self) -> bool {
        matches!(
            self,
            Error::GuardViolation { .. }
                | Error::SingularReduction { .. }
                | Error::Shock { .. }
                | Error::NoBracket { .. }
        )
    }

    pub(crate) fn guard(q: f64, p: f64, t: f64) -> Self {
        Error::GuardViolation { q, p, t }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
