//! Univariate Gaussian exponential-family primitives.
//!
//! All posteriors in this crate are stored entrywise in moment form
//! `(mean, variance)`. The minimal natural parameterization
//! `(η₁, η₂) = (mean/variance, −1/(2·variance))` is computed on demand for
//! the Bregman machinery. The log-partition convention is
//!
//! `A(η) = −η₁²/(4η₂) − ½·ln(−2η₂)`
//!
//! which absorbs the `−½·ln(2π)` constant into the base measure; the
//! constant cancels in every divergence, so only consistency matters.

use crate::error::{Error, Result};

/// Variances below this floor are clamped during iteration (quadratic-root
/// variance updates can produce tiny roots under extreme duals).
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// A univariate Gaussian in moment form: N(mean, variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianParams {
    /// Validating constructor: `variance` must be finite and strictly positive.
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::InvalidInput {
                name: "mean",
                reason: format!("must be finite, got {mean}"),
            });
        }
        if !variance.is_finite() || variance <= 0.0 {
            return Err(Error::InvalidInput {
                name: "variance",
                reason: format!("must be finite and > 0, got {variance}"),
            });
        }
        Ok(Self { mean, variance })
    }

    /// The standard normal N(0, 1).
    pub fn standard() -> Self {
        Self {
            mean: 0.0,
            variance: 1.0,
        }
    }
}

/// Minimal natural parameters of a univariate Gaussian:
/// `η₁ = mean/variance`, `η₂ = −1/(2·variance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalParams {
    pub eta1: f64,
    pub eta2: f64,
}

impl NaturalParams {
    /// Validating constructor: `eta2` must be finite and strictly negative.
    pub fn new(eta1: f64, eta2: f64) -> Result<Self> {
        if !eta1.is_finite() {
            return Err(Error::InvalidInput {
                name: "eta1",
                reason: format!("must be finite, got {eta1}"),
            });
        }
        if !eta2.is_finite() || eta2 >= 0.0 {
            return Err(Error::InvalidInput {
                name: "eta2",
                reason: format!("must be finite and < 0, got {eta2}"),
            });
        }
        Ok(Self { eta1, eta2 })
    }
}

/// Moment form → natural form.
pub fn to_natural(p: GaussianParams) -> NaturalParams {
    NaturalParams {
        eta1: p.mean / p.variance,
        eta2: -1.0 / (2.0 * p.variance),
    }
}

/// Natural form → moment form.
pub fn to_moment(n: NaturalParams) -> GaussianParams {
    let variance = -1.0 / (2.0 * n.eta2);
    GaussianParams {
        mean: n.eta1 * variance,
        variance,
    }
}

/// Log-partition `A(η) = −η₁²/(4η₂) − ½·ln(−2η₂)`.
///
/// Equals `mean²/(2·variance) + ½·ln(variance)` in moment form, up to the
/// base-measure constant fixed in the module docs.
pub fn log_partition(n: NaturalParams) -> f64 {
    -n.eta1 * n.eta1 / (4.0 * n.eta2) - 0.5 * (-2.0 * n.eta2).ln()
}

/// Gradient of the log-partition, i.e. the mean of the sufficient
/// statistics `(x, x²)`: `∇A(η) = (mean, mean² + variance)`.
pub fn log_partition_grad(n: NaturalParams) -> (f64, f64) {
    let m = to_moment(n);
    (m.mean, m.mean * m.mean + m.variance)
}

/// KL divergence `KL(p ‖ q)` between univariate Gaussians:
///
/// `(μ_p − μ_q)²/(2σ²_q) + ½·ln(σ²_q/σ²_p) + σ²_p/(2σ²_q) − ½`
pub fn gaussian_kl(p: GaussianParams, q: GaussianParams) -> f64 {
    let dm = p.mean - q.mean;
    dm * dm / (2.0 * q.variance) + 0.5 * (q.variance.ln() - p.variance.ln())
        + 0.5 * p.variance / q.variance
        - 0.5
}

/// Bregman divergence induced by the log-partition:
///
/// `B(λ, λ′) = A(λ) − A(λ′) − ⟨λ − λ′, ∇A(λ′)⟩`
///
/// For a minimal exponential family this equals the reversed KL divergence
/// between the corresponding distributions, `KL(P_λ′ ‖ P_λ)`.
pub fn bregman_divergence(lhs: NaturalParams, rhs: NaturalParams) -> f64 {
    let (g1, g2) = log_partition_grad(rhs);
    log_partition(lhs) - log_partition(rhs) - (lhs.eta1 - rhs.eta1) * g1
        - (lhs.eta2 - rhs.eta2) * g2
}
