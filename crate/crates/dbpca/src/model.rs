//! Bayesian PCA model configuration, factorized posterior state, and
//! observation masks.
//!
//! The generative model for a D×N data matrix X with latent dimension M:
//!
//! - `x_n = W z_n + μ + ε`, `ε ~ N(0, τ⁻¹ I)`
//! - `z_n ~ N(0, I_M)` per sample (local latent variables)
//! - `μ_d ~ N(μ̄_d, θ⁻¹)` entrywise
//! - `w_dm ~ N(w̄_dm, α_m⁻¹)` entrywise, one precision per column of W
//! - optionally `τ, α_m, θ ~ Gamma(shape, rate)` when learned
//!
//! The variational posterior is fully factorized: Gaussian per scalar entry
//! of μ and W (moment form), a full M×M Gaussian per z_n, and Gamma factors
//! for learned hyperparameters.

use crate::error::{Error, Result};
use crate::gauss::GaussianParams;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::function::gamma::digamma;

/// Gamma distribution in shape/rate form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidInput {
                name: "gamma",
                reason: format!("shape and rate must be finite and > 0, got ({shape}, {rate})"),
            });
        }
        Ok(Self { shape, rate })
    }

    /// E[h] = shape/rate.
    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    /// E[ln h] = ψ(shape) − ln(rate).
    pub fn ln_mean(&self) -> f64 {
        digamma(self.shape) - self.rate.ln()
    }
}

/// A precision hyperparameter: either held fixed or given a Gamma prior and
/// learned through conjugate updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperPrior {
    Fixed(f64),
    Learned(GammaParams),
}

impl HyperPrior {
    pub fn validate(&self, name: &'static str) -> Result<()> {
        match self {
            HyperPrior::Fixed(v) if !(v.is_finite() && *v > 0.0) => Err(Error::InvalidInput {
                name,
                reason: format!("fixed precision must be finite and > 0, got {v}"),
            }),
            _ => Ok(()),
        }
    }
}

/// Posterior state of one hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperPosterior {
    Fixed(f64),
    Learned(GammaParams),
}

impl HyperPosterior {
    /// Posterior mean, plugged into every update where the precision appears.
    pub fn mean(&self) -> f64 {
        match self {
            HyperPosterior::Fixed(v) => *v,
            HyperPosterior::Learned(g) => g.mean(),
        }
    }

    /// E[ln h] under the posterior (ln of the value when fixed).
    pub fn ln_mean(&self) -> f64 {
        match self {
            HyperPosterior::Fixed(v) => v.ln(),
            HyperPosterior::Learned(g) => g.ln_mean(),
        }
    }

    pub fn as_learned(&self) -> Option<GammaParams> {
        match self {
            HyperPosterior::Learned(g) => Some(*g),
            HyperPosterior::Fixed(_) => None,
        }
    }
}

/// Model configuration shared by the centralized and distributed solvers.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub data_dim: usize,
    pub latent_dim: usize,
    /// Prior mean μ̄ of the offset vector (length D).
    pub prior_mean_mu: DVector<f64>,
    /// Prior means w̄ of the weight entries (D×M).
    pub prior_mean_w: DMatrix<f64>,
    pub tau: HyperPrior,
    pub alpha: HyperPrior,
    pub theta: HyperPrior,
}

/// Broad default Gamma prior: shape = rate = 1e−3.
pub const DEFAULT_GAMMA_PRIOR: GammaParams = GammaParams {
    shape: 1e-3,
    rate: 1e-3,
};

impl ModelConfig {
    /// Near-noninformative defaults: zero prior means, all three precisions
    /// learned under broad Gamma(1e−3, 1e−3) priors.
    pub fn new(data_dim: usize, latent_dim: usize) -> Result<Self> {
        let cfg = Self {
            data_dim,
            latent_dim,
            prior_mean_mu: DVector::zeros(data_dim),
            prior_mean_w: DMatrix::zeros(data_dim, latent_dim),
            tau: HyperPrior::Learned(DEFAULT_GAMMA_PRIOR),
            alpha: HyperPrior::Learned(DEFAULT_GAMMA_PRIOR),
            theta: HyperPrior::Learned(DEFAULT_GAMMA_PRIOR),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.data_dim < self.latent_dim {
            return Err(Error::InvalidInput {
                name: "latent_dim",
                reason: format!(
                    "need data_dim ≥ latent_dim ≥ 1, got ({}, {})",
                    self.data_dim, self.latent_dim
                ),
            });
        }
        if self.prior_mean_mu.len() != self.data_dim
            || self.prior_mean_w.nrows() != self.data_dim
            || self.prior_mean_w.ncols() != self.latent_dim
        {
            return Err(Error::InvalidInput {
                name: "prior_means",
                reason: "prior mean shapes must match (data_dim, latent_dim)".into(),
            });
        }
        self.tau.validate("tau")?;
        self.alpha.validate("alpha")?;
        self.theta.validate("theta")
    }

    fn initial_hyper(prior: &HyperPrior) -> HyperPosterior {
        match prior {
            HyperPrior::Fixed(v) => HyperPosterior::Fixed(*v),
            HyperPrior::Learned(g) => HyperPosterior::Learned(*g),
        }
    }
}

/// Fully factorized variational posterior over (Z, μ, W) and learned
/// hyperparameters, for one block of N samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    /// Latent means, M×N (one column per sample).
    pub z_mean: DMatrix<f64>,
    /// Latent covariances (Λ_n⁻¹), one M×M matrix per sample.
    pub z_cov: Vec<DMatrix<f64>>,
    pub mu_mean: DVector<f64>,
    pub mu_var: DVector<f64>,
    pub w_mean: DMatrix<f64>,
    pub w_var: DMatrix<f64>,
    pub tau: HyperPosterior,
    pub alpha: Vec<HyperPosterior>,
    pub theta: HyperPosterior,
}

impl Posterior {
    pub fn n_samples(&self) -> usize {
        self.z_mean.ncols()
    }

    pub fn mu_params(&self, d: usize) -> GaussianParams {
        GaussianParams {
            mean: self.mu_mean[d],
            variance: self.mu_var[d],
        }
    }

    pub fn w_params(&self, d: usize, m: usize) -> GaussianParams {
        GaussianParams {
            mean: self.w_mean[(d, m)],
            variance: self.w_var[(d, m)],
        }
    }

    /// Posterior-mean reconstruction W̄·Z̄ + μ̄·1ᵀ (D×N).
    pub fn reconstruction(&self) -> DMatrix<f64> {
        let mut recon = &self.w_mean * &self.z_mean;
        for n in 0..recon.ncols() {
            recon.column_mut(n).axpy(1.0, &self.mu_mean, 1.0);
        }
        recon
    }

    /// E[z_n z_nᵀ] = C_n + m_n m_nᵀ.
    pub fn z_second_moment(&self, n: usize) -> DMatrix<f64> {
        let m = self.z_mean.column(n);
        &self.z_cov[n] + m * m.transpose()
    }
}

/// SplitMix64 step; used to derive independent node/stream seeds from one
/// experiment seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut x = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded initialization: all posterior means drawn U(0,1), all variances 1,
/// latent covariances = I, Gamma posteriors set to their priors.
///
/// Draw order is fixed — global parameters (μ, then W row-major) before the
/// latent means — so that every node of a network seeded identically starts
/// from the *same* global-parameter initialization regardless of its local
/// sample count.
pub fn init_posterior(cfg: &ModelConfig, n_samples: usize, seed: u64) -> Posterior {
    let (d, m) = (cfg.data_dim, cfg.latent_dim);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut mu_mean = DVector::zeros(d);
    for i in 0..d {
        mu_mean[i] = rng.gen::<f64>();
    }
    let mut w_mean = DMatrix::zeros(d, m);
    for r in 0..d {
        for c in 0..m {
            w_mean[(r, c)] = rng.gen::<f64>();
        }
    }
    let mut z_mean = DMatrix::zeros(m, n_samples);
    for n in 0..n_samples {
        for k in 0..m {
            z_mean[(k, n)] = rng.gen::<f64>();
        }
    }
    Posterior {
        z_mean,
        z_cov: vec![DMatrix::identity(m, m); n_samples],
        mu_mean,
        mu_var: DVector::from_element(d, 1.0),
        w_mean,
        w_var: DMatrix::from_element(d, m, 1.0),
        tau: ModelConfig::initial_hyper(&cfg.tau),
        alpha: vec![ModelConfig::initial_hyper(&cfg.alpha); m],
        theta: ModelConfig::initial_hyper(&cfg.theta),
    }
}

/// Which entries of a D×N data matrix are observed.
///
/// Row/column index lists are precomputed so that every likelihood sum can
/// iterate observed entries only; masked data values are never read.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    dim: usize,
    len: usize,
    observed: Vec<bool>, // column-major D×N
    rows_by_col: Vec<Vec<usize>>,
    cols_by_row: Vec<Vec<usize>>,
    observed_count: usize,
}

impl Mask {
    /// All-observed mask.
    pub fn all(dim: usize, len: usize) -> Self {
        Self::from_flags(dim, len, vec![true; dim * len]).expect("all-observed mask is valid")
    }

    /// Builds a mask from column-major observation flags.
    ///
    /// Rejects columns with no observed entry (such columns must be dropped
    /// at load time).
    pub fn from_flags(dim: usize, len: usize, observed: Vec<bool>) -> Result<Self> {
        if observed.len() != dim * len {
            return Err(Error::InvalidInput {
                name: "mask",
                reason: format!("expected {}x{} flags, got {}", dim, len, observed.len()),
            });
        }
        let mut rows_by_col = vec![Vec::new(); len];
        let mut cols_by_row = vec![Vec::new(); dim];
        let mut count = 0;
        for n in 0..len {
            for d in 0..dim {
                if observed[n * dim + d] {
                    rows_by_col[n].push(d);
                    cols_by_row[d].push(n);
                    count += 1;
                }
            }
            if rows_by_col[n].is_empty() {
                return Err(Error::InvalidInput {
                    name: "mask",
                    reason: format!("column {n} has no observed entries"),
                });
            }
        }
        Ok(Self {
            dim,
            len,
            observed,
            rows_by_col,
            cols_by_row,
            observed_count: count,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_observed(&self, d: usize, n: usize) -> bool {
        self.observed[n * self.dim + d]
    }

    /// Observed row indices of column n.
    pub fn observed_rows(&self, n: usize) -> &[usize] {
        &self.rows_by_col[n]
    }

    /// Observed column indices of row d.
    pub fn observed_cols(&self, d: usize) -> &[usize] {
        &self.cols_by_row[d]
    }

    pub fn observed_count(&self) -> usize {
        self.observed_count
    }

    pub fn all_observed(&self) -> bool {
        self.observed_count == self.dim * self.len
    }

    pub fn observed_fraction(&self) -> f64 {
        self.observed_count as f64 / (self.dim * self.len) as f64
    }

    /// Restriction of the mask to a subset of columns (in the given order).
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut flags = Vec::with_capacity(self.dim * cols.len());
        for &n in cols {
            for d in 0..self.dim {
                flags.push(self.observed[n * self.dim + d]);
            }
        }
        Self::from_flags(self.dim, cols.len(), flags)
            .expect("column selection preserves the no-empty-column invariant")
    }

    /// Entries (d, n) that are observed, in column-major order.
    pub fn observed_entries(&self) -> Vec<(usize, usize)> {
        let mut entries = Vec::with_capacity(self.observed_count);
        for n in 0..self.len {
            for &d in &self.rows_by_col[n] {
                entries.push((d, n));
            }
        }
        entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_rejects_empty_column() {
        let flags = vec![true, false, false, false]; // 2x2, column 1 empty
        assert!(Mask::from_flags(2, 2, flags).is_err());
    }

    #[test]
    fn mask_index_lists_agree_with_flags() {
        let flags = vec![true, false, true, true, false, true]; // 2x3 col-major
        let mask = Mask::from_flags(2, 3, flags).unwrap();
        assert_eq!(mask.observed_rows(0), &[0]);
        assert_eq!(mask.observed_rows(1), &[0, 1]);
        assert_eq!(mask.observed_rows(2), &[1]);
        assert_eq!(mask.observed_cols(0), &[0, 1]);
        assert_eq!(mask.observed_cols(1), &[1, 2]);
        assert_eq!(mask.observed_count(), 4);
        assert!(!mask.all_observed());
        let sel = mask.select_columns(&[1, 2]);
        assert_eq!(sel.observed_rows(0), &[0, 1]);
        assert_eq!(sel.observed_rows(1), &[1]);
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let cfg = ModelConfig::new(4, 2).unwrap();
        let a = init_posterior(&cfg, 6, 42);
        let b = init_posterior(&cfg, 6, 42);
        assert_eq!(a, b);
        let c = init_posterior(&cfg, 6, 43);
        assert_ne!(a.z_mean, c.z_mean);
        assert!(a.z_mean.iter().all(|&v| (0.0..1.0).contains(&v)));
        assert!(a.mu_var.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn gamma_moments() {
        let g = GammaParams::new(2.0, 4.0).unwrap();
        assert_eq!(g.mean(), 0.5);
        // ψ(2) = 1 − γ_E
        let euler = 0.577_215_664_901_532_9;
        assert!((g.ln_mean() - (1.0 - euler - 4.0f64.ln())).abs() < 1e-12);
        assert!(GammaParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn reconstruction_shape_and_values() {
        let cfg = ModelConfig::new(3, 1).unwrap();
        let mut post = init_posterior(&cfg, 2, 0);
        post.w_mean = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        post.z_mean = DMatrix::from_column_slice(1, 2, &[1.0, -1.0]);
        post.mu_mean = DVector::from_column_slice(&[0.5, 0.5, 0.5]);
        let r = post.reconstruction();
        assert_eq!(r[(1, 0)], 2.5);
        assert_eq!(r[(2, 1)], -2.5);
    }
}
