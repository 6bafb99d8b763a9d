//! One inference site: a data block with its factorized posterior, plus the
//! coordinate updates that both solvers share.
//!
//! The distributed local phase and the centralized solver run the *same*
//! sweep; the only difference is the consensus context. A site with an empty
//! context and `prior_scale = 1` performs exactly the centralized updates
//! (all dual and penalty terms vanish), which is what makes single-node
//! distributed runs reproduce centralized runs bit for bit.
//!
//! Sweep order is fixed: latent z for every sample, then μ entries
//! (d ascending, mean then variance), then W entries row-major, then the
//! Gamma hyperparameters.
//!
//! Each scalar subproblem is the restriction of the node's augmented
//! Lagrangian to that coordinate:
//!
//! - negative block ELBO (priors and entropies of μ, W carry the node's
//!   `prior_scale` share),
//! - dual terms `+γ·m` for outgoing pair records and `−γ·m` for incoming
//!   ones (likewise β·λ),
//! - the penalty `η·Σ KL(N(ρ, φ) ‖ N(m, λ))` over every incident pair
//!   record, i.e. the Bregman divergence from the node's parameters to the
//!   frozen auxiliaries.

use crate::elbo::residual_sum;
use crate::gauss::VARIANCE_FLOOR;
use crate::model::{GammaParams, HyperPosterior, HyperPrior, Mask, ModelConfig, Posterior};
use crate::updates::VarianceObjective;
use nalgebra::{DMatrix, DVector};

/// Counters for numerically degenerate events during a fit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct Diagnostics {
    /// Variance updates clamped at the floor.
    pub variance_floor_hits: u64,
    /// Stationarity quadratics with no admissible root (numeric fallback).
    pub quadratic_fallbacks: u64,
}

/// Data block plus posterior for one node (or the whole data set).
#[derive(Debug, Clone)]
pub struct Site {
    pub data: DMatrix<f64>,
    pub mask: Mask,
    pub post: Posterior,
}

impl Site {
    pub fn new(data: DMatrix<f64>, mask: Mask, post: Posterior) -> Self {
        assert_eq!(data.nrows(), mask.dim());
        assert_eq!(data.ncols(), mask.len());
        assert_eq!(post.n_samples(), data.ncols());
        Self { data, mask, post }
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }
}

/// Consensus terms touching one scalar entry of a node's posterior.
#[derive(Debug, Clone, Default)]
pub struct EntryCtx {
    /// Net linear dual coefficient on the mean (Σ γ_out − Σ γ_in).
    pub dual_mean: f64,
    /// Net linear dual coefficient on the variance (Σ β_out − Σ β_in).
    pub dual_var: f64,
    /// (ρ, φ) of every incident pair record.
    pub aux: Vec<(f64, f64)>,
}

/// Consensus context of one node for one local sweep. Empty for the
/// centralized solver.
#[derive(Debug, Clone)]
pub struct NodeCtx {
    pub eta: f64,
    /// Per μ entry d.
    pub mu: Vec<EntryCtx>,
    /// Per W entry, row-major (d·M + m).
    pub w: Vec<EntryCtx>,
}

impl NodeCtx {
    /// Context with no consensus terms: the sweep degenerates to exact
    /// centralized coordinate ascent.
    pub fn empty(data_dim: usize, latent_dim: usize) -> Self {
        Self {
            eta: 0.0,
            mu: vec![EntryCtx::default(); data_dim],
            w: vec![EntryCtx::default(); data_dim * latent_dim],
        }
    }
}

/// Latent update for every sample of the block:
///
/// `Λ_n = I + τ·Σ_{d obs} (w̄_d w̄_dᵀ + diag λ^w_d)`,
/// `m_n = τ·Λ_n⁻¹·Σ_{d obs} w̄_d (x_dn − μ̄_d)`.
///
/// Fully-observed blocks share one precision matrix across samples.
pub fn update_latent(site: &mut Site) {
    let m_dim = site.post.z_mean.nrows();
    let tau = site.post.tau.mean();

    let assemble = |rows: &[usize], post: &Posterior| -> DMatrix<f64> {
        let mut prec = DMatrix::identity(m_dim, m_dim);
        for &d in rows {
            let wd = post.w_mean.row(d);
            for a in 0..m_dim {
                for b in 0..m_dim {
                    prec[(a, b)] += tau * wd[a] * wd[b];
                }
                prec[(a, a)] += tau * post.w_var[(d, a)];
            }
        }
        prec
    };
    let rhs_for = |n: usize, rows: &[usize], site: &Site| -> DVector<f64> {
        let mut rhs = DVector::zeros(m_dim);
        for &d in rows {
            let r = tau * (site.data[(d, n)] - site.post.mu_mean[d]);
            for a in 0..m_dim {
                rhs[a] += r * site.post.w_mean[(d, a)];
            }
        }
        rhs
    };

    if site.mask.all_observed() {
        let rows: Vec<usize> = (0..site.data.nrows()).collect();
        let prec = assemble(&rows, &site.post);
        let chol = prec.cholesky().expect("latent precision is SPD");
        let cov = chol.inverse();
        for n in 0..site.n_samples() {
            let sol = chol.solve(&rhs_for(n, &rows, site));
            site.post.z_mean.set_column(n, &sol);
            site.post.z_cov[n] = cov.clone();
        }
    } else {
        for n in 0..site.n_samples() {
            let rows = site.mask.observed_rows(n).to_vec();
            let prec = assemble(&rows, &site.post);
            let chol = prec.cholesky().expect("latent precision is SPD");
            let sol = chol.solve(&rhs_for(n, &rows, site));
            site.post.z_mean.set_column(n, &sol);
            site.post.z_cov[n] = chol.inverse();
        }
    }
}

fn clamp_variance(v: f64, diag: &mut Diagnostics) -> f64 {
    if v < VARIANCE_FLOOR {
        diag.variance_floor_hits += 1;
        VARIANCE_FLOOR
    } else {
        v
    }
}

/// Mean update followed by the variance quadratic for one scalar posterior
/// entry. `data_quad`/`data_lin` are the likelihood curvature and linear
/// coefficient; the prior share and consensus terms are assembled here.
fn scalar_entry_update(
    data_quad: f64,
    data_lin: f64,
    prior_prec_scaled: f64,
    prior_mean: f64,
    prior_scale: f64,
    entry: &EntryCtx,
    eta: f64,
    current_var: f64,
    diag: &mut Diagnostics,
) -> (f64, f64) {
    let k = entry.aux.len() as f64;
    let rho_sum: f64 = entry.aux.iter().map(|&(rho, _)| rho).sum();

    let quad = data_quad + prior_prec_scaled + eta * k / current_var;
    let lin = data_lin + prior_prec_scaled * prior_mean - entry.dual_mean
        + eta * rho_sum / current_var;
    let mean = lin / quad;

    let penalty_sum: f64 = entry
        .aux
        .iter()
        .map(|&(rho, phi)| (rho - mean) * (rho - mean) + phi)
        .sum();
    let objective = VarianceObjective {
        c_lin: 0.5 * (data_quad + prior_prec_scaled) + entry.dual_var,
        c_log: 0.5 * (eta * k - prior_scale),
        c_inv: 0.5 * eta * penalty_sum,
    };
    let (var, fell_back) = objective.solve(VARIANCE_FLOOR, current_var);
    if fell_back {
        diag.quadratic_fallbacks += 1;
    }
    (mean, clamp_variance(var, diag))
}

/// Coordinate update of μ entry `d` (mean, then variance).
pub fn update_mu_entry(
    site: &mut Site,
    cfg: &ModelConfig,
    prior_scale: f64,
    ctx: &NodeCtx,
    d: usize,
    diag: &mut Diagnostics,
) {
    let tau = site.post.tau.mean();
    let theta = site.post.theta.mean();
    let m_dim = cfg.latent_dim;
    let cols = site.mask.observed_cols(d);
    let mut s = 0.0;
    for &n in cols {
        let mut pred = 0.0;
        for k in 0..m_dim {
            pred += site.post.w_mean[(d, k)] * site.post.z_mean[(k, n)];
        }
        s += site.data[(d, n)] - pred;
    }
    let (mean, var) = scalar_entry_update(
        tau * cols.len() as f64,
        tau * s,
        prior_scale * theta,
        cfg.prior_mean_mu[d],
        prior_scale,
        &ctx.mu[d],
        ctx.eta,
        site.post.mu_var[d],
        diag,
    );
    site.post.mu_mean[d] = mean;
    site.post.mu_var[d] = var;
}

/// Coordinate update of W entry `(d, m)` given the row's cached moments:
/// `t_d = Σ_{n obs} E[z_n z_nᵀ]` and `u_d = Σ_{n obs} (x_dn − μ̄_d)·m_n`.
pub fn update_w_entry(
    site: &mut Site,
    cfg: &ModelConfig,
    prior_scale: f64,
    ctx: &NodeCtx,
    d: usize,
    m: usize,
    t_d: &DMatrix<f64>,
    u_d: &DVector<f64>,
    diag: &mut Diagnostics,
) {
    let tau = site.post.tau.mean();
    let m_dim = cfg.latent_dim;
    // Coupling to sibling entries of row d through E[z zᵀ], live values.
    let mut cross = 0.0;
    for m2 in 0..m_dim {
        if m2 != m {
            cross += site.post.w_mean[(d, m2)] * t_d[(m2, m)];
        }
    }
    let (mean, var) = scalar_entry_update(
        tau * t_d[(m, m)],
        tau * (u_d[m] - cross),
        prior_scale * site.post.alpha[m].mean(),
        cfg.prior_mean_w[(d, m)],
        prior_scale,
        &ctx.w[d * m_dim + m],
        ctx.eta,
        site.post.w_var[(d, m)],
        diag,
    );
    site.post.w_mean[(d, m)] = mean;
    site.post.w_var[(d, m)] = var;
}

/// Conjugate Gamma updates for the learned hyperparameters. These carry no
/// consensus terms and always use the full-strength local conjugate form:
///
/// - τ:   shape + |obs|/2,  rate + ½·E[squared residual]
/// - α_m: shape + D/2,      rate + ½·Σ_d E[(w_dm − w̄_dm)²]
/// - θ:   shape + D/2,      rate + ½·Σ_d E[(μ_d − μ̄_d)²]
///
/// Posterior means a′/b′ are what every other update plugs in.
pub fn update_hyperparams(site: &mut Site, cfg: &ModelConfig) {
    let d_dim = cfg.data_dim;
    let m_dim = cfg.latent_dim;
    if let HyperPrior::Learned(prior) = cfg.tau {
        let r = residual_sum(&site.data, &site.mask, &site.post);
        site.post.tau = HyperPosterior::Learned(GammaParams {
            shape: prior.shape + 0.5 * site.mask.observed_count() as f64,
            rate: prior.rate + 0.5 * r,
        });
    }
    if let HyperPrior::Learned(prior) = cfg.alpha {
        for m in 0..m_dim {
            let mut ss = 0.0;
            for d in 0..d_dim {
                let dw = site.post.w_mean[(d, m)] - cfg.prior_mean_w[(d, m)];
                ss += dw * dw + site.post.w_var[(d, m)];
            }
            site.post.alpha[m] = HyperPosterior::Learned(GammaParams {
                shape: prior.shape + 0.5 * d_dim as f64,
                rate: prior.rate + 0.5 * ss,
            });
        }
    }
    if let HyperPrior::Learned(prior) = cfg.theta {
        let mut ss = 0.0;
        for d in 0..d_dim {
            let dm = site.post.mu_mean[d] - cfg.prior_mean_mu[d];
            ss += dm * dm + site.post.mu_var[d];
        }
        site.post.theta = HyperPosterior::Learned(GammaParams {
            shape: prior.shape + 0.5 * d_dim as f64,
            rate: prior.rate + 0.5 * ss,
        });
    }
}

/// One full coordinate sweep: z → μ → W → hyperparameters.
pub fn sweep(site: &mut Site, cfg: &ModelConfig, prior_scale: f64, ctx: &NodeCtx, diag: &mut Diagnostics) {
    debug_assert_eq!(ctx.mu.len(), cfg.data_dim);
    debug_assert_eq!(ctx.w.len(), cfg.data_dim * cfg.latent_dim);

    update_latent(site);

    for d in 0..cfg.data_dim {
        update_mu_entry(site, cfg, prior_scale, ctx, d, diag);
    }

    // Per-sample second moments are fixed throughout the W sweep.
    let s_mats: Vec<DMatrix<f64>> = (0..site.n_samples())
        .map(|n| site.post.z_second_moment(n))
        .collect();
    let full_t = if site.mask.all_observed() {
        let mut t = DMatrix::zeros(cfg.latent_dim, cfg.latent_dim);
        for s in &s_mats {
            t += s;
        }
        Some(t)
    } else {
        None
    };
    for d in 0..cfg.data_dim {
        let t_d = match &full_t {
            Some(t) => t.clone(),
            None => {
                let mut t = DMatrix::zeros(cfg.latent_dim, cfg.latent_dim);
                for &n in site.mask.observed_cols(d) {
                    t += &s_mats[n];
                }
                t
            }
        };
        let mut u_d = DVector::zeros(cfg.latent_dim);
        for &n in site.mask.observed_cols(d) {
            let r = site.data[(d, n)] - site.post.mu_mean[d];
            for k in 0..cfg.latent_dim {
                u_d[k] += r * site.post.z_mean[(k, n)];
            }
        }
        for m in 0..cfg.latent_dim {
            update_w_entry(site, cfg, prior_scale, ctx, d, m, &t_d, &u_d, diag);
        }
    }

    update_hyperparams(site, cfg);
}
