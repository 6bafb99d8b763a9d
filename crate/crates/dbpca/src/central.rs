//! Centralized Bayesian PCA via mean-field coordinate ascent.
//!
//! This is the single-node oracle the distributed solver is validated
//! against: it runs the same coordinate sweep as a network node, with an
//! empty consensus context and a full (unscaled) share of the global
//! priors, so a single-node distributed fit reproduces it exactly.

use crate::elbo::{node_elbo, ElboMode};
use crate::error::{Error, Result};
use crate::model::{derive_seed, init_posterior, Mask, ModelConfig, Posterior};
use crate::site::{sweep, Diagnostics, NodeCtx, Site};
use crate::solver::SolverConfig;
use crate::trace::{relative_change, ConvergenceTrace, FitReport, TraceRow};
use nalgebra::DMatrix;
use std::time::Instant;

/// A fitted (or in-progress) centralized model.
#[derive(Debug, Clone)]
pub struct CentralizedFit {
    pub site: Site,
    pub model: ModelConfig,
}

impl CentralizedFit {
    pub fn posterior(&self) -> &Posterior {
        &self.site.post
    }
}

/// Exact ELBO of a posterior state (learned hyperparameters contribute
/// their Gamma prior and entropy terms). This is the quantity coordinate
/// ascent increases monotonically.
pub fn compute_elbo(data: &DMatrix<f64>, mask: &Mask, post: &Posterior, cfg: &ModelConfig) -> f64 {
    node_elbo(data, mask, post, cfg, 1.0, ElboMode::Full)
}

/// The plug-in objective (hyperparameters as constants at their posterior
/// means) that both solvers report in traces and use for stopping.
pub fn plugin_objective(data: &DMatrix<f64>, mask: &Mask, post: &Posterior, cfg: &ModelConfig) -> f64 {
    -node_elbo(data, mask, post, cfg, 1.0, ElboMode::PlugIn)
}

/// Latent update for all samples; exposed for tests and external sweeps.
pub fn update_latent(site: &mut Site) {
    crate::site::update_latent(site);
}

/// Entrywise coordinate updates of the μ and W posteriors (d ascending,
/// then row-major W), with dual and penalty terms absent.
pub fn update_global(site: &mut Site, cfg: &ModelConfig, diag: &mut Diagnostics) {
    let ctx = NodeCtx::empty(cfg.data_dim, cfg.latent_dim);
    for d in 0..cfg.data_dim {
        crate::site::update_mu_entry(site, cfg, 1.0, &ctx, d, diag);
    }
    let s_mats: Vec<DMatrix<f64>> = (0..site.n_samples())
        .map(|n| site.post.z_second_moment(n))
        .collect();
    for d in 0..cfg.data_dim {
        let mut t_d = DMatrix::zeros(cfg.latent_dim, cfg.latent_dim);
        for &n in site.mask.observed_cols(d) {
            t_d += &s_mats[n];
        }
        let mut u_d = nalgebra::DVector::zeros(cfg.latent_dim);
        for &n in site.mask.observed_cols(d) {
            let r = site.data[(d, n)] - site.post.mu_mean[d];
            for k in 0..cfg.latent_dim {
                u_d[k] += r * site.post.z_mean[(k, n)];
            }
        }
        for m in 0..cfg.latent_dim {
            crate::site::update_w_entry(site, cfg, 1.0, &ctx, d, m, &t_d, &u_d, diag);
        }
    }
}

/// Conjugate Gamma updates for learned hyperparameters.
pub fn update_hyperparams(site: &mut Site, cfg: &ModelConfig) {
    crate::site::update_hyperparams(site, cfg);
}

/// Fits centralized BPCA by coordinate ascent until the relative change of
/// the plug-in objective falls below `solver.tol` or `solver.max_iter` is
/// reached. The posterior is seeded exactly like node 0 of a distributed
/// run.
pub fn fit_centralized(
    data: &DMatrix<f64>,
    mask: &Mask,
    model: &ModelConfig,
    solver: &SolverConfig,
) -> Result<(CentralizedFit, FitReport)> {
    model.validate()?;
    solver.validate()?;
    if data.nrows() != model.data_dim {
        return Err(Error::InvalidInput {
            name: "data",
            reason: format!("expected {} rows, got {}", model.data_dim, data.nrows()),
        });
    }
    let post = init_posterior(model, data.ncols(), derive_seed(solver.seed, 0));
    let mut site = Site::new(data.clone(), mask.clone(), post);
    let ctx = NodeCtx::empty(model.data_dim, model.latent_dim);
    let mut diag = Diagnostics::default();
    let mut trace = ConvergenceTrace::default();
    let mut previous = f64::INFINITY;
    let mut converged = false;

    for iteration in 1..=solver.max_iter {
        let started = Instant::now();
        sweep(&mut site, model, 1.0, &ctx, &mut diag);
        let objective = plugin_objective(&site.data, &site.mask, &site.post, model);
        if !objective.is_finite() {
            return Err(Error::NonFiniteObjective { iteration });
        }
        trace.push(TraceRow {
            iteration,
            objective,
            primal_residual: 0.0,
            max_edge_gap: 0.0,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        if iteration > 1 && relative_change(objective, previous) < solver.tol {
            converged = true;
            break;
        }
        previous = objective;
    }

    let iterations = trace.len();
    Ok((
        CentralizedFit {
            site,
            model: model.clone(),
        },
        FitReport {
            trace,
            converged,
            iterations,
            diagnostics: diag,
        },
    ))
}
