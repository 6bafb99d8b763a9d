//! Update-correctness oracles: every closed-form scalar update must be the
//! 1-D minimizer of the corresponding augmented-Lagrangian restriction
//! (golden-section verified), latent and hyperparameter updates must be
//! stationary points of the exact ELBO (finite-difference verified), and
//! exact coordinate ascent must increase the ELBO monotonically.

mod common;

use common::{golden_min, golden_min_log, naive_elbo, node_lagrangian, random_instance, TestRng};
use dbpca::central::compute_elbo;
use dbpca::model::{
    init_posterior, GammaParams, HyperPosterior, HyperPrior, Mask, ModelConfig,
};
use dbpca::site::{self, Diagnostics, NodeCtx, Site};
use nalgebra::{DMatrix, DVector};

const MEAN_BRACKET: f64 = 60.0;

fn w_row_moments(site: &Site, d: usize, m_dim: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut t_d = DMatrix::zeros(m_dim, m_dim);
    let mut u_d = DVector::zeros(m_dim);
    for &n in site.mask.observed_cols(d) {
        let mz = site.post.z_mean.column(n);
        t_d += &site.post.z_cov[n] + mz * mz.transpose();
        let r = site.data[(d, n)] - site.post.mu_mean[d];
        for k in 0..m_dim {
            u_d[k] += r * mz[k];
        }
    }
    (t_d, u_d)
}

/// Runs `count` randomized instances of the μ and W scalar updates against
/// golden-section minimization of the independently evaluated local
/// Lagrangian, with both consensus-coupled and empty (centralized)
/// contexts.
fn check_node_updates(count: usize, masked: bool, seed: u64) {
    let mut rng = TestRng(seed);
    for trial in 0..count {
        let inst = random_instance(&mut rng, masked);
        let ctx = if trial % 4 == 3 {
            NodeCtx::empty(inst.cfg.data_dim, inst.cfg.latent_dim)
        } else {
            inst.ctx.clone()
        };
        let scale = if trial % 4 == 3 { 1.0 } else { inst.scale };
        let mut site = Site::new(inst.data.clone(), inst.mask.clone(), inst.post.clone());
        let mut diag = Diagnostics::default();

        // μ entry
        let d = trial % inst.cfg.data_dim;
        let old_var = site.post.mu_var[d];
        site::update_mu_entry(&mut site, &inst.cfg, scale, &ctx, d, &mut diag);
        let (lib_mean, lib_var) = (site.post.mu_mean[d], site.post.mu_var[d]);
        let mean_oracle = golden_min(
            |x| {
                let mut p = inst.post.clone();
                p.mu_mean[d] = x;
                p.mu_var[d] = old_var;
                node_lagrangian(&inst.data, &inst.mask, &p, &inst.cfg, scale, &ctx)
            },
            -MEAN_BRACKET,
            MEAN_BRACKET,
            110,
        );
        assert!(
            (lib_mean - mean_oracle).abs() < 1e-6,
            "trial {trial}: μ mean {lib_mean} vs oracle {mean_oracle}"
        );
        let var_oracle = golden_min_log(
            |x| {
                let mut p = inst.post.clone();
                p.mu_mean[d] = lib_mean;
                p.mu_var[d] = x;
                node_lagrangian(&inst.data, &inst.mask, &p, &inst.cfg, scale, &ctx)
            },
            1e-8,
            1e4,
            130,
        );
        assert!(
            (lib_var - var_oracle).abs() < 1e-6,
            "trial {trial}: μ var {lib_var} vs oracle {var_oracle}"
        );
        assert_eq!(diag.quadratic_fallbacks, 0, "trial {trial} fell back");

        // W entry, on the state after the μ update (any valid state works)
        let base = site.post.clone();
        let m = trial % inst.cfg.latent_dim;
        let (t_d, u_d) = w_row_moments(&site, d, inst.cfg.latent_dim);
        let old_wvar = site.post.w_var[(d, m)];
        site::update_w_entry(&mut site, &inst.cfg, scale, &ctx, d, m, &t_d, &u_d, &mut diag);
        let (lib_wmean, lib_wvar) = (site.post.w_mean[(d, m)], site.post.w_var[(d, m)]);
        let wmean_oracle = golden_min(
            |x| {
                let mut p = base.clone();
                p.w_mean[(d, m)] = x;
                p.w_var[(d, m)] = old_wvar;
                node_lagrangian(&inst.data, &inst.mask, &p, &inst.cfg, scale, &ctx)
            },
            -MEAN_BRACKET,
            MEAN_BRACKET,
            110,
        );
        assert!(
            (lib_wmean - wmean_oracle).abs() < 1e-6,
            "trial {trial}: w mean {lib_wmean} vs oracle {wmean_oracle}"
        );
        let wvar_oracle = golden_min_log(
            |x| {
                let mut p = base.clone();
                p.w_mean[(d, m)] = lib_wmean;
                p.w_var[(d, m)] = x;
                node_lagrangian(&inst.data, &inst.mask, &p, &inst.cfg, scale, &ctx)
            },
            1e-8,
            1e4,
            130,
        );
        assert!(
            (lib_wvar - wvar_oracle).abs() < 1e-6,
            "trial {trial}: w var {lib_wvar} vs oracle {wvar_oracle}"
        );
    }
}

#[test]
fn node_scalar_updates_match_golden_section() {
    check_node_updates(60, false, 11);
}

#[test]
fn node_scalar_updates_match_golden_section_masked() {
    check_node_updates(60, true, 12);
}

#[test]
fn centralized_updates_match_negative_elbo_minimizers() {
    // With an empty context the Lagrangian reduces to −ELBO; each scalar
    // update must be its exact coordinate minimizer.
    let mut rng = TestRng(21);
    for trial in 0..20 {
        let inst = random_instance(&mut rng, trial % 2 == 1);
        let ctx = NodeCtx::empty(inst.cfg.data_dim, inst.cfg.latent_dim);
        let mut site = Site::new(inst.data.clone(), inst.mask.clone(), inst.post.clone());
        let mut diag = Diagnostics::default();
        let d = trial % inst.cfg.data_dim;
        let old_var = site.post.mu_var[d];
        site::update_mu_entry(&mut site, &inst.cfg, 1.0, &ctx, d, &mut diag);
        let oracle = golden_min(
            |x| {
                let mut p = inst.post.clone();
                p.mu_mean[d] = x;
                p.mu_var[d] = old_var;
                -naive_elbo(&inst.data, &inst.mask, &p, &inst.cfg, 1.0)
            },
            -MEAN_BRACKET,
            MEAN_BRACKET,
            110,
        );
        assert!((site.post.mu_mean[d] - oracle).abs() < 1e-6);
    }
}

#[test]
fn latent_update_is_elbo_stationary() {
    let mut cfg = ModelConfig::new(3, 2).unwrap();
    cfg.tau = HyperPrior::Fixed(1.3);
    cfg.alpha = HyperPrior::Fixed(0.7);
    cfg.theta = HyperPrior::Fixed(0.9);
    let mut rng = TestRng(31);
    let data = DMatrix::from_fn(3, 4, |_, _| rng.range(-1.5, 1.5));
    let mask = Mask::all(3, 4);
    let mut site = Site::new(data.clone(), mask.clone(), init_posterior(&cfg, 4, 5));
    site::update_latent(&mut site);

    let h = 1e-5;
    let n = 1;
    let base = site.post.clone();
    let mut grad_max: f64 = 0.0;
    // mean components
    for k in 0..2 {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus.z_mean[(k, n)] += h;
        minus.z_mean[(k, n)] -= h;
        let g = (compute_elbo(&data, &mask, &plus, &cfg) - compute_elbo(&data, &mask, &minus, &cfg))
            / (2.0 * h);
        grad_max = grad_max.max(g.abs());
    }
    // covariance components (symmetric perturbations)
    for a in 0..2 {
        for b in a..2 {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus.z_cov[n][(a, b)] += h;
            plus.z_cov[n][(b, a)] = plus.z_cov[n][(a, b)];
            minus.z_cov[n][(a, b)] -= h;
            minus.z_cov[n][(b, a)] = minus.z_cov[n][(a, b)];
            let g = (compute_elbo(&data, &mask, &plus, &cfg)
                - compute_elbo(&data, &mask, &minus, &cfg))
                / (2.0 * h);
            grad_max = grad_max.max(g.abs());
        }
    }
    assert!(grad_max <= 1e-8, "latent gradient {grad_max}");
}

#[test]
fn gamma_updates_are_full_elbo_stationary() {
    let cfg = ModelConfig::new(3, 2).unwrap(); // all three learned, broad priors
    let mut rng = TestRng(41);
    let data = DMatrix::from_fn(3, 5, |_, _| rng.range(-1.5, 1.5));
    let mask = Mask::all(3, 5);
    let mut site = Site::new(data.clone(), mask.clone(), init_posterior(&cfg, 5, 2));
    let ctx = NodeCtx::empty(3, 2);
    let mut diag = Diagnostics::default();
    for _ in 0..3 {
        site::sweep(&mut site, &cfg, 1.0, &ctx, &mut diag);
    }

    let h = 1e-5;
    let base = site.post.clone();
    let perturbed = |f: &dyn Fn(&mut dbpca::model::Posterior)| {
        let mut p = base.clone();
        f(&mut p);
        compute_elbo(&data, &mask, &p, &cfg)
    };
    let tau = base.tau.as_learned().unwrap();
    let checks: Vec<(f64, Box<dyn Fn(&mut dbpca::model::Posterior, f64)>)> = vec![
        (tau.shape, Box::new(|p, v| {
            p.tau = HyperPosterior::Learned(GammaParams { shape: v, ..p.tau.as_learned().unwrap() })
        })),
        (tau.rate, Box::new(|p, v| {
            p.tau = HyperPosterior::Learned(GammaParams { rate: v, ..p.tau.as_learned().unwrap() })
        })),
        (base.theta.as_learned().unwrap().shape, Box::new(|p, v| {
            p.theta =
                HyperPosterior::Learned(GammaParams { shape: v, ..p.theta.as_learned().unwrap() })
        })),
        (base.theta.as_learned().unwrap().rate, Box::new(|p, v| {
            p.theta =
                HyperPosterior::Learned(GammaParams { rate: v, ..p.theta.as_learned().unwrap() })
        })),
        (base.alpha[0].as_learned().unwrap().shape, Box::new(|p, v| {
            p.alpha[0] =
                HyperPosterior::Learned(GammaParams { shape: v, ..p.alpha[0].as_learned().unwrap() })
        })),
        (base.alpha[1].as_learned().unwrap().rate, Box::new(|p, v| {
            p.alpha[1] =
                HyperPosterior::Learned(GammaParams { rate: v, ..p.alpha[1].as_learned().unwrap() })
        })),
    ];
    for (value, setter) in checks {
        let g = (perturbed(&|p| setter(p, value + h)) - perturbed(&|p| setter(p, value - h)))
            / (2.0 * h);
        assert!(g.abs() <= 1e-6, "gamma gradient {g} at value {value}");
    }
}

#[test]
fn full_elbo_monotone_over_sweeps() {
    let mut rng = TestRng(51);
    for trial in 0..20 {
        let d_dim = 3 + trial % 3;
        let cfg = ModelConfig::new(d_dim, 2).unwrap();
        let n = 5 + trial % 4;
        let data = DMatrix::from_fn(d_dim, n, |_, _| rng.range(-2.0, 2.0));
        let mask = Mask::all(d_dim, n);
        let mut site = Site::new(
            data.clone(),
            mask.clone(),
            init_posterior(&cfg, n, 100 + trial as u64),
        );
        let ctx = NodeCtx::empty(d_dim, 2);
        let mut diag = Diagnostics::default();
        let mut last = f64::NEG_INFINITY;
        for sweep_idx in 0..15 {
            site::sweep(&mut site, &cfg, 1.0, &ctx, &mut diag);
            let elbo = compute_elbo(&data, &mask, &site.post, &cfg);
            assert!(
                elbo >= last - 1e-9 * (1.0 + last.abs()),
                "trial {trial} sweep {sweep_idx}: {elbo} < {last}"
            );
            last = elbo;
        }
    }
}
