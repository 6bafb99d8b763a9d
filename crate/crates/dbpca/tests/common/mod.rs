//! Shared test oracles, implemented from scratch so they stay independent
//! of the library's evaluation paths: a naive block ELBO, the per-node and
//! per-edge augmented-Lagrangian restrictions, and a golden-section search.

#![allow(dead_code)]

use dbpca::model::{Mask, ModelConfig, Posterior};
use dbpca::site::{EntryCtx, NodeCtx};
use nalgebra::DMatrix;

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Naive plug-in ELBO: direct sums over observed entries, no shared code
/// with `dbpca::elbo`.
pub fn naive_elbo(
    data: &DMatrix<f64>,
    mask: &Mask,
    post: &Posterior,
    cfg: &ModelConfig,
    scale: f64,
) -> f64 {
    let m_dim = cfg.latent_dim;
    let tau = post.tau.mean();
    let theta = post.theta.mean();
    let mut elbo = 0.0;

    // likelihood
    for n in 0..mask.len() {
        for &d in mask.observed_rows(n) {
            let mut pred = post.mu_mean[d];
            for k in 0..m_dim {
                pred += post.w_mean[(d, k)] * post.z_mean[(k, n)];
            }
            let resid = data[(d, n)] - pred;
            // Var(w_d·z + μ_d) = w̄ᵀCw̄ + Σ_k λ^w_k·(C_kk + m_k²) + λ^μ
            let cov = &post.z_cov[n];
            let mut var = post.mu_var[d];
            for a in 0..m_dim {
                for b in 0..m_dim {
                    var += post.w_mean[(d, a)] * cov[(a, b)] * post.w_mean[(d, b)];
                }
                let s_aa = cov[(a, a)] + post.z_mean[(a, n)] * post.z_mean[(a, n)];
                var += post.w_var[(d, a)] * s_aa;
            }
            elbo += 0.5 * (tau.ln() - LN_2PI) - 0.5 * tau * (resid * resid + var);
        }
    }

    // z prior + entropy
    for n in 0..post.n_samples() {
        let cov = &post.z_cov[n];
        let mut tr = 0.0;
        let mut sq = 0.0;
        for k in 0..m_dim {
            tr += cov[(k, k)];
            sq += post.z_mean[(k, n)] * post.z_mean[(k, n)];
        }
        let det = cov.determinant();
        elbo += -0.5 * (sq + tr) + 0.5 * det.ln() + 0.5 * m_dim as f64;
    }

    // μ, W priors + entropies (scaled share)
    for d in 0..cfg.data_dim {
        let dm = post.mu_mean[d] - cfg.prior_mean_mu[d];
        elbo += scale
            * (0.5 * theta.ln() - 0.5 * theta * (dm * dm + post.mu_var[d])
                + 0.5 * post.mu_var[d].ln()
                + 0.5);
    }
    for m in 0..m_dim {
        let alpha = post.alpha[m].mean();
        for d in 0..cfg.data_dim {
            let dw = post.w_mean[(d, m)] - cfg.prior_mean_w[(d, m)];
            elbo += scale
                * (0.5 * alpha.ln() - 0.5 * alpha * (dw * dw + post.w_var[(d, m)])
                    + 0.5 * post.w_var[(d, m)].ln()
                    + 0.5);
        }
    }
    elbo
}

fn kl_gauss(mean_p: f64, var_p: f64, mean_q: f64, var_q: f64) -> f64 {
    let dm = mean_p - mean_q;
    dm * dm / (2.0 * var_q) + 0.5 * (var_q / var_p).ln() + 0.5 * var_p / var_q - 0.5
}

/// Full local augmented Lagrangian of one node: negative scaled ELBO, dual
/// linear terms of every incident pair record, and the local-phase penalty
/// η·Σ KL(aux ‖ node) over all μ and W entries. `ctx` is the same structure
/// the solver consumes, but evaluated here with independent formulas.
pub fn node_lagrangian(
    data: &DMatrix<f64>,
    mask: &Mask,
    post: &Posterior,
    cfg: &ModelConfig,
    scale: f64,
    ctx: &NodeCtx,
) -> f64 {
    let mut value = -naive_elbo(data, mask, post, cfg, scale);
    for d in 0..cfg.data_dim {
        let e = &ctx.mu[d];
        value += e.dual_mean * post.mu_mean[d] + e.dual_var * post.mu_var[d];
        for &(rho, phi) in &e.aux {
            value += ctx.eta * kl_gauss(rho, phi, post.mu_mean[d], post.mu_var[d]);
        }
    }
    for d in 0..cfg.data_dim {
        for m in 0..cfg.latent_dim {
            let e = &ctx.w[d * cfg.latent_dim + m];
            value += e.dual_mean * post.w_mean[(d, m)] + e.dual_var * post.w_var[(d, m)];
            for &(rho, phi) in &e.aux {
                value += ctx.eta * kl_gauss(rho, phi, post.w_mean[(d, m)], post.w_var[(d, m)]);
            }
        }
    }
    value
}

/// Edge objective of one ordered pair's scalar entry, as a function of
/// (ρ, φ): dual terms plus the reversed penalty
/// η·[KL(node_i ‖ aux) + KL(node_j ‖ aux)].
#[derive(Debug, Clone, Copy)]
pub struct EdgeObjective {
    pub m_i: f64,
    pub lam_i: f64,
    pub m_j: f64,
    pub lam_j: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
    pub beta_1: f64,
    pub beta_2: f64,
    pub eta: f64,
}

impl EdgeObjective {
    pub fn eval(&self, rho: f64, phi: f64) -> f64 {
        self.gamma_1 * (self.m_i - rho)
            + self.gamma_2 * (rho - self.m_j)
            + self.beta_1 * (self.lam_i - phi)
            + self.beta_2 * (phi - self.lam_j)
            + self.eta
                * (kl_gauss(self.m_i, self.lam_i, rho, phi)
                    + kl_gauss(self.m_j, self.lam_j, rho, phi))
    }
}

/// Golden-section minimizer on [lo, hi]; independent of the library's.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iters: usize) -> f64 {
    let phi = 0.618_033_988_749_894_9_f64;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Golden-section on a log-scaled positive variable.
pub fn golden_min_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iters: usize) -> f64 {
    golden_min(|u| f(u.exp()), lo.ln(), hi.ln(), iters).exp()
}

/// Deterministic congruential stream for building randomized oracle
/// instances without depending on the library's RNG choices.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        // splitmix64
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// A random but well-posed node instance for update oracles: small block,
/// valid posterior, two incident pair records with moderate duals (variance
/// dual coefficients kept small enough that every restriction is unimodal,
/// which a golden-section oracle requires).
pub struct OracleInstance {
    pub data: DMatrix<f64>,
    pub mask: Mask,
    pub post: Posterior,
    pub cfg: ModelConfig,
    pub scale: f64,
    pub ctx: NodeCtx,
}

pub fn random_instance(rng: &mut TestRng, masked: bool) -> OracleInstance {
    let (d_dim, m_dim, n) = (3usize, 2usize, 6usize);
    let cfg = ModelConfig::new(d_dim, m_dim).unwrap();
    let data = DMatrix::from_fn(d_dim, n, |_, _| rng.range(-2.0, 2.0));
    let mask = if masked {
        loop {
            let flags: Vec<bool> = (0..d_dim * n).map(|_| rng.uniform() > 0.25).collect();
            if let Ok(m) = Mask::from_flags(d_dim, n, flags) {
                break m;
            }
        }
    } else {
        Mask::all(d_dim, n)
    };
    let mut post = dbpca::model::init_posterior(&cfg, n, rng.next_u64());
    post.tau = dbpca::model::HyperPosterior::Fixed(rng.range(0.5, 2.0));
    post.theta = dbpca::model::HyperPosterior::Fixed(rng.range(0.2, 1.5));
    post.alpha = vec![
        dbpca::model::HyperPosterior::Fixed(rng.range(0.2, 1.5)),
        dbpca::model::HyperPosterior::Fixed(rng.range(0.2, 1.5)),
    ];
    for d in 0..d_dim {
        post.mu_mean[d] = rng.range(-1.5, 1.5);
        post.mu_var[d] = rng.range(0.05, 2.0);
        for m in 0..m_dim {
            post.w_mean[(d, m)] = rng.range(-1.5, 1.5);
            post.w_var[(d, m)] = rng.range(0.05, 2.0);
        }
    }
    for col in 0..n {
        for k in 0..m_dim {
            post.z_mean[(k, col)] = rng.range(-1.5, 1.5);
        }
        let a = rng.range(0.2, 1.0);
        let b = rng.range(0.2, 1.0);
        let c = rng.range(-0.1, 0.1);
        post.z_cov[col] = DMatrix::from_row_slice(2, 2, &[a, c, c, b]);
    }

    let eta = rng.range(0.5, 12.0);
    let scale = 1.0 / rng.range(1.0, 5.0).floor().max(1.0);
    let records = 2;
    let mut ctx = NodeCtx::empty(d_dim, m_dim);
    ctx.eta = eta;
    let fill = |e: &mut EntryCtx, rng: &mut TestRng| {
        let mut dual_var = 0.0;
        for _ in 0..records {
            e.aux.push((rng.range(-2.0, 2.0), rng.range(0.05, 2.0)));
            dual_var += rng.range(-0.2, 0.2);
        }
        e.dual_mean = rng.range(-1.0, 1.0);
        e.dual_var = dual_var;
    };
    for d in 0..d_dim {
        fill(&mut ctx.mu[d], rng);
    }
    for e in ctx.w.iter_mut() {
        fill(e, rng);
    }
    OracleInstance {
        data,
        mask,
        post,
        cfg,
        scale,
        ctx,
    }
}
