//! Synthetic low-rank matrix-completion instances with train/probe splits,
//! standing in for rating-matrix factorization at desk scale.

use crate::error::{Error, Result};
use crate::model::Mask;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone)]
pub struct LowRankInstance {
    pub data: DMatrix<f64>,
    /// Observed training entries.
    pub train_mask: Mask,
    /// Held-out observed entries for probe RMSE.
    pub probe: Vec<(usize, usize)>,
}

/// `data = U·Vᵀ + μ·1ᵀ + noise` with seeded factors scaled to unit signal
/// variance. Observed entries (fraction `observed_fraction`) are split into
/// train and probe; every column keeps at least one training entry.
pub fn generate_lowrank_ratings(
    dim: usize,
    len: usize,
    rank: usize,
    noise_sigma: f64,
    observed_fraction: f64,
    probe_fraction: f64,
    seed: u64,
) -> Result<LowRankInstance> {
    if rank == 0 || rank > dim.min(len) {
        return Err(Error::InvalidInput {
            name: "rank",
            reason: format!("need 1 ≤ rank ≤ min(dim, len), got {rank}"),
        });
    }
    if !(observed_fraction > 0.0 && observed_fraction <= 1.0) {
        return Err(Error::InvalidInput {
            name: "observed_fraction",
            reason: format!("must lie in (0, 1], got {observed_fraction}"),
        });
    }
    if !(0.0..1.0).contains(&probe_fraction) {
        return Err(Error::InvalidInput {
            name: "probe_fraction",
            reason: format!("must lie in [0, 1), got {probe_fraction}"),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let factor_scale = (rank as f64).powf(-0.25);
    let u = DMatrix::from_fn(dim, rank, |_, _| {
        factor_scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
    });
    let v = DMatrix::from_fn(len, rank, |_, _| {
        factor_scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
    });
    let mu = DVector::from_fn(dim, |_, _| {
        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
    });
    let mut data = u * v.transpose();
    for n in 0..len {
        for d in 0..dim {
            data[(d, n)] += mu[d];
            if noise_sigma > 0.0 {
                data[(d, n)] +=
                    noise_sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
            }
        }
    }

    let mut train_flags = vec![false; dim * len];
    let mut probe = Vec::new();
    for n in 0..len {
        loop {
            let mut col_probe = Vec::new();
            let mut has_train = false;
            for d in 0..dim {
                train_flags[n * dim + d] = false;
                if rng.gen::<f64>() < observed_fraction {
                    if rng.gen::<f64>() < probe_fraction {
                        col_probe.push((d, n));
                    } else {
                        train_flags[n * dim + d] = true;
                        has_train = true;
                    }
                }
            }
            if has_train {
                probe.extend(col_probe);
                break;
            }
        }
    }
    let train_mask = Mask::from_flags(dim, len, train_flags)?;
    Ok(LowRankInstance {
        data,
        train_mask,
        probe,
    })
}

/// RMSE of the per-column observed-training-mean predictor on the probe
/// set; the baseline any factorization model must beat.
pub fn column_mean_rmse(instance: &LowRankInstance) -> Result<f64> {
    if instance.probe.is_empty() {
        return Err(Error::InvalidInput {
            name: "probe",
            reason: "probe set is empty".into(),
        });
    }
    let mut ss = 0.0;
    for &(d, n) in &instance.probe {
        let cols = instance.train_mask.observed_rows(n);
        let mean = cols
            .iter()
            .map(|&row| instance.data[(row, n)])
            .sum::<f64>()
            / cols.len() as f64;
        let r = instance.data[(d, n)] - mean;
        ss += r * r;
    }
    Ok((ss / instance.probe.len() as f64).sqrt())
}
