//! Factorization baseline and the subspace-angle accuracy metric.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Sorted (descending) singular values and the matching left vectors.
fn sorted_svd(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let vectors = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    (values, vectors)
}

/// Classical rank-3 factorization: column-centers the measurement matrix,
/// truncates its SVD at rank 3 and returns the scaled left factor as the
/// structure estimate (P×3). Missing entries are not supported.
pub fn svd_baseline(measurement: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = measurement.nrows();
    if p < 3 || measurement.ncols() < 3 {
        return Err(Error::DegenerateData(
            "measurement matrix too small for rank-3 factorization".into(),
        ));
    }
    let mut centered = measurement.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.sum() / p as f64;
        col.add_scalar_mut(-mean);
    }
    let (sigma, u) = sorted_svd(centered);
    if sigma[2] <= 1e-12 * sigma[0].max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateData(
            "fewer than 3 significant singular values".into(),
        ));
    }
    let mut structure = DMatrix::zeros(p, 3);
    for k in 0..3 {
        for r in 0..p {
            structure[(r, k)] = u[(r, k)] * sigma[k];
        }
    }
    Ok(structure)
}

/// Orthonormal basis of a full-column-rank matrix via QR.
fn orthonormal_basis(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = m.ncols();
    let qr = m.clone().qr();
    let r = qr.r();
    let scale = r
        .diagonal()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for i in 0..k {
        if r[(i, i)].abs() < 1e-10 * scale {
            return Err(Error::DegenerateData(
                "matrix is rank-deficient; subspace angle undefined".into(),
            ));
        }
    }
    Ok(qr.q())
}

/// Subspace angle between two structure estimates after removing the
/// translation gauge (both point clouds centered at their centroid).
/// Factorization determines structure only up to an invertible 3×3 mix and
/// a translation, so this is the accuracy metric for all SfM comparisons.
pub fn structure_angle(estimate: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    let center = |m: &DMatrix<f64>| {
        let mut c = m.clone();
        for k in 0..c.ncols() {
            let mean = c.column(k).sum() / c.nrows() as f64;
            c.column_mut(k).add_scalar_mut(-mean);
        }
        c
    };
    max_subspace_angle(&center(estimate), &center(truth))
}

/// Maximum principal angle (degrees, in [0, 90]) between the column spaces
/// of two P×k matrices: via singular values of Q_AᵀQ_B.
pub fn max_subspace_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() || a.ncols() == 0 {
        return Err(Error::InvalidInput {
            name: "subspaces",
            reason: format!(
                "need equal nonempty shapes, got {}x{} vs {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            ),
        });
    }
    let qa = orthonormal_basis(a)?;
    let qb = orthonormal_basis(b)?;
    let cross = qa.transpose() * qb;
    let svd = cross.svd(false, false);
    let min_sigma = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v));
    Ok(min_sigma.clamp(0.0, 1.0).acos().to_degrees())
}
