//! Observation-mask generation (missing at random and two
//! missing-not-at-random mechanisms) and reconstruction scoring.

use crate::bench::cube::CubeScene;
use crate::error::{Error, Result};
use crate::model::Mask;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Mask mechanism selectable from experiment configs.
///
/// The threshold mechanism censors low values (value-dependent
/// missingness); the cube occlusion mechanism hides points on back-facing
/// faces. The `seed` only matters for `mar` — the other two are
/// deterministic functions of the data or scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MaskSpec {
    None,
    Mar { ratio: f64, seed: u64 },
    MnarThreshold { quantile: f64 },
    MnarOcclusion,
}

/// Entries missing independently with probability `ratio`; columns that end
/// up all-missing are redrawn. Deterministic per seed.
pub fn generate_mar_mask(dim: usize, len: usize, ratio: f64, seed: u64) -> Result<Mask> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::InvalidInput {
            name: "ratio",
            reason: format!("must lie in [0, 1), got {ratio}"),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut flags = vec![false; dim * len];
    for n in 0..len {
        loop {
            let mut any = false;
            for d in 0..dim {
                let observed = rng.gen::<f64>() >= ratio;
                flags[n * dim + d] = observed;
                any |= observed;
            }
            if any {
                break;
            }
        }
    }
    Mask::from_flags(dim, len, flags)
}

/// MAR over (point, frame) pairs of a P × 2F measurement matrix: a
/// discarded 2D observation loses both of its coordinate columns.
pub fn generate_mar_pair_mask(points: usize, frames: usize, ratio: f64, seed: u64) -> Result<Mask> {
    let pair = generate_mar_mask(points, frames, ratio, seed)?;
    let mut flags = vec![false; points * 2 * frames];
    for f in 0..frames {
        for p in 0..points {
            let observed = pair.is_observed(p, f);
            flags[(2 * f) * points + p] = observed;
            flags[(2 * f + 1) * points + p] = observed;
        }
    }
    Mask::from_flags(points, 2 * frames, flags)
}

/// Value-dependent censoring: entries below the empirical `quantile` of the
/// data are missing. Columns that would lose every entry keep their largest
/// value observed.
pub fn generate_mnar_threshold_mask(data: &DMatrix<f64>, quantile: f64) -> Result<Mask> {
    if !(0.0..1.0).contains(&quantile) {
        return Err(Error::InvalidInput {
            name: "quantile",
            reason: format!("must lie in (0, 1), got {quantile}"),
        });
    }
    let mut sorted: Vec<f64> = data.iter().copied().collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("data must not contain NaN"));
    if sorted.is_empty() || sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateData(
            "constant data has no usable quantile threshold".into(),
        ));
    }
    let k = ((sorted.len() as f64) * quantile).floor() as usize;
    let threshold = sorted[k.min(sorted.len() - 1)];

    let (dim, len) = (data.nrows(), data.ncols());
    let mut flags = vec![false; dim * len];
    for n in 0..len {
        let mut best = (0usize, f64::NEG_INFINITY);
        let mut any = false;
        for d in 0..dim {
            let v = data[(d, n)];
            let observed = v >= threshold;
            flags[n * dim + d] = observed;
            any |= observed;
            if v > best.1 {
                best = (d, v);
            }
        }
        if !any {
            flags[n * dim + best.0] = true;
        }
    }
    Mask::from_flags(dim, len, flags)
}

/// Realistic visual occlusion on the rotating cube: a point is missing in a
/// frame when every cube face it lies on is back-facing to that camera;
/// both coordinate columns of the observation are masked together.
pub fn generate_mnar_occlusion_mask(scene: &CubeScene) -> Result<Mask> {
    let p = scene.point_count();
    let f = scene.frames_per_camera;
    let total_cols = 2 * scene.camera_count * f;
    let mut flags = vec![false; p * total_cols];
    for c in 0..scene.camera_count {
        for frame in 0..f {
            let toward = scene.toward_camera_in_cube_frame(c, frame);
            for point in 0..p {
                let visible = scene
                    .supporting_faces(point)
                    .iter()
                    .any(|normal| normal.dot(&toward) > 0.0);
                let col = scene.column_of(c, frame, 0);
                flags[col * p + point] = visible;
                flags[(col + 1) * p + point] = visible;
            }
        }
    }
    Mask::from_flags(p, total_cols, flags)
}

/// Root-mean-squared error of a reconstruction against the true data over
/// an evaluation entry set.
pub fn reconstruction_rmse(
    data: &DMatrix<f64>,
    eval: &[(usize, usize)],
    recon: &DMatrix<f64>,
) -> Result<f64> {
    if eval.is_empty() {
        return Err(Error::InvalidInput {
            name: "eval",
            reason: "evaluation entry set is empty".into(),
        });
    }
    let mut ss = 0.0;
    for &(d, n) in eval {
        let r = data[(d, n)] - recon[(d, n)];
        ss += r * r;
    }
    Ok((ss / eval.len() as f64).sqrt())
}
