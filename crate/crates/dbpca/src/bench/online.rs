//! Online (minibatch) distributed fitting on the cube scene: each camera
//! first exposes a small batch of frames, then repeatedly receives more;
//! every step warm-starts from the previous posteriors, auxiliaries and
//! duals, with fresh latent posteriors for newly exposed columns.

use crate::bench::cube::CubeScene;
use crate::bench::sfm::max_subspace_angle;
use crate::error::{Error, Result};
use crate::model::{Mask, ModelConfig};
use crate::network::{DataPartition, NetworkGraph};
use crate::solver::{DistributedFit, SolverConfig};
use nalgebra::DMatrix;

/// Exposed frame counts per step: `initial, initial+increment, …` capped at
/// the scene's frames per camera (the final step always covers them all).
pub fn online_schedule(scene: &CubeScene, initial_frames: usize, increment: usize) -> Result<Vec<usize>> {
    let total = scene.frames_per_camera;
    if initial_frames == 0 || increment == 0 || total < initial_frames {
        return Err(Error::InvalidInput {
            name: "schedule",
            reason: format!(
                "need 1 ≤ initial ≤ frames_per_camera and increment ≥ 1, got ({initial_frames}, {increment}, {total})"
            ),
        });
    }
    let mut steps = Vec::new();
    let mut f = initial_frames;
    loop {
        steps.push(f.min(total));
        if f >= total {
            break;
        }
        f += increment;
    }
    Ok(steps)
}

/// Measurement restricted to the first `frames` frames of every camera,
/// with the matching per-camera column partition.
pub fn measurement_for_frames(scene: &CubeScene, frames: usize) -> (DMatrix<f64>, DataPartition) {
    let p = scene.point_count();
    let cols = 2 * frames * scene.camera_count;
    let mut values = DMatrix::zeros(p, cols);
    let mut col = 0;
    for cam in 0..scene.camera_count {
        for frame in 0..frames {
            for axis in 0..2 {
                values.set_column(col, &scene.observations[cam][frame].column(axis));
                col += 1;
            }
        }
    }
    let block = 2 * frames;
    let assignment = (0..scene.camera_count)
        .map(|c| (c * block..(c + 1) * block).collect())
        .collect();
    (values, DataPartition { assignment })
}

/// Result of one online step.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OnlineStep {
    pub frames_per_camera: usize,
    pub angle_deg: f64,
    pub iterations: usize,
    pub objective: f64,
    pub converged: bool,
}

/// Runs the online distributed fit over a schedule, reporting the subspace
/// angle of the posterior-mean structure against the true points after
/// every step. Returns the per-step records and the final fit.
pub fn run_online_dbpca(
    scene: &CubeScene,
    schedule: &[usize],
    graph: &NetworkGraph,
    model: &ModelConfig,
    solver: &SolverConfig,
) -> Result<(Vec<OnlineStep>, DistributedFit)> {
    if schedule.is_empty() {
        return Err(Error::InvalidInput {
            name: "schedule",
            reason: "schedule must contain at least one step".into(),
        });
    }
    let mut warm = None;
    let mut steps = Vec::with_capacity(schedule.len());
    let mut last_fit: Option<DistributedFit> = None;
    for (step_idx, &frames) in schedule.iter().enumerate() {
        let (data, partition) = measurement_for_frames(scene, frames);
        let mask = Mask::all(data.nrows(), data.ncols());
        let mut fit = match &warm {
            None => DistributedFit::new(&data, &mask, graph, &partition, model, solver)?,
            Some(w) => DistributedFit::new_warm(
                &data,
                &mask,
                graph,
                &partition,
                model,
                solver,
                w,
                step_idx as u64,
            )?,
        };
        let report = fit.run()?;
        let angle_deg = max_subspace_angle(&fit.consensus_posterior().w_mean, &scene.points3d)?;
        steps.push(OnlineStep {
            frames_per_camera: frames,
            angle_deg,
            iterations: report.iterations,
            objective: report.trace.final_objective().unwrap_or(f64::NAN),
            converged: report.converged,
        });
        warm = Some(fit.snapshot());
        last_fit = Some(fit);
    }
    Ok((steps, last_fit.expect("at least one step ran")))
}
