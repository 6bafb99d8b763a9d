//! Rotating-cube synthetic scene for affine structure from motion.
//!
//! A unit cube (side 1, centered at the origin) rotates about the vertical
//! axis in 3° steps over 150° (50 frames); 5 fixed orthographic cameras at
//! equally spaced azimuths observe it. Collecting the 2D observations gives
//! a `points × 2·frames` measurement matrix whose rows play the global
//! weight rows (the 3D structure) and whose columns are local latent
//! samples (per-frame camera axes), partitioned by camera across nodes.

use crate::error::{Error, Result};
use crate::network::DataPartition;
use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

const VERTEX_EPS: f64 = 1e-9;
/// Camera elevation above the rotation plane; any non-degenerate fixed
/// value works, this one keeps all three axes well observed.
const ELEVATION_DEG: f64 = 20.0;

fn rot_z(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// A fixed orthographic camera. `toward` points from the cube center to the
/// camera; image coordinates of a world point q are `(right·q, up·q)`.
#[derive(Debug, Clone, Copy)]
pub struct Camera {
    pub toward: Vector3<f64>,
    pub right: Vector3<f64>,
    pub up: Vector3<f64>,
}

/// Scene parameters; [`generate_cube_sequence`] fixes everything except
/// point count, noise and seed at the reference experiment's values.
#[derive(Debug, Clone, Copy)]
pub struct CubeParams {
    pub points: usize,
    pub cameras: usize,
    pub frames_per_camera: usize,
    pub rotation_step_deg: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct CubeScene {
    /// True structure, one 3D point per row (P×3).
    pub points3d: DMatrix<f64>,
    /// Outward normals of the faces each point lies on (3 for vertices,
    /// 2 for edge points).
    face_normals: Vec<Vec<Vector3<f64>>>,
    pub cameras: Vec<Camera>,
    pub camera_count: usize,
    pub frames_per_camera: usize,
    pub rotation_step_deg: f64,
    pub noise_sigma: f64,
    /// Projected observations, `observations[camera][frame]` of shape P×2.
    pub observations: Vec<Vec<DMatrix<f64>>>,
}

impl CubeScene {
    pub fn point_count(&self) -> usize {
        self.points3d.nrows()
    }

    pub fn total_frames(&self) -> usize {
        self.camera_count * self.frames_per_camera
    }

    /// Rotation angle of a frame in degrees.
    pub fn rotation_angle_deg(&self, frame: usize) -> f64 {
        self.rotation_step_deg * frame as f64
    }

    /// Measurement-matrix column of (camera, frame, axis).
    pub fn column_of(&self, camera: usize, frame: usize, axis: usize) -> usize {
        camera * 2 * self.frames_per_camera + 2 * frame + axis
    }

    fn rotation(&self, frame: usize) -> Matrix3<f64> {
        // clockwise about +z viewed from above
        rot_z(-self.rotation_angle_deg(frame).to_radians())
    }

    /// Direction from the cube center to a camera, expressed in the cube's
    /// body frame at a given rotation step.
    pub fn toward_camera_in_cube_frame(&self, camera: usize, frame: usize) -> Vector3<f64> {
        self.rotation(frame).transpose() * self.cameras[camera].toward
    }

    pub fn supporting_faces(&self, point: usize) -> &[Vector3<f64>] {
        &self.face_normals[point]
    }
}

fn cube_vertices() -> Vec<Vector3<f64>> {
    let mut v = Vec::with_capacity(8);
    for &x in &[-0.5, 0.5] {
        for &y in &[-0.5, 0.5] {
            for &z in &[-0.5, 0.5] {
                v.push(Vector3::new(x, y, z));
            }
        }
    }
    v
}

fn cube_edges() -> Vec<(Vector3<f64>, Vector3<f64>)> {
    let verts = cube_vertices();
    let mut edges = Vec::new();
    for a in 0..8 {
        for b in a + 1..8 {
            let diff = verts[a] - verts[b];
            // adjacent vertices differ in exactly one coordinate
            if diff.iter().filter(|c| c.abs() > VERTEX_EPS).count() == 1 {
                edges.push((verts[a], verts[b]));
            }
        }
    }
    debug_assert_eq!(edges.len(), 12);
    edges
}

fn supporting_faces_of(p: &Vector3<f64>) -> Vec<Vector3<f64>> {
    let mut faces = Vec::new();
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            if (p[axis] - sign * 0.5).abs() < VERTEX_EPS {
                let mut n = Vector3::zeros();
                n[axis] = sign;
                faces.push(n);
            }
        }
    }
    faces
}

/// Generates a cube scene from explicit parameters.
pub fn generate_cube_scene(params: CubeParams) -> Result<CubeScene> {
    if params.points < 8 {
        return Err(Error::InvalidInput {
            name: "points",
            reason: format!("need at least the 8 cube vertices, got {}", params.points),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);

    // 8 vertices always included, remainder sampled uniformly on the edges.
    let mut points = cube_vertices();
    let edges = cube_edges();
    while points.len() < params.points {
        let (a, b) = edges[rng.gen_range(0..edges.len())];
        let t: f64 = rng.gen();
        points.push(a + t * (b - a));
    }
    let face_normals: Vec<Vec<Vector3<f64>>> = points.iter().map(supporting_faces_of).collect();
    let points3d = DMatrix::from_fn(points.len(), 3, |r, c| points[r][c]);

    let cameras: Vec<Camera> = (0..params.cameras)
        .map(|c| {
            let azimuth = 2.0 * std::f64::consts::PI * c as f64 / params.cameras as f64;
            let elevation = ELEVATION_DEG.to_radians();
            let toward = Vector3::new(
                elevation.cos() * azimuth.cos(),
                elevation.cos() * azimuth.sin(),
                elevation.sin(),
            );
            let view = -toward;
            let right = view.cross(&Vector3::z()).normalize();
            let up = right.cross(&view).normalize();
            Camera { toward, right, up }
        })
        .collect();

    let mut scene = CubeScene {
        points3d,
        face_normals,
        cameras,
        camera_count: params.cameras,
        frames_per_camera: params.frames_per_camera,
        rotation_step_deg: params.rotation_step_deg,
        noise_sigma: params.noise_sigma,
        observations: Vec::new(),
    };

    let mut observations = Vec::with_capacity(params.cameras);
    for cam in &scene.cameras {
        let mut frames = Vec::with_capacity(params.frames_per_camera);
        for f in 0..params.frames_per_camera {
            let rot = rot_z(-(params.rotation_step_deg * f as f64).to_radians());
            let mut obs = DMatrix::zeros(points.len(), 2);
            for (p, point) in points.iter().enumerate() {
                let q = rot * point;
                let mut u = cam.right.dot(&q);
                let mut v = cam.up.dot(&q);
                if params.noise_sigma > 0.0 {
                    let (nu, nv): (f64, f64) =
                        (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                    u += params.noise_sigma * nu;
                    v += params.noise_sigma * nv;
                }
                obs[(p, 0)] = u;
                obs[(p, 1)] = v;
            }
            frames.push(obs);
        }
        observations.push(frames);
    }
    scene.observations = observations;
    Ok(scene)
}

/// The reference scene: 5 cameras, 3° rotation per frame over 150°
/// (50 frames per camera).
pub fn generate_cube_sequence(points_per_cube: usize, noise_sigma: f64, seed: u64) -> Result<CubeScene> {
    generate_cube_scene(CubeParams {
        points: points_per_cube,
        cameras: 5,
        frames_per_camera: 50,
        rotation_step_deg: 3.0,
        noise_sigma,
        seed,
    })
}

/// Measurement matrix of a scene: rows are points, columns are frame axes
/// grouped by camera (x/y interleaved per frame). `provenance[c]` maps a
/// column back to (camera, frame, axis).
#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    pub values: DMatrix<f64>,
    pub provenance: Vec<(usize, usize, usize)>,
}

/// Assembles the full measurement matrix.
pub fn assemble_measurement(scene: &CubeScene) -> MeasurementMatrix {
    let p = scene.point_count();
    let cols = 2 * scene.total_frames();
    let mut values = DMatrix::zeros(p, cols);
    let mut provenance = Vec::with_capacity(cols);
    for cam in 0..scene.camera_count {
        for frame in 0..scene.frames_per_camera {
            for axis in 0..2 {
                let col = scene.column_of(cam, frame, axis);
                values.set_column(col, &scene.observations[cam][frame].column(axis));
                provenance.push((cam, frame, axis));
            }
        }
    }
    MeasurementMatrix { values, provenance }
}

/// One network node per camera: contiguous blocks of 2·frames columns.
pub fn camera_partition(scene: &CubeScene) -> DataPartition {
    let block = 2 * scene.frames_per_camera;
    DataPartition {
        assignment: (0..scene.camera_count)
            .map(|c| (c * block..(c + 1) * block).collect())
            .collect(),
    }
}
