//! Experiment generators and metrics: the rotating-cube structure-from-motion
//! setup, SVD factorization baseline, subspace-angle scoring, online
//! minibatch schedules, synthetic low-rank completion and Gaussian data.

pub mod cube;
pub mod lowrank;
pub mod online;
pub mod sfm;
pub mod synth;

pub use cube::{assemble_measurement, camera_partition, generate_cube_sequence, CubeScene, MeasurementMatrix};
pub use lowrank::{column_mean_rmse, generate_lowrank_ratings, LowRankInstance};
pub use online::{online_schedule, run_online_dbpca, OnlineStep};
pub use sfm::{max_subspace_angle, svd_baseline};
pub use synth::generate_gaussian_data;
