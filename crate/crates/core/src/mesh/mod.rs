//! Inference-time meshing and evaluation: lattice occupancy, marching cubes,
//! surface sampling, Chamfer distance and F-score.

mod grid;
mod marching_cubes;
#[allow(clippy::module_inception)]
mod mesh;
mod metrics;
mod nn;
mod report;
mod sample;
mod tables;

pub use grid::{evaluate_grid, evaluate_grid_serial, OccupancyGrid, DEFAULT_RESOLUTION, GRID_CHUNK};
pub use marching_cubes::marching_cubes;
pub use mesh::MeshData;
pub use metrics::{chamfer, fscore, fscores, nearest_distances, FScore, MM_PER_UNIT};
pub use nn::HashGrid;
pub use report::{evaluate_mesh, summarize, write_metrics_csv, EvalRecord, EvalSummary, METRICS_CSV_HEADER};
pub use sample::sample_surface;
