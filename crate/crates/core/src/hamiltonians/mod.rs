//! Parametric Heisenberg models, exact ground states, guiding states and
//! labeled datasets.

mod dataset;
mod eigen;
mod lattice;

pub use dataset::{generate_dataset, generate_dataset_with, generate_samples, Dataset, DatasetFile, Sample};
pub use eigen::{ground_state, ground_state_with, make_guiding_state, EigenSolverConfig, GroundSolution};
pub use lattice::{build_heisenberg, CouplingVector, Lattice2D};
