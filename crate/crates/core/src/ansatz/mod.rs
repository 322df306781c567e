//! Alternating layered ansatz: construction, parameter layout, light cones
//! and Gaussian initialization.

pub(crate) mod circuit;
mod cone;
mod params;

pub use circuit::{apply_circuit, build_ala, AlaCircuit, Block, Gate};
pub use cone::{light_cone, LightCone};
pub use params::{init_params, init_params_trial, ParamTensor, PARAM_LAYOUT};
