//! Region-based image segmentation and inpainting with length and curvature
//! regularization.
//!
//! The image rectangle is subdivided into a planar cell complex of basic
//! regions (4 or 32 per pixel). Segmentation and inpainting are posed as
//! integer linear programs over per-face region variables and per-line-pair
//! boundary variables, solved through their LP relaxation with thresholding,
//! a boundary re-solve and lazy crossing-prevention cuts.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`complex`]: the exact-arithmetic cell complex and its incidence structure
//! - [`energy`]: data costs and length/curvature pair costs
//! - [`model`]: assembly of the length, curvature and inpainting programs
//! - [`simplex`]: a sparse bounded-variable simplex solver
//! - [`mincut`]: the graph-cut baseline for the length model
//! - [`optimize`]: relaxation, thresholding, re-solve and cutting-plane passes
//! - [`inpaint`]: damaged-component handling and coherence-guided inpainting
//! - [`mps`]: fixed-format MPS export/import
//! - [`raster`]: binary PGM/PPM image I/O
//!
//! All algebraic types are generic over the scalar type (any [`Scalar`],
//! typically `f64`); geometry is carried out in exact scaled-integer
//! arithmetic.

pub mod complex;
pub mod energy;
pub mod error;
pub mod geom;
pub mod inpaint;
pub mod mincut;
pub mod model;
pub mod mps;
pub mod optimize;
pub mod raster;
pub mod scalar;
pub mod simplex;

pub use complex::{build_complex, CellComplex, Connectivity, Edge, Face, LinePair, OrientedLine};
pub use energy::{
    data_cost_histogram, data_cost_unsupervised, pair_cost, pair_cost_parts, pair_costs,
    unsupervised_means, DataCost, EnergyParams, WeightMode,
};
pub use error::Error;
pub use inpaint::{
    assemble_output, coherence_directions, damaged_components, inpaint, inpaint_component,
    CoherenceField, ComponentFill, DamagedComponent, InpaintOptions, InpaintResult,
};
pub use mincut::segment_length_mincut;
pub use model::{
    build_curvature_model, build_inpaint_model, build_length_model, FaceRole, LinearModel,
    Relation, Row, VariableMap,
};
pub use mps::{read_mps_file, write_mps_file, write_solution};
pub use optimize::{
    labels_to_image, segment, CrossingPolicy, SegmentOptions, SegmentationResult,
};
pub use raster::{read_pnm, write_pgm, write_ppm, GrayImage, Pnm, RgbImage, Seed, SeedMask};
pub use scalar::Scalar;
pub use simplex::{solve_model, LpSolution, SimplexSolver, SolveStatus};
