//! Multiregeneration: witness sets and multidegrees of subvarieties of
//! products of projective spaces, computed equation by equation with
//! homotopy continuation.
//!
//! The pipeline is split into layers:
//!
//! - [`polysys`]: variable groups, sparse multihomogeneous polynomials and the
//!   equation-file grammar.
//! - [`numerics`]: dense complex LU, Newton correction, singular values.
//! - [`tracker`]: predictor-corrector path tracking on patched homotopies.
//! - [`witness`]: slice types, generic slices, the root witness point and the
//!   multidegree table.
//! - [`regen`]: the regeneration engine and its scheduler.
//! - [`persist`]: the file-per-solution checkpoint tree.
//! - [`input`]: the working-directory input files.

pub mod error;
pub mod input;
pub mod numerics;
pub mod persist;
pub mod polysys;
pub mod regen;
pub mod rng;
pub mod tracker;
pub mod witness;

pub use error::{Error, Result};
pub use input::{load_inputs, InputConfig};
pub use num_complex::Complex64;
pub use persist::{NodeId, SolutionRecord, SolutionStore};
pub use polysys::{
    parse_equations, parse_variables, GroupKind, MultiprojectivePoint, PolySystem, Polynomial,
    VariableGroup, VariableGroups,
};
pub use regen::{run, RegenConfig, RegenOutput, Strategy};
pub use tracker::{TrackOutcome, TrackSettings, TrackStatus};
pub use witness::{MultidegreeTable, SliceType, TableRow, WitnessNode};
