//! Rectangular scans of binary matrices and exact reconstruction from them.
//!
//! Indices in the public API are 1-based throughout.

pub mod decompose;
pub mod error;
pub mod general;
pub mod grid;
pub mod invariant;
pub mod oracle;
pub mod scan;
pub mod smooth;
pub mod solver;
pub mod stats;
pub mod valuation;

pub use error::{Error, Result};
pub use general::{reconstruct, verify, ReconstructOptions, ReconstructionOutcome};
pub use grid::{add, residue, residue_rows, BinaryGrid, Grid, IntGrid, WindowSpec};
pub use scan::{chi, chi11_of_scan, is_smooth, rectangular_scan, SubgridRef};
pub use solver::{Reconstructor, SolverRegistry};
pub use stats::Stats;
