//! Deadbeat control built from nested sets.
//!
//! * [`subspace`]: orthonormal-basis subspace algebra, preimages and affine intersections.
//! * [`linear`]: controllability tests, the subspace chain, scalar-input deadbeat
//!   gains and the set-intersection tracker for linear plants.
//! * [`nonlinear`]: two third-order nonlinear plants with closed-form deadbeat trackers.
//! * [`simulate`]: coupled simulation, regulation runs and seeded batch experiments.
//! * [`cli`]: the `deadbeat` command-line front end.

pub mod cli;
pub mod error;
pub mod linear;
pub mod nonlinear;
pub mod random;
pub mod simulate;
pub mod subspace;

pub use error::{Error, Result};
pub use linear::{
    ControllabilityReport, Form, GainAlgorithm, GainResult, LinearSystem, LinearTracker,
    SubspaceChain,
};
pub use subspace::{AffineSet, Subspace, Tolerance};
