//! Moment relaxations, conditioning and Gaussian threshold rounding for
//! constraint satisfaction problems with a global cardinality constraint
//! (Max/Min Bisection, alpha-Max Cut, globally constrained Max 2-Sat).
//!
//! The pipeline is
//! [`lasserre::build_relaxation`] -> [`sdp_solver::solve`] ->
//! [`independence::decorrelate`] -> [`rounding::bias_decompose`] ->
//! [`rounding::round`] -> [`rounding::repair_balance`],
//! packaged as [`rounding::pipeline`]. [`landscape`] analyses the rounding on
//! a single payoff term, [`dictator`] builds dictatorship-test gadgets from
//! level-2 solutions, and [`oracle`] provides exact reference computations.

pub mod bench;
pub mod cli;
pub mod dictator;
pub mod error;
pub mod independence;
pub mod instance;
pub mod landscape;
pub mod lasserre;
pub mod normal;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod rounding;
pub mod sdp_solver;

pub use error::{Error, Result};
pub use instance::{CardinalityFunction, CspInstance, Family, PayoffTerm, ProblemKind, Sense};
pub use lasserre::{MomentIndex, MomentSolution};

/// Version tag embedded in every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;
