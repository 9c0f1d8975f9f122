//! Numerical laboratory for kink clusters in 1+1 dimensional scalar fields.
//!
//! The library builds static kink profiles for even double-well potentials,
//! superposes them into multikink configurations, evolves the semilinear wave
//! equation with an energy-conserving leapfrog scheme, extracts modulation
//! parameters (positions, velocities, localized momenta) through orthogonality
//! conditions, integrates the attractive-Toda n-body reduction, and constructs
//! kink clusters with prescribed initial positions by backward shooting.

pub mod error;
pub mod exec;
pub mod experiments;
pub mod field;
pub mod io;
pub mod kink;
pub mod linalg;
pub mod modulation;
pub mod multikink;
pub mod nbody;
pub mod num;
pub mod ode;
pub mod potential;
pub mod rng;

pub use error::{Error, Result};
pub use field::{FieldState, Grid, RunRecord};
pub use kink::KinkProfile;
pub use modulation::{Decomposition, ModulationSeries};
pub use multikink::MultikinkConfig;
pub use nbody::{SpectralData, TodaState, TodaTrajectory};
pub use potential::Potential;
