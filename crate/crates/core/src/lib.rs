//! Two-timescale gradient descent ascent and extragradient for smooth minimax
//! problems, together with a spectral engine that classifies stationary
//! points from second-order information.
//!
//! The main entry points are:
//!
//! * [`problems`]: objectives, the saddle gradient `F` and its Jacobian.
//! * [`dynamics`]: discrete steppers, ODE fields and trajectory drivers.
//! * [`spectral`]: restricted Schur complements, eigencurves of `H_τ` and
//!   hemicurvatures.
//! * [`stability`]: region tests, Jacobian spectral maps and stability
//!   verdicts for large timescale separation.
//! * [`ensemble`]: seeded multi-start experiments.

pub mod assignment;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod instances;
pub mod linalg;
pub mod problems;
pub mod report;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use exec::Execution;
pub use problems::{builtin_problem, Builtin, HessianBlocks, MinimaxProblem, QuadraticSpec};
