//! Six-degree-of-freedom glider simulation with a strap-down camera seeker,
//! an episodic control environment, a classical PID autopilot and Monte Carlo
//! dispersion statistics.

// `!(x > 0.0)` guards are written that way so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aero;
pub mod atmosphere;
pub mod baseline;
pub mod config;
pub mod dynamics;
pub mod env;
pub mod eval;
pub mod frames;
pub mod model;
pub mod seeker;

pub use env::{Action, Environment, Observation, ScenarioConfig, StepResult, TerminationCause};

/// Crate version, also reported by the command-line tool and bindings.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
