//! Forwarding-based stabilization of cascade systems.
//!
//! The plant is a semi-discretized dissipative operator (the reference case
//! is a 1-D heat equation with distributed control and point observation)
//! feeding a marginally stable ODE through its output. The library
//!
//! * builds the discrete function space and the tagged operators
//!   ([`grid`], [`operator`]),
//! * assembles the cascade and verifies the structural assumptions
//!   ([`system`]),
//! * solves the Sylvester equation aligning the two subsystems, both
//!   numerically and in closed form for the heat plant ([`sylvester`]),
//! * computes the feedback gain, the certified gain bound `k*`, and both
//!   Lyapunov certificates ([`design`]),
//! * simulates the closed loop and checks the certificates along
//!   trajectories ([`sim`]).
//!
//! File formats shared with the command-line front end live in [`report`].

pub mod design;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod operator;
pub mod report;
pub mod sim;
pub mod sylvester;
pub mod system;

pub use error::{Error, Result};
