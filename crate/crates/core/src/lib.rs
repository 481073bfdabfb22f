//! Hybrid nonlinear observers for inertial navigation with landmark
//! measurements, formulated on the extended pose group SE₂(3).
//!
//! * [`liegroup`]: rotations, SE₂(3), its algebra and projections.
//! * [`landmarks`]: landmark geometry, the jump transformation set and the
//!   hybrid jump test.
//! * [`riccati`]: continuous Riccati gains and their observability checks.
//! * [`observers`]: innovation, flows, jumps and the discrete update.
//! * [`simkit`]: trajectories, synthetic sensors, run loops and Lyapunov tools.

pub mod error;
pub mod integrate;
pub mod landmarks;
pub mod liegroup;
pub mod observers;
pub mod riccati;
pub mod simkit;

pub use error::{Error, Result};

/// Code samples from the guide in `book/`, compiled as doc tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/group.md")]
    mod group {}
    #[doc = include_str!("../../../book/src/landmarks.md")]
    mod landmarks {}
    #[doc = include_str!("../../../book/src/observers.md")]
    mod observers {}
    #[doc = include_str!("../../../book/src/riccati.md")]
    mod riccati {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
