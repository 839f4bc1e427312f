//! Mean-field time evolution, stationary states and attractor classification.

mod attractor;
mod fixed_points;
mod ics;
mod integrate;

pub use attractor::*;
pub use fixed_points::*;
pub use ics::*;
pub use integrate::*;
