pub mod closed;
pub mod compare;
pub mod cubic;
pub mod cumulant;
pub mod dynamics;
pub mod error;
pub mod keldysh;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod ode;
pub mod phase_diagram;
pub mod stability;

pub use error::{Error, Result};
pub use model::{ModeAmplitudes, SystemParams, C64};
