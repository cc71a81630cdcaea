//! Full-duplex multiuser system with user grouping: scenario model, exact
//! rate evaluation, successive convex approximation subproblems and the
//! two path-following algorithms.

pub mod algorithms;
pub mod error;
pub mod experiments;
pub mod model;
pub mod point;
pub mod rates;
pub mod sca;
pub mod system;

pub use error::{CoreError, Result};
pub use point::{Auxiliary, DesignPoint};
