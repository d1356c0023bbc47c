pub mod analyze;
pub mod classify;
pub mod cli;
pub mod error;
pub mod integrate;
mod linalg;
pub mod model;
pub mod quadrature;
pub mod shoot;

pub use error::{Error, Result};
