pub mod error;
pub mod matlin;
pub mod models;
pub mod spectral;
pub mod evolve;
pub mod predict;
pub mod bench;

pub use error::{Error, Result};
