pub mod bimodule;
pub mod bridge;
pub mod cli;
pub mod com;
pub mod error;
pub mod families;
pub mod fixtures;
pub mod graph;
pub mod json;
pub mod linalg;
pub mod lpa;
pub mod scalar;
pub mod shift_equiv;

pub use error::{Error, Result};
