pub mod analysis;
pub mod dataset;
pub mod error;
pub mod fem;
pub mod image;
pub mod metrics;
pub mod scenario;
pub mod simp;

pub use error::{Error, Result};
