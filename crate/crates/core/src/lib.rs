pub mod bundle;
pub mod cli;
pub mod error;
pub mod extension;
pub mod frobenius;
pub mod linalg;
pub mod manifest;
pub mod report;
pub mod saito;
pub mod scalar;
pub mod tensor;
pub mod ttstar;

pub use error::{Error, Result};
