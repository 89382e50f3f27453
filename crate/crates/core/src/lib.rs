//! One-dimensional ADER predictor-corrector schemes for hyperbolic
//! conservation laws.

pub mod basis;
pub mod cli;
pub mod corrector;
pub mod dec;
pub mod driver;
pub mod equations;
pub mod oracle;
pub mod error;
pub mod predictor;
pub mod problems;
pub mod reconstruction;

pub use error::{Error, Result};
