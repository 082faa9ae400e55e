//! Handwriting trajectory generation by model-based generative adversarial
//! imitation learning.

pub mod baseline;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod gail;
pub mod nn;
pub mod synthetic;
pub mod trajectory;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
