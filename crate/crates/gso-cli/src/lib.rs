//! IO, synthetic data, regularization paths and the benchmark harness
//! around [`gso_core`].

pub mod bench;
pub mod error;
pub mod fileio;
pub mod manifest;
pub mod path;
pub mod synth;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
