//! File formats, run configuration, benchmark harness and command-line
//! front end for [`cosparse_core`].

pub mod bench;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod pgm;
pub mod tensor;

pub use error::{Error, Result};
