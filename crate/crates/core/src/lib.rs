//! Trimodal co-sparse analysis operators for semantic-aware depth
//! super-resolution.
//!
//! The crate learns three analysis operators (intensity, depth, semantics)
//! whose co-supports are encouraged to coincide, then uses them to upsample
//! sparse depth observations while denoising a semantic probability map.
//! It is `no_std` (with `alloc`); the `std` feature only switches on faster
//! matrix kernels.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod eval;
pub mod field;
pub mod learning;
pub mod manifold;
pub mod patches;
pub mod simulate;
pub mod sparsity;
pub mod superres;

pub use error::{Error, Result};
pub use field::{AnalysisOperator, Grid, Modality, ScalarField, SemanticField};
pub use simulate::DownsampleOp;
pub use superres::{superresolve, AnnealSchedule, SrProblem};
