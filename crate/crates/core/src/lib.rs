//! Three-term arithmetic progressions in `F_p^n`: counting, Fourier analysis,
//! subspace averaging and the density-increment step that lowers `Λ₃`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apcount;
pub mod cli;
pub mod error;
pub mod fourier;
pub mod gfspace;
pub mod improve;
pub mod rounding;
pub mod search;
pub mod selfcheck;
pub mod subspace;

pub use error::{Error, Result};
pub use gfspace::{DensityFunction, Element, GroupParams, PointSet};
pub use subspace::{CosetDecomposition, Subspace};
