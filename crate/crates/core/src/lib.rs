//! Mass-action reaction networks: dynamical equivalence, complex and detailed
//! balance, disguised toric membership, network transforms, Newton polytope
//! geometry and trajectory tools.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod balance;
pub mod dynamics;
pub mod equivalence;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod linalg;
pub mod network;
pub mod transforms;

pub use error::{CrnError, Result};
pub use network::{MassActionSystem, NetReactionVectors, Network, SubspaceBasis};
