//! Adjacency labeling schemes for geometric intersection graphs built from
//! biclique edge decompositions. Exact rational arithmetic throughout; every
//! adjacency decision is reproducible bit for bit.

pub mod biclique;
pub mod bits;
pub mod error;
pub mod geom;
pub mod instance;
pub mod labeling;
pub mod matrix;
pub mod partition_tree;
pub mod predicate;
pub mod rat;
pub mod semilinear;
pub mod univariate;
pub mod visibility;

pub use error::{Error, Result};
