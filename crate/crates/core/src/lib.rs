//! Egraph-based quantifier reduction and model-based projection for
//! conjunctions of literals over EUF, arrays, algebraic datatypes and
//! integer arithmetic atoms.

pub mod cli;
pub mod egraph;
pub mod error;
pub mod extraction;
pub mod mbp;
pub mod model;
pub mod oracle;
pub mod qel;
pub mod terms;

pub use error::{Error, Result};
