//! Identification of interventional distributions from partial ancestral graphs.
//!
//! The crate is `no_std` and only needs `alloc`. It provides mixed graphs
//! (latent DAGs, MAGs, PAGs), the structural analytics used by bucket-level
//! identification, a symbolic probability-expression engine, the DAG and PAG
//! identification algorithms, the generalized adjustment criterion, and an
//! exact ground-truth oracle built on brute-force equivalence classes.
#![no_std]

extern crate alloc;

mod bits;
mod error;

pub mod adjustment;
pub mod expr;
pub mod graph;
pub mod ident_dag;
pub mod ident_pag;
pub mod oracle;
pub mod structure;

pub use error::{Error, Result};
pub use graph::{EdgeMark, LatentDag, Mag, MixedGraph, NodeSet, Pag};
