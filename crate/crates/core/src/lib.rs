//! Growth, cogrowth and strong-contraction computations for free groups,
//! their quotients and direct products of free groups.

pub mod axioms;
pub mod error;
pub mod geometry;
pub mod group;
pub mod growth;
pub mod keyvalue;
pub mod pipeline;
pub mod word;

pub use error::{Error, Result};
pub use group::{Element, Group, GroupKind, GroupSpec, NormalSubgroupOracle, OracleKind};
pub use word::{Letter, Word};
