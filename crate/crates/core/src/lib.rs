//! Exact enumeration and tilted analysis of self-avoiding and repulsive walks
//! on transitive graphs with a nonunimodular automorphism group.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod analysis;
pub mod closed_form;
pub mod descriptor;
pub mod enumerate;
pub mod error;
pub mod graph;
pub mod persist;
pub mod sampler;
pub mod weight;

pub use analysis::{CriticalBracket, IdentityReport};
pub use closed_form::{OrientedNumerator, OrientedVerdict, TreeFormulas};
pub use descriptor::{ModelSpec, WeightSpec};
pub use enumerate::{
    BridgeTables, CountTable, HeightResolvedTable, Method, TwoPointTable, WalkTables,
};
pub use error::{Error, Result};
pub use graph::{EdgeLabel, GraphModel, HeightLattice, SealedBall, VertexId, ROOT};
