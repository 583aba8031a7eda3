//! Exact combinatorics of group-based flows on claw trees.
//!
//! The crate enumerates flows of a finite abelian group, partitions
//! multisets of flows into fibers of the compatibility relation, applies
//! exchange moves, and certifies by exhaustive search that every fiber up to
//! a given degree is connected under moves of bounded degree.

pub mod certify;
pub mod cli;
pub mod error;
pub mod fiber;
pub mod flow;
pub mod group;
pub mod moves;

pub use certify::{
    certify_degree, certify_degree_with, fiber_connected_under, find_indispensable, find_indispensable_with,
    find_move_path, CertificationReport, CertifyOptions, Components, IndispensableSearch, MovePath, PathOutcome,
    Verdict, Witness,
};
pub use error::{FlowError, Result};
pub use fiber::{
    compatible, enumerate_all_fibers, enumerate_fiber, signature, ColumnSignature, FiberPartition, FlowMultiset,
    FlowTable,
};
pub use flow::{automorph, enumerate_flows, permute, translate, vertex_embedding, Flow, LatticePoint};
pub use group::{Automorphism, Group, GroupElem};
pub use moves::{apply_move, exchange_pair, find_exchange_subset, transform_colorings, Coloring, Move, PairExchange};
