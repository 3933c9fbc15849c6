//! Spanners, well-separated pair decompositions, and nearest-neighbour
//! search on finite metric spaces, costed by distance queries.
//!
//! The unifying theme: the input is a set of points whose pairwise distances
//! are expensive to evaluate, so algorithms are charged one unit per exact
//! distance they request and nothing for arithmetic on values already in
//! hand. [`metric`] provides the counting oracle, [`bounds`] maintains the
//! interval estimates that let algorithms reason about distances they have
//! not paid for, and [`spanner`], [`wspd`], and [`ann`] spend queries to
//! build structures or answer searches. [`harness`] drives seeded
//! experiment sweeps and writes their CSV/plot outputs.

pub mod ann;
pub mod bounds;
pub mod harness;
pub mod metric;
pub mod spanner;
pub mod wspd;
