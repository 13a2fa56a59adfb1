//! Sensitive distance and reachability oracles for directed graphs.
//!
//! A sensitive oracle works in three phases: preprocess a weighted digraph,
//! absorb one batch of `f` updates, then answer distance or reachability
//! queries about the updated graph. The implementation is algebraic
//! throughout: the graph becomes a polynomial matrix over a large prime
//! field, preprocessing builds an adjoint oracle on that matrix (either an
//! explicit adjoint or a kernel basis decomposition with a tunable
//! preprocessing/query trade-off), and a batch of updates becomes a rank-`f`
//! patch handled through the Sherman-Morrison-Woodbury adjoint identity.
//!
//! Modules, bottom up:
//! - [`algebra`]: prime fields, NTT, dense univariate polynomials;
//! - [`pmat`]: polynomial and scalar matrices, determinants, adjoints;
//! - [`kbd`]: the kernel basis decomposition adjoint oracle;
//! - [`smw`]: the batched low-rank update engine over a preprocessed base;
//! - [`graph`]: graph encodings and the distance/reachability oracles;
//! - [`refcheck`]: independent brute-force oracles for verification.

#![forbid(unsafe_code)]
// index loops over matrix dimensions read better than iterator chains here
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

pub mod algebra;
pub mod counter;
pub mod error;
pub mod graph;
pub mod kbd;
pub mod pmat;
pub mod refcheck;
pub mod rng;
pub mod smw;

pub use error::{Error, Result};

// Everything preprocessed is immutable and shareable: queries may run
// concurrently on shared oracles.
const _: () = {
    const fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<algebra::FieldConfig>();
    assert_send_sync::<algebra::Poly>();
    assert_send_sync::<pmat::PolyMatrix>();
    assert_send_sync::<kbd::KbdOracle>();
    assert_send_sync::<smw::BaseState>();
    assert_send_sync::<smw::UpdatePatch>();
    assert_send_sync::<graph::DistanceOracle>();
    assert_send_sync::<graph::ReachOracle>();
};
