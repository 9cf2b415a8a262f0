//! Exact state-vector teleportation protocols over W-Bell, GHZ-Bell and
//! Cluster-Bell channels, plus the routing and discrete-event network
//! simulation layers built on top of them.
//!
//! Qubit indices are zero-based throughout. Qubit 0 is the most significant
//! bit of a basis-state index, so the ket `|q0 q1 ... q(n-1)>` reads directly
//! as the binary index. Particle `k` of a printed ket is qubit `k - 1`.

// Negated float comparisons are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod config;
pub mod error;
pub mod netsim;
pub mod protocol;
pub mod report;
pub mod routing;
pub mod statevec;

pub use error::{Error, Result};
