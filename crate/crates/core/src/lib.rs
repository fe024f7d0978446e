//! Verification toolkit for locally bilipschitz maps between finite metric
//! graphs.
//!
//! Graphs carry their path metric and length measure. A [`GraphMap`] is a
//! combinatorial map whose edges run at constant speed along codomain walks.
//! The crate measures the local bilipschitz constant, checks the Lipschitz
//! quotient ball inclusions, lifts paths and spur homotopies, runs the
//! monodromy argument for injectivity, and cross-checks the resulting
//! verdict against a brute-force all-pairs oracle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod graph;
pub mod io;
pub mod lifting;
pub mod map;
pub mod theorem;
pub mod tol;
pub mod walk;

pub use graph::{
    ahlfors_constant, ball, cycle_rank, distance, GraphError, GraphPoint, MetricGraph,
};
pub use lifting::{
    contract_loop, fiber_transport, lift_homotopy, lift_path, monodromy_injectivity,
    FiberBijection, Homotopy, LiftError, MonodromyOutcome,
};
pub use map::{
    local_bilipschitz_constant, local_injectivity, lq_verify, max_multiplicity_in_ball,
    multiplicity, multiplicity_bound, verify_map, GraphMap, MapError,
};
pub use theorem::{global_bilipschitz_oracle, lower_bound_via_disjoint_balls, verify_theorem};
pub use walk::{Segment, Walk};
